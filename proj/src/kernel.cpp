#include "acbo/kernel.hpp"

#include <cmath>
#include <limits>

#include "acbo/indep.hpp"
#include "acbo/text.hpp"

namespace acbo {

TokenSeq TokenSeq::from_text(const std::string& text) {
    return TokenSeq{tokenize(text)};
}

namespace {

std::size_t match_count(const TokenSeq& a, const TokenSeq& b, std::size_t len) {
    std::size_t matches = 0;
    for (std::size_t t = 0; t < len; ++t) {
        const std::string& ta = t < a.tokens.size() ? a.tokens[t] : kPadToken;
        const std::string& tb = t < b.tokens.size() ? b.tokens[t] : kPadToken;
        if (ta == tb) ++matches;
    }
    return matches;
}

}  // namespace

double surrogate_kernel(const TokenSeq& a, const TokenSeq& b) {
    if (a.length() == 0 || b.length() == 0) {
        throw InputError("surrogate_kernel: empty token sequence");
    }
    const std::size_t len = std::max(a.length(), b.length());
    return static_cast<double>(match_count(a, b, len)) / static_cast<double>(len);
}

double delta_similarity(const TokenSeq& a, const TokenSeq& b) {
    if (a.length() == 0 || b.length() == 0) {
        throw InputError("delta_similarity: zero self-kernel (empty sequence)");
    }
    // Self-kernels are exactly 1 under the normalized positional kernel.
    return 1.0 - surrogate_kernel(a, b);
}

double margin_bound(double b_norm, double kappa, double delta) {
    if (b_norm < 0.0 || kappa < 0.0 || delta < 0.0) {
        throw InputError("margin_bound arguments must be nonnegative");
    }
    return b_norm * kappa * std::sqrt(2.0 * delta);
}

double required_b(double gamma, double kappa, double delta) {
    if (gamma < 0.0 || kappa <= 0.0 || delta < 0.0) {
        throw InputError("required_b: gamma/delta nonnegative, kappa positive");
    }
    if (delta == 0.0) return std::numeric_limits<double>::infinity();
    return gamma / (kappa * std::sqrt(2.0 * delta));
}

double FeatureVec::norm() const {
    double s = 0.0;
    for (double c : coordinates) s += c * c;
    return std::sqrt(s);
}

std::pair<FeatureVec, FeatureVec> feature_pair(const TokenSeq& a, const TokenSeq& b) {
    if (a.length() == 0 || b.length() == 0) {
        throw InputError("feature_pair: empty token sequence");
    }
    const std::size_t len = std::max(a.length(), b.length());
    FeatureVec fa, fb;
    const double unit = 1.0 / std::sqrt(static_cast<double>(len));
    for (std::size_t t = 0; t < len; ++t) {
        const std::string& ta = t < a.tokens.size() ? a.tokens[t] : kPadToken;
        const std::string& tb = t < b.tokens.size() ? b.tokens[t] : kPadToken;
        if (ta == tb) {
            fa.coordinates.push_back(unit);
            fb.coordinates.push_back(unit);
        } else {
            fa.coordinates.push_back(unit);
            fa.coordinates.push_back(0.0);
            fb.coordinates.push_back(0.0);
            fb.coordinates.push_back(unit);
        }
    }
    fa.norm_bound = 1.0;
    fb.norm_bound = 1.0;
    return {std::move(fa), std::move(fb)};
}

double max_achievable_margin(const FeatureVec& phi_plus, const FeatureVec& phi_minus,
                             double b_norm) {
    if (phi_plus.coordinates.size() != phi_minus.coordinates.size()) {
        throw InputError("feature vectors must share one coordinate space");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < phi_plus.coordinates.size(); ++i) {
        const double diff = phi_plus.coordinates[i] - phi_minus.coordinates[i];
        s += diff * diff;
    }
    return b_norm * std::sqrt(s);
}

SimilarityReport similarity_report(const FeatureVec& phi_plus, const FeatureVec& phi_minus,
                                   double b_norm, double gamma) {
    const double na = phi_plus.norm();
    const double nb = phi_minus.norm();
    if (na <= 0.0 || nb <= 0.0) throw InputError("similarity_report: zero-norm feature vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < phi_plus.coordinates.size(); ++i) {
        dot += phi_plus.coordinates[i] * phi_minus.coordinates[i];
    }
    const double kappa = std::max(phi_plus.norm_bound, phi_minus.norm_bound);

    SimilarityReport r;
    r.delta = std::clamp(1.0 - dot / (na * nb), 0.0, 1.0);
    r.kernel_cosine = 1.0 - r.delta;
    r.margin_bound = margin_bound(b_norm, kappa, r.delta);
    r.achieved_margin = max_achievable_margin(phi_plus, phi_minus, b_norm);
    r.required_b = required_b(gamma, kappa, r.delta);
    return r;
}

double interventional_rho(const TokenSeq& response_plus, const TokenSeq& response_minus) {
    return delta_similarity(response_plus, response_minus);
}

NearMissPair near_miss_factory(int d) {
    if (d < 3) throw InputError("near_miss_factory requires d >= 3");

    NearMissPair out;
    const auto names = default_var_names(d);

    std::string reasoning_plus, reasoning_minus;
    if (d == 3) {
        // Chain vs fork: one Markov equivalence class, identical premises; the
        // sequences differ only in the final reasoning step.
        out.g_plus = Dag(d, names, {{0, 1}, {1, 2}});
        out.g_minus = Dag(d, names, {{1, 0}, {1, 2}});
        reasoning_plus = " Therefore " + names[0] + " causes " + names[1] + ".";
        reasoning_minus = " Therefore " + names[1] + " causes " + names[0] + ".";
    } else {
        // Diamond vs twisted diamond on the four highest-indexed variables,
        // all other variables isolated. Both graphs share the skeleton and the
        // full marginal dependence pattern, so every statement outside the
        // motif is rendered at identical token positions; the v-structures
        // (hence conditional separators) differ, leaving an O(1)-token tail.
        const int a = d - 4, b = d - 3, c = d - 2, e = d - 1;
        out.g_plus = Dag(d, names, {{a, b}, {a, c}, {b, e}, {c, e}});
        out.g_minus = Dag(d, names, {{a, b}, {a, c}, {b, e}, {e, c}});
        reasoning_plus = " Therefore " + names[b] + " and " + names[c] +
                         " are both causes of " + names[e] + ".";
        reasoning_minus = " Therefore " + names[e] + " is a cause of " + names[c] + ".";
    }

    out.premise_plus = render_premise(out.g_plus).text;
    out.premise_minus = render_premise(out.g_minus).text;
    out.seq_plus = TokenSeq::from_text(out.premise_plus + reasoning_plus);
    out.seq_minus = TokenSeq::from_text(out.premise_minus + reasoning_minus);
    out.answer_yes = TokenSeq{{"yes"}};
    out.answer_no = TokenSeq{{"no"}};
    return out;
}

std::vector<KernelSweepRow> kernel_sweep(int d_min, int d_max) {
    if (d_min < 3 || d_max < d_min) throw InputError("kernel_sweep: bad depth range");
    std::vector<KernelSweepRow> rows;
    for (int d = d_min; d <= d_max; ++d) {
        const NearMissPair pair = near_miss_factory(d);
        KernelSweepRow row;
        row.d = d;
        row.seq_len = std::max(pair.seq_plus.length(), pair.seq_minus.length());
        row.delta = delta_similarity(pair.seq_plus, pair.seq_minus);
        row.margin_bound = margin_bound(1.0, 1.0, row.delta);
        row.required_b = required_b(1.0, 1.0, row.delta);
        row.rho = interventional_rho(pair.answer_yes, pair.answer_no);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace acbo
