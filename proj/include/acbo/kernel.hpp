#pragma once

#include <string>
#include <vector>

#include "acbo/dag.hpp"

namespace acbo {

// Reserved padding token appended to the shorter sequence of a pair. It is an
// ordinary token value (matches itself), just never produced by tokenization.
inline const std::string kPadToken = "<pad>";

// Case-folded, whitespace-split token sequence.
struct TokenSeq {
    std::vector<std::string> tokens;

    std::size_t length() const { return tokens.size(); }
    static TokenSeq from_text(const std::string& text);
};

// Normalized positional-match kernel: K(a, b) = |{t : a_t = b_t}| / L after
// padding both sequences to the common length L. K(x, x) = 1, so kappa = 1.
double surrogate_kernel(const TokenSeq& a, const TokenSeq& b);

// 1 - K(a,b) / sqrt(K(a,a) K(b,b)). Throws InputError on an empty sequence
// (zero self-kernel).
double delta_similarity(const TokenSeq& a, const TokenSeq& b);

// The bound B * kappa * sqrt(2 delta) on any bounded-norm linear scorer's
// margin over a delta-similar pair.
double margin_bound(double b_norm, double kappa, double delta);

// Weight norm needed to enforce margin gamma: gamma / (kappa sqrt(2 delta)).
// Returns +infinity at delta = 0 (no finite norm achieves a positive margin).
double required_b(double gamma, double kappa, double delta);

// Explicit finite feature vector (the surrogate phi), Euclidean norm <= kappa.
struct FeatureVec {
    std::vector<double> coordinates;
    double norm_bound = 1.0;

    double norm() const;
};

// Embeds a padded sequence pair into one shared coordinate basis so that
// inner products reproduce the surrogate kernel exactly.
std::pair<FeatureVec, FeatureVec> feature_pair(const TokenSeq& a, const TokenSeq& b);

// B * ||phi_plus - phi_minus||, the Cauchy-Schwarz-tight achievable margin.
double max_achievable_margin(const FeatureVec& phi_plus, const FeatureVec& phi_minus,
                             double b_norm);

struct SimilarityReport {
    double delta = 0.0;
    double kernel_cosine = 1.0;
    double margin_bound = 0.0;     // B kappa sqrt(2 delta)
    double achieved_margin = 0.0;  // B ||phi+ - phi-||
    double required_b = 0.0;       // gamma / (kappa sqrt(2 delta))
};

SimilarityReport similarity_report(const FeatureVec& phi_plus, const FeatureVec& phi_minus,
                                   double b_norm, double gamma);

// Separation of the two oracle-answer renderings for a discriminating pair:
// rho = 1 - cosine. Canonical single-token "yes"/"no" gives rho = 1.
double interventional_rho(const TokenSeq& response_plus, const TokenSeq& response_minus);

// A near-miss hypothesis pair embedded in a d-variable system, plus the
// rendered premise+reasoning sequences. The sequences differ in O(1) tokens
// out of L = Theta(d^2); for d >= 4 the graphs share a skeleton but carry
// different v-structures (not Markov equivalent), with a non-empty
// discrimination set. d = 3 degenerates to the chain/fork pair, whose
// premises are identical.
struct NearMissPair {
    Dag g_plus;
    Dag g_minus;
    std::string premise_plus;
    std::string premise_minus;
    TokenSeq seq_plus;    // premise + reasoning chain
    TokenSeq seq_minus;
    TokenSeq answer_yes;  // canonical oracle-answer renderings
    TokenSeq answer_no;
};

NearMissPair near_miss_factory(int d);

struct KernelSweepRow {
    int d = 0;
    std::size_t seq_len = 0;
    double delta = 0.0;
    double margin_bound = 0.0;
    double required_b = 0.0;
    double rho = 0.0;
};

// One factory row per depth with B = kappa = gamma = 1.
std::vector<KernelSweepRow> kernel_sweep(int d_min, int d_max);

}  // namespace acbo
