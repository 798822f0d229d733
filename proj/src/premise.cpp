#include <algorithm>
#include <map>
#include <sstream>

#include "acbo/indep.hpp"

namespace acbo {

namespace {

std::string name_list(const std::vector<std::string>& names) {
    if (names.size() == 1) return names[0];
    if (names.size() == 2) return names[0] + " and " + names[1];
    std::string out;
    for (std::size_t i = 0; i + 1 < names.size(); ++i) {
        out += names[i] + ", ";
    }
    out += "and " + names.back();
    return out;
}

// " given Z" / " given Z and W" / " given Z, W, and U"; empty for no cond.
std::string given_clause(const std::vector<int>& cond, const std::vector<std::string>& names) {
    if (cond.empty()) return "";
    std::vector<std::string> cn;
    cn.reserve(cond.size());
    for (int c : cond) cn.push_back(names[c]);
    return " given " + name_list(cn);
}

VarMask to_mask(const std::vector<int>& cond) {
    VarMask m = 0;
    for (int v : cond) m |= var_bit(v);
    return m;
}

// Smallest, lexicographically-first separating set of size in [1, max_size].
// Searching in increasing size means the first hit has no separating proper
// subset, i.e. it is minimal.
std::optional<std::vector<int>> minimal_separator(const Dag& g, int x, int y, int max_size) {
    std::vector<int> others;
    for (int v = 0; v < g.num_vars(); ++v) {
        if (v != x && v != y) others.push_back(v);
    }
    max_size = std::min<int>(max_size, static_cast<int>(others.size()));
    std::vector<int> pick;
    for (int size = 1; size <= max_size; ++size) {
        pick.assign(size, 0);
        std::vector<int> idx(size);
        for (int i = 0; i < size; ++i) idx[i] = i;
        for (;;) {
            for (int i = 0; i < size; ++i) pick[i] = others[idx[i]];
            if (d_separated(g, x, y, to_mask(pick))) return pick;
            int i = size - 1;
            while (i >= 0 && idx[i] == static_cast<int>(others.size()) - size + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return std::nullopt;
}

}  // namespace

RenderedPremise render_premise(const Dag& g, const CiPolicy& policy) {
    const int d = g.num_vars();
    const auto& names = g.var_names();

    std::vector<CiStatement> dependents;
    std::vector<CiStatement> independents;

    if (policy.full_ci) {
        const int max_cond = policy.full_max_cond < 0 ? d - 2 : policy.full_max_cond;
        for (const auto& s : all_ci_statements(g, std::max(0, max_cond))) {
            if (s.independent) {
                independents.push_back(s);
            } else if (s.cond.empty()) {
                dependents.push_back(s);
            }
            // Conditional dependence has no sentence form and is not emitted.
        }
    } else {
        std::vector<CiStatement> conditional;
        for (int x = 0; x < d; ++x) {
            for (int y = x + 1; y < d; ++y) {
                if (d_separated(g, x, y, VarMask{0})) {
                    independents.push_back(CiStatement{x, y, {}, true});
                } else {
                    dependents.push_back(CiStatement{x, y, {}, false});
                    if (!g.has_edge(x, y) && !g.has_edge(y, x)) {
                        if (auto sep = minimal_separator(g, x, y, policy.max_sep_size)) {
                            conditional.push_back(CiStatement{x, y, *sep, true});
                        }
                    }
                }
            }
        }
        // Premise length stays O(d^2) tokens: keep only the smallest-separator
        // statements up to the cap, then restore canonical order.
        const std::size_t cap = policy.max_conditional < 0
                                    ? static_cast<std::size_t>((d + 2) / 3)
                                    : static_cast<std::size_t>(policy.max_conditional);
        std::stable_sort(conditional.begin(), conditional.end(),
                         [](const CiStatement& a, const CiStatement& b) {
                             return a.cond.size() < b.cond.size();
                         });
        if (conditional.size() > cap) conditional.resize(cap);
        independents.insert(independents.end(), conditional.begin(), conditional.end());
    }

    auto canonical = [](const CiStatement& a, const CiStatement& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        if (a.cond.size() != b.cond.size()) return a.cond.size() < b.cond.size();
        return a.cond < b.cond;
    };
    std::sort(dependents.begin(), dependents.end(), canonical);
    std::sort(independents.begin(), independents.end(), canonical);

    std::ostringstream text;
    text << "Suppose there is a closed system of " << d << " variables " << name_list(names)
         << ".";
    for (const auto& s : dependents) {
        text << " " << names[s.x] << " correlates with " << names[s.y] << ".";
    }
    for (std::size_t i = 0; i < independents.size(); ++i) {
        const auto& s = independents[i];
        text << " ";
        if (i == 0 && !dependents.empty()) text << "However, ";
        text << names[s.x] << " and " << names[s.y] << " are independent"
             << given_clause(s.cond, names) << ".";
    }

    RenderedPremise out;
    out.text = text.str();
    out.premise.num_vars = d;
    out.premise.statements = std::move(dependents);
    out.premise.statements.insert(out.premise.statements.end(), independents.begin(),
                                  independents.end());
    validate_premise(out.premise);
    return out;
}

namespace {

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        cur += text[i];
        if ((text[i] == '.' || text[i] == ':') &&
            (i + 1 == text.size() || text[i + 1] == ' ')) {
            out.push_back(cur);
            cur.clear();
            if (i + 1 < text.size()) ++i;  // skip the separating space
        }
    }
    // Trailing unterminated material is itself a malformed sentence.
    std::string rest;
    for (char c : cur) {
        if (!std::isspace(static_cast<unsigned char>(c))) rest += c;
    }
    if (!rest.empty()) out.push_back(cur);
    return out;
}

std::vector<std::string> words(const std::string& sentence) {
    std::istringstream in(sentence);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::string strip_trailing(const std::string& w, char c) {
    if (!w.empty() && w.back() == c) return w.substr(0, w.size() - 1);
    return w;
}

// Parses "A" / "A and B" / "A, B, and C" token runs (already split on spaces).
std::vector<std::string> parse_name_run(const std::vector<std::string>& toks,
                                        std::size_t begin, std::size_t end,
                                        std::size_t sentence_idx) {
    std::vector<std::string> names;
    for (std::size_t i = begin; i < end; ++i) {
        std::string t = toks[i];
        t = strip_trailing(strip_trailing(t, '.'), ',');
        if (t == "and") continue;
        if (t.empty()) throw DataError("empty variable name", sentence_idx);
        names.push_back(t);
    }
    if (names.empty()) throw DataError("expected a variable list", sentence_idx);
    return names;
}

}  // namespace

ParsedPremise parse_premise(const std::string& text) {
    const auto sentences = split_sentences(text);
    if (sentences.empty()) throw DataError("empty premise text", 1);

    // Header.
    const auto head = words(sentences[0]);
    const std::vector<std::string> expect = {"Suppose", "there", "is", "a",
                                             "closed", "system", "of"};
    if (head.size() < expect.size() + 3) throw DataError("malformed premise header", 1);
    for (std::size_t i = 0; i < expect.size(); ++i) {
        if (head[i] != expect[i]) throw DataError("malformed premise header", 1);
    }
    int d = 0;
    try {
        d = std::stoi(head[7]);
    } catch (...) {
        throw DataError("bad variable count in header", 1);
    }
    if (head[8] != "variables" && head[8] != "variable") {
        throw DataError("malformed premise header", 1);
    }
    const auto names = parse_name_run(head, 9, head.size(), 1);
    if (static_cast<int>(names.size()) != d) {
        throw DataError("header variable count does not match the name list", 1);
    }
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);

    auto lookup = [&](std::string w, std::size_t sent) {
        w = strip_trailing(strip_trailing(w, '.'), ',');
        auto it = index.find(w);
        if (it == index.end()) throw DataError("unknown variable name: " + w, sent);
        return it->second;
    };

    ParsedPremise out;
    out.premise.num_vars = d;
    out.names = names;

    for (std::size_t si = 1; si < sentences.size(); ++si) {
        auto toks = words(sentences[si]);
        const std::size_t sent = si + 1;
        if (toks.empty()) throw DataError("empty sentence", sent);

        if (toks[0] == "All") {
            // Optional "All the statistical relations among these N variables
            // are as follows:" sentence from the original record format.
            if (sentences[si].back() != ':') throw DataError("malformed relations sentence", sent);
            continue;
        }
        if (toks[0] == "However,") toks.erase(toks.begin());
        if (toks.empty()) throw DataError("empty sentence", sent);

        if (toks.size() == 4 && toks[1] == "correlates" && toks[2] == "with") {
            int x = lookup(toks[0], sent);
            int y = lookup(toks[3], sent);
            if (x == y) throw DataError("statement pair must be distinct", sent);
            if (x > y) std::swap(x, y);
            out.premise.statements.push_back(CiStatement{x, y, {}, false});
            continue;
        }
        if (toks.size() >= 5 && toks[1] == "and" && toks[3] == "are" &&
            (toks[4] == "independent." || toks[4] == "independent")) {
            int x = lookup(toks[0], sent);
            int y = lookup(toks[2], sent);
            if (x == y) throw DataError("statement pair must be distinct", sent);
            if (x > y) std::swap(x, y);
            std::vector<int> cond;
            if (toks[4] == "independent") {
                if (toks.size() < 7 || toks[5] != "given") {
                    throw DataError("malformed independence sentence", sent);
                }
                for (const auto& n : parse_name_run(toks, 6, toks.size(), sent)) {
                    cond.push_back(lookup(n, sent));
                }
                std::sort(cond.begin(), cond.end());
            }
            out.premise.statements.push_back(CiStatement{x, y, cond, true});
            continue;
        }
        throw DataError("unrecognized sentence: " + sentences[si], sent);
    }

    validate_premise(out.premise);
    return out;
}

}  // namespace acbo
