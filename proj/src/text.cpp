#include "acbo/text.hpp"

#include <cctype>

namespace acbo {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::size_t token_count(const std::string& text) {
    std::size_t n = 0;
    bool in_tok = false;
    for (char c : text) {
        const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_tok) ++n;
        in_tok = !ws;
    }
    return n;
}

}  // namespace acbo
