#pragma once

#include <string>
#include <vector>

namespace acbo {

// Whitespace-split tokens, case-folded. Punctuation stays attached.
std::vector<std::string> tokenize(const std::string& text);

// Token count under the premise grammar's whitespace tokenization.
std::size_t token_count(const std::string& text);

}  // namespace acbo
