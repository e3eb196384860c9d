#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace entail {

/// Identity key for a sentence: trimmed, internal whitespace collapsed to a
/// single space, lowercased, one trailing period removed.
std::string normalize_sentence(std::string_view sentence);

/// Lowercase alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Bag-of-tokens F1 between two sentences. Two empty sentences score 1.
double token_f1(std::string_view a, std::string_view b);

std::string trim(std::string_view s);

}  // namespace entail
