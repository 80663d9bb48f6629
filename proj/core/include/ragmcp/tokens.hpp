#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ragmcp {

// Count of tokenizer output. Every prompt/completion measurement in the
// project goes through count_tokens, so the numbers are reproducible.
struct TokenCount {
  std::size_t value = 0;

  friend auto operator<=>(const TokenCount&, const TokenCount&) = default;
};

// Word tokens are maximal runs of Unicode letters (L*), decimal digits (Nd) and
// '_' , lowercased with simple case mapping. Any other non-whitespace code point
// is a token on its own. Whitespace is dropped. Malformed UTF-8 sequences are
// emitted as U+FFFD. Pure function of the code points; the C locale is never
// consulted.
std::vector<std::string> tokenize(std::string_view text);

// Same as tokenize(text).size() without materialising the tokens.
TokenCount count_tokens(std::string_view text);

// Simple (1:1) Unicode lowercase mapping of every code point.
std::string to_lower(std::string_view text);

}  // namespace ragmcp
