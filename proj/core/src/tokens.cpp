#include "ragmcp/tokens.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>

namespace ragmcp {
namespace {

enum class CharClass { Space, Word, Other };

constexpr UChar32 kReplacement = 0xFFFD;

CharClass classify(UChar32 c) {
  if (c < 0) return CharClass::Other;
  if (c < 0x80) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_') {
      return CharClass::Word;
    }
    return (c == ' ' || (c >= 0x09 && c <= 0x0D)) ? CharClass::Space : CharClass::Other;
  }
  if (c == '_' || u_isalpha(c) || u_isdigit(c)) return CharClass::Word;
  if (u_isUWhiteSpace(c)) return CharClass::Space;
  return CharClass::Other;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

// Calls sink(kind, begin, end) for each token, where [begin, end) are byte
// offsets into text.
template <typename Sink>
void scan(std::string_view text, Sink&& sink) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  int32_t word_start = -1;
  while (i < length) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    const CharClass cls = classify(c);
    if (cls == CharClass::Word) {
      if (word_start < 0) word_start = start;
      continue;
    }
    if (word_start >= 0) {
      sink(CharClass::Word, word_start, start);
      word_start = -1;
    }
    if (cls == CharClass::Other) sink(CharClass::Other, start, i);
  }
  if (word_start >= 0) sink(CharClass::Word, word_start, length);
}

}  // namespace

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    if (s[i] < 0x80) {
      const char c = static_cast<char>(s[i++]);
      out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + ('a' - 'A')) : c;
      continue;
    }
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    append_utf8(out, c < 0 ? kReplacement : u_tolower(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  scan(text, [&](CharClass, int32_t begin, int32_t end) {
    // Non-word tokens pass through to_lower as well so that a malformed
    // sequence comes out as U+FFFD.
    tokens.push_back(to_lower(text.substr(static_cast<std::size_t>(begin),
                                          static_cast<std::size_t>(end - begin))));
  });
  return tokens;
}

TokenCount count_tokens(std::string_view text) {
  TokenCount count;
  scan(text, [&](CharClass, int32_t, int32_t) { ++count.value; });
  return count;
}

}  // namespace ragmcp
