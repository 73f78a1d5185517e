#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wf::text {

// Thrown on malformed UTF-8. byte_offset points at the first offending byte
// within the input that was being decoded.
struct Utf8Error : std::runtime_error {
  Utf8Error(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg), byte_offset(offset) {}
  std::size_t byte_offset;
};

// Strict UTF-8 decode: rejects overlong forms, surrogates, and values past
// U+10FFFF. Throws Utf8Error with the byte offset of the bad sequence.
std::u32string utf8_to_utf32(std::string_view s);

// Encode Unicode scalar values back to UTF-8. Throws std::invalid_argument on
// surrogates or out-of-range values.
std::string utf32_to_utf8(std::u32string_view s);

// Canonical word normalization used everywhere a word enters the system:
// NFC, then default Unicode case folding, then trim of surrounding
// whitespace. Interior whitespace survives (multi-token entries are legal).
std::string normalize_word(std::string_view raw);

// True if the code point has the Unicode White_Space property.
bool is_unicode_whitespace(char32_t c);

// Number of Unicode scalar values in a valid UTF-8 string.
std::size_t scalar_count(std::string_view s);

}  // namespace wf::text
