#include "wordforge/text/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace wf::text {

namespace {

[[noreturn]] void bad_byte(std::size_t at) {
  throw Utf8Error("invalid UTF-8 at byte offset " + std::to_string(at), at);
}

}  // namespace

std::u32string utf8_to_utf32(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int extra;
    char32_t c;
    if ((b0 & 0xE0) == 0xC0) {
      extra = 1;
      c = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2;
      c = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3;
      c = b0 & 0x07;
    } else {
      bad_byte(i);
    }
    if (i + static_cast<std::size_t>(extra) >= s.size()) bad_byte(i);
    for (int k = 1; k <= extra; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) bad_byte(i);
      c = (c << 6) | (bk & 0x3F);
    }
    static constexpr char32_t kMin[4] = {0, 0x80, 0x800, 0x10000};
    if (c < kMin[extra]) bad_byte(i);                    // overlong
    if (c > 0x10FFFF) bad_byte(i);                       // out of range
    if (c >= 0xD800 && c <= 0xDFFF) bad_byte(i);         // surrogate
    out.push_back(c);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::string utf32_to_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c > 0x10FFFF || (c >= 0xD800 && c <= 0xDFFF)) {
      throw std::invalid_argument("code point U+" + std::to_string(static_cast<uint32_t>(c)) +
                                  " is not a Unicode scalar value");
    }
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_unicode_whitespace(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

std::size_t scalar_count(std::string_view s) { return utf8_to_utf32(s).size(); }

std::string normalize_word(std::string_view raw) {
  // Validate first so callers get byte offsets instead of ICU's silent U+FFFD
  // substitution.
  utf8_to_utf32(raw);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || nfc == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString composed = nfc->normalize(us, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("ICU NFC normalization failed");
  }
  composed.foldCase();  // default (full) case folding

  std::u32string scalars;
  scalars.reserve(static_cast<std::size_t>(composed.length()));
  for (int32_t i = 0; i < composed.length();) {
    const UChar32 c = composed.char32At(i);
    scalars.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }

  std::size_t b = 0;
  std::size_t e = scalars.size();
  while (b < e && is_unicode_whitespace(scalars[b])) ++b;
  while (e > b && is_unicode_whitespace(scalars[e - 1])) --e;
  return utf32_to_utf8(std::u32string_view(scalars).substr(b, e - b));
}

}  // namespace wf::text
