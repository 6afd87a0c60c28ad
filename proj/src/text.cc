#include "sentvec/text.h"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace sentvec {
namespace {

void check_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0) throw ParseError(0, "invalid UTF-8 sequence");
  }
}

icu::UnicodeString from_utf8(std::string_view s) {
  check_utf8(s);
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

bool is_ascii(std::string_view s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  if (is_ascii(utf8)) return std::string(utf8);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC unavailable");
  icu::UnicodeString u = from_utf8(utf8);
  icu::UnicodeString out = norm->normalize(u, status);
  if (U_FAILURE(status)) throw ParseError(0, "NFC normalization failed");
  return to_utf8(out);
}

std::string to_lower(std::string_view utf8) {
  if (is_ascii(utf8)) {
    std::string out(utf8);
    for (char& c : out)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
  }
  icu::UnicodeString u = from_utf8(utf8);
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

Sentence tokenize(std::string_view utf8, const TokenizerOptions& options) {
  const std::string text = nfc(utf8);
  const icu::UnicodeString u = from_utf8(text);

  Sentence tokens;
  const int32_t n = u.length();
  int32_t i = 0;
  while (i < n) {
    while (i < n && u_isUWhiteSpace(u.char32At(i))) i = u.moveIndex32(i, 1);
    int32_t start = i;
    while (i < n && !u_isUWhiteSpace(u.char32At(i))) i = u.moveIndex32(i, 1);
    int32_t end = i;
    // Trim punctuation on both ends.
    while (start < end && u_ispunct(u.char32At(start)))
      start = u.moveIndex32(start, 1);
    while (end > start && u_ispunct(u.char32At(u.moveIndex32(end, -1))))
      end = u.moveIndex32(end, -1);
    if (start == end) continue;
    icu::UnicodeString token(u, start, end - start);
    if (options.lowercase) token.toLower(icu::Locale::getRoot());
    tokens.push_back(to_utf8(token));
  }
  return tokens;
}

}  // namespace sentvec
