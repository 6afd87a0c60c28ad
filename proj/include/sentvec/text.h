#ifndef SENTVEC_TEXT_H_
#define SENTVEC_TEXT_H_

#include <string>
#include <string_view>

#include "sentvec/common.h"

namespace sentvec {

// Unicode NFC normalization of UTF-8 text. Throws ParseError on invalid UTF-8.
std::string nfc(std::string_view utf8);

std::string to_lower(std::string_view utf8);

struct TokenizerOptions {
  bool lowercase = true;
};

// Splits NFC-normalized text on Unicode whitespace. Leading and trailing
// punctuation is trimmed from each token; tokens that are punctuation only
// are dropped.
Sentence tokenize(std::string_view utf8, const TokenizerOptions& options = {});

// Strips a trailing '\r' (CRLF input).
inline std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace sentvec

#endif  // SENTVEC_TEXT_H_
