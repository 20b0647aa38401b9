#include <cctype>

#include "declab/tok/tok.hpp"

namespace declab::tok {

namespace {

bool is_word_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::vector<std::string> pretokenize(const std::string& text) {
  std::vector<std::string> out;
  bool in_string = false;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (in_string) {
      if (c == '"') {
        in_string = false;
        out.emplace_back(1, c);
        ++i;
      } else if (c == ' ') {
        out.emplace_back(kMetaspace);
        ++i;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        out.emplace_back(1, c);
        ++i;
      } else if (is_word_char(c)) {
        size_t j = i;
        while (j < n && is_word_char(text[j])) ++j;
        out.emplace_back(text, i, j - i);
        i = j;
      } else {
        out.emplace_back(1, c);
        ++i;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < n && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      out.emplace_back(" ");
      i = j;
    } else if (c == '"') {
      in_string = true;
      out.emplace_back(1, c);
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      out.emplace_back(1, c);
      ++i;
    } else if (is_word_char(c)) {
      size_t j = i;
      while (j < n && is_word_char(text[j])) ++j;
      out.emplace_back(text, i, j - i);
      i = j;
    } else {
      out.emplace_back(1, c);  // punctuation stands alone
      ++i;
    }
  }
  if (in_string) throw UnterminatedString{};
  return out;
}

}  // namespace declab::tok
