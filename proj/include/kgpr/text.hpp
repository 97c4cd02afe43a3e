#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kgpr {

/// ASCII letters and digits are word bytes; so is every byte >= 0x80, which
/// keeps UTF-8 multibyte characters inside their words.
constexpr bool is_word_byte(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

/// Lowercases ASCII and splits on every non-alphanumeric byte.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Replaces every run of non-alphanumeric bytes with one space and trims the
/// ends, keeping case: "countries_spoken_in" -> "countries spoken in".
inline std::string relation_words(std::string_view relation) {
  std::string out;
  bool pending_space = false;
  for (char ch : relation) {
    if (!is_word_byte(static_cast<unsigned char>(ch))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

}  // namespace kgpr
