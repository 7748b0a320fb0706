// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace ccai {

inline constexpr std::string_view kBegin = "<begin>";
inline constexpr std::string_view kEnd = "<end>";

/// Lowercases ASCII letters and splits on whitespace. Punctuation stays
/// attached to its word ("bucket." is one token).
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end);
inline std::string join(const std::vector<std::string>& tokens) {
  return join(tokens, 0, tokens.size());
}

/// A tokenized sentence. Boundary markers are implicit: position 0 is
/// <begin> and position size()+1 is <end>.
struct Caption {
  std::vector<std::string> tokens;

  static Caption parse(std::string_view text) { return Caption{tokenize(text)}; }

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::string text() const { return join(tokens); }

  friend auto operator<=>(const Caption&, const Caption&) = default;
};

/// Nonempty word sequence from the phrase inventory.
struct Phrase {
  std::vector<std::string> tokens;

  static Phrase parse(std::string_view text) { return Phrase{tokenize(text)}; }

  std::size_t size() const { return tokens.size(); }
  std::string text() const { return join(tokens); }

  friend auto operator<=>(const Phrase&, const Phrase&) = default;
};

}  // namespace ccai
