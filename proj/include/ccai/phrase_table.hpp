// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

/// @file phrase_table.hpp
/// Phrase inventory and the context-conditioned phrase distribution
/// Q(p | left, right), estimated by relative frequency over training
/// captions. The decoder draws replacement phrases from Q and uses it for
/// the proposal correction in the acceptance test.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccai/caption.hpp"
#include "ccai/rng.hpp"

namespace ccai {

/// Deduplicated phrase set with a fixed index assignment: phrases are sorted
/// lexicographically by token sequence and numbered in that order.
class PhraseInventory {
 public:
  PhraseInventory() = default;
  explicit PhraseInventory(std::vector<Phrase> phrases);

  std::size_t size() const { return phrases_.size(); }
  std::size_t max_len() const { return max_len_; }
  const std::vector<Phrase>& phrases() const { return phrases_; }

  /// Index of the phrase whose space-joined text is `text`.
  std::optional<std::size_t> index_of(std::string_view text) const;
  bool contains(std::string_view text) const { return index_of(text).has_value(); }

 private:
  std::vector<Phrase> phrases_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t max_len_ = 0;
};

/// One phrase per line, space-separated tokens. Throws IoError when the file
/// cannot be read and InputError on an empty file or an empty line.
PhraseInventory load_phrase_inventory(const std::string& path);
void save_phrase_inventory(const std::string& path, const PhraseInventory& inventory);

/// All contiguous n-grams of length 1..max_len in the corpus.
PhraseInventory extract_phrases(std::span<const Caption> corpus, std::size_t max_len);

struct PhraseCount {
  Phrase phrase;
  std::uint64_t count = 0;
  double prob = 0.0;
};

/// Distribution over phrases observed between one (left, right) word pair.
struct ContextDistribution {
  std::vector<PhraseCount> entries;  // sorted by phrase
  std::uint64_t total = 0;
  std::unordered_map<std::string, std::size_t> by_text;
};

using ContextKey = std::pair<std::string, std::string>;

class ContextTable {
 public:
  ContextTable() = default;

  /// Counts per (left, right) context; probabilities are count / total.
  static ContextTable from_counts(
      std::map<ContextKey, std::map<Phrase, std::uint64_t>> counts);

  const ContextDistribution* find(std::string_view left, std::string_view right) const;

  std::size_t num_contexts() const { return contexts_.size(); }
  /// Number of (left, phrase, right) triples.
  std::size_t domain_size() const { return domain_size_; }
  const std::map<ContextKey, ContextDistribution>& contexts() const { return contexts_; }

 private:
  std::map<ContextKey, ContextDistribution> contexts_;
  std::size_t domain_size_ = 0;
};

/// Relative-frequency estimate of Q. Every occurrence of an inventory phrase
/// at positions [a, b] of a caption counts once toward the context formed by
/// the tokens at a-1 and b+1 (<begin> / <end> at the boundaries).
ContextTable estimate_context_table(std::span<const Caption> corpus,
                                    const PhraseInventory& inventory);

/// Draws from Q(. | left, right); nullptr when the context is unseen.
const Phrase* sample_phrase(const ContextTable& q, std::string_view left, std::string_view right,
                            Rng& rng);

/// Q(segment | left, right) when the segment is a single phrase listed under
/// that context, else 0.
double context_prob(const ContextTable& q, std::string_view left, std::string_view right,
                    std::span<const std::string> segment);

/// Tab-separated "left phrase right count prob" lines, sorted by context
/// and then phrase. Markers are written literally as <begin> and <end>.
void write_context_table(std::ostream& out, const ContextTable& q);
void save_context_table(const std::string& path, const ContextTable& q);

/// Re-validates every context: stored probabilities must match count / total
/// and sum to one. Probabilities are recomputed from the counts on load.
ContextTable read_context_table(std::istream& in, const std::string& name = "<stream>");
ContextTable load_context_table(const std::string& path);

}  // namespace ccai
