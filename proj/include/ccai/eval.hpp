// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

/// @file eval.hpp
/// Corpus BLEU against multi-reference sets, leave-one-out reference BLEU,
/// and caption diversity.
///
/// BLEU here is uncased corpus-level BLEU-4 without smoothing: clipped n-gram
/// counts (clip = max count over the scene's references), geometric mean over
/// n = 1..4, and a brevity penalty against the closest reference length per
/// sentence, ties going to the shorter reference.

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccai/caption.hpp"

namespace ccai {

inline constexpr std::size_t kBleuOrder = 4;

using HypothesisMap = std::map<std::string, Caption>;
using ReferenceSet = std::map<std::string, std::vector<Caption>>;

struct BleuReport {
  double bleu = 0.0;  // 0..100
  std::array<double, kBleuOrder> precision{};
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};
  double brevity_penalty = 0.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  std::size_t sentences = 0;
  /// Not computed; kept so report files have a stable schema.
  std::optional<double> meteor;
};

/// Throws InputError naming every hypothesis scene without references.
/// Reads decoder output lines "id<TAB>caption[<TAB>score]".
HypothesisMap load_hypotheses(const std::string& path);

BleuReport corpus_bleu(const HypothesisMap& hyps, const ReferenceSet& refs);

struct SelfBleuReport {
  BleuReport report;
  std::size_t scenes_used = 0;
  std::size_t scenes_skipped = 0;
};

/// Caption `batch_index` of every scene scored against that scene's other
/// captions. Scenes with too few captions are skipped and counted.
SelfBleuReport reference_self_bleu(const ReferenceSet& refs, std::size_t batch_index);

std::size_t unique_caption_count(const HypothesisMap& hyps);

void write_report_text(std::ostream& out, const BleuReport& report,
                       std::optional<std::size_t> unique_captions);
void write_report_kv(std::ostream& out, const BleuReport& report,
                     std::optional<std::size_t> unique_captions);

/// "scene_id<TAB>sentence_bleu" per hypothesis, for plotting against
/// external ratings.
void write_scatter(std::ostream& out, const HypothesisMap& hyps, const ReferenceSet& refs);

}  // namespace ccai
