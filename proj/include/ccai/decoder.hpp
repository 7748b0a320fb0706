// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

/// @file decoder.hpp
/// Caption decoding by Metropolis-Hastings with simulated annealing.
///
/// The chain state is a caption y'. Each step picks two distinct positions
/// i < j uniformly, replaces y'_i..y'_j with a phrase drawn from
/// Q(p | y'_{i-1}, y'_{j+1}), and accepts with probability min(1, a0 * a1):
///
///   a0 = exp((score(y) - score(y')) / t)          score = cos + eta * |y|
///   a1 = |y|^2 Q(y'_i..y'_j | ctx) / (|y'|^2 Q(p | ctx))
///
/// Every proposal, accepted or not, is checked against the best caption seen
/// so far; the best one is returned. The temperature at step k is T * tau^k
/// and the loop runs while it is at least `min_temp`.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccai/caption.hpp"
#include "ccai/cca.hpp"
#include "ccai/phrase_table.hpp"
#include "ccai/rng.hpp"
#include "ccai/sparse.hpp"

namespace ccai {

enum class InitMode {
  /// Uniform draw from a pool of training captions.
  kTrainingCaption,
  /// Most frequent phrase chain starting from <begin>.
  kGreedyChain,
};

struct DecoderConfig {
  double eta = 0.05;
  double start_temp = 10000.0;
  double tau = 0.995;
  double min_temp = 0.1;
  std::uint64_t seed = 0;
  std::size_t max_len = 50;
  double reverse_epsilon = 0.0;
  /// When true the 1/t factor scales the whole score (cos + eta|y|);
  /// otherwise only the cosine term, with eta|y| added outside.
  bool eta_inside_temperature = true;
  InitMode init = InitMode::kTrainingCaption;
  bool record_trace = false;

  /// Throws ParameterError when the schedule or weights are invalid.
  void validate() const;
};

/// Number of loop iterations the schedule runs: the smallest k with
/// start_temp * tau^k < min_temp.
std::size_t schedule_length(const DecoderConfig& config);

struct ScoreParts {
  double cosine = 0.0;
  std::size_t length = 0;

  double total(double eta) const { return cosine + eta * static_cast<double>(length); }
};

/// Scores captions against one projected input.
class CaptionScorer {
 public:
  CaptionScorer(const CcaModel& model, const PhraseInventory& inventory, LatentVec input)
      : model_(&model), inventory_(&inventory), input_(std::move(input)) {}

  ScoreParts parts(const Caption& y) const;
  double score(const Caption& y, double eta) const { return parts(y).total(eta); }

 private:
  const CcaModel* model_;
  const PhraseInventory* inventory_;
  LatentVec input_;
};

/// cos(u(x), v(y)) + eta * |y| with |y| counted in words.
double score(const LatentVec& ux, const CcaModel& model, const Caption& y,
             const PhraseInventory& inventory, double eta);

struct Proposal {
  std::size_t i = 0;  // 1-based, inclusive
  std::size_t j = 0;  // 1-based, inclusive, i < j
  Phrase phrase;
  Caption new_caption;
  double forward_prob = 0.0;
  double reverse_prob = 0.0;
};

/// Proposal kernel. Returns nullopt when |y| < 2, the context is unseen, or
/// the new caption would exceed `config.max_len`.
std::optional<Proposal> propose(const Caption& y, const ContextTable& q, Rng& rng,
                                const DecoderConfig& config);

/// min(1, a0 * a1), or 0 when the reverse move has zero probability.
double acceptance_ratio(const ScoreParts& old_parts, const ScoreParts& new_parts,
                        const Proposal& proposal, double temperature, const DecoderConfig& config);

struct TraceStep {
  std::size_t step = 0;
  double temperature = 0.0;
  double current_score = 0.0;
  double proposal_score = 0.0;
  double best_score = 0.0;
  bool proposed = false;
  bool accepted = false;
};

struct DecodeResult {
  Caption caption;
  double score = 0.0;
  std::size_t iterations = 0;
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  /// Set when no step produced a valid proposal; `caption` is then the init.
  bool no_valid_proposal = false;
  std::vector<TraceStep> trace;
};

DecodeResult decode(const CcaModel& model, const SparseVec& phi, const ContextTable& q,
                    const PhraseInventory& inventory, const Caption& init,
                    const DecoderConfig& config, Rng& rng);

/// Same as above with a generator seeded from `config.seed`.
DecodeResult decode(const CcaModel& model, const SparseVec& phi, const ContextTable& q,
                    const PhraseInventory& inventory, const Caption& init,
                    const DecoderConfig& config);

/// Constant-temperature chain (no annealing). Returns the state after each
/// of `steps` steps.
std::vector<Caption> sample_fixed_temp(const CcaModel& model, const SparseVec& phi,
                                       const ContextTable& q, const PhraseInventory& inventory,
                                       const Caption& init, double temperature, std::size_t steps,
                                       std::uint64_t seed, const DecoderConfig& config = {});

/// Initial caption according to `config.init`.
Caption choose_init(std::span<const Caption> pool, const ContextTable& q,
                    const DecoderConfig& config, Rng& rng);

/// Highest-count phrase chain from <begin> until a phrase closes at <end>.
Caption greedy_chain(const ContextTable& q, std::size_t max_len);

struct BatchInput {
  std::string id;
  SparseVec phi;
};

struct BatchResult {
  std::string id;
  Caption caption;
  double score = 0.0;
  bool ok = false;
  bool warning = false;
  std::string message;
  DecodeResult detail;
};

/// Decodes each input with its own stream seeded by derive_seed(seed, id),
/// which is used first to draw the init caption and then by the chain.
/// Results come back in input order and do not depend on scheduling.
/// Failures are reported per id.
std::vector<BatchResult> decode_batch(const CcaModel& model, std::span<const BatchInput> inputs,
                                      const ContextTable& q, const PhraseInventory& inventory,
                                      std::span<const Caption> init_pool,
                                      const DecoderConfig& config, unsigned jobs = 1);

/// "id<TAB>caption<TAB>score" lines; failed entries are skipped.
void write_decode_results(std::ostream& out, std::span<const BatchResult> results);

/// "id<TAB>step<TAB>temperature<TAB>current<TAB>proposal<TAB>best<TAB>accepted" lines.
void write_trace(std::ostream& out, const std::string& id, std::span<const TraceStep> trace);

}  // namespace ccai
