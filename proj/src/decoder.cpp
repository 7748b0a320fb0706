// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include "ccai/decoder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "ccai/error.hpp"
#include "ccai/ingest.hpp"

namespace ccai {

void DecoderConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be >= 0");
  if (!(start_temp > 0.0) || !std::isfinite(start_temp)) throw ParameterError("start temperature must be > 0");
  if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("tau must lie in (0, 1)");
  if (!(min_temp > 0.0)) throw ParameterError("minimum temperature must be > 0");
  if (!(min_temp < start_temp)) throw ParameterError("minimum temperature must be below the start temperature");
  if (max_len < 1) throw ParameterError("max_len must be at least 1");
  if (!(reverse_epsilon >= 0.0) || !std::isfinite(reverse_epsilon)) {
    throw ParameterError("reverse_epsilon must be >= 0");
  }
}

namespace {

double temperature_at(const DecoderConfig& config, std::size_t step) {
  return config.start_temp * std::pow(config.tau, static_cast<double>(step));
}

}  // namespace

std::size_t schedule_length(const DecoderConfig& config) {
  config.validate();
  std::size_t k = 0;
  while (temperature_at(config, k) >= config.min_temp) ++k;
  return k;
}

ScoreParts CaptionScorer::parts(const Caption& y) const {
  const LatentVec v = model_->project_output(text_features(y, *inventory_));
  return {cosine(input_, v), y.size()};
}

double score(const LatentVec& ux, const CcaModel& model, const Caption& y,
             const PhraseInventory& inventory, double eta) {
  return CaptionScorer(model, inventory, ux).score(y, eta);
}

std::optional<Proposal> propose(const Caption& y, const ContextTable& q, Rng& rng,
                                const DecoderConfig& config) {
  const std::size_t n = y.size();
  if (n < 2) return std::nullopt;

  // Unordered pair {i, j} uniform over the n(n-1)/2 choices.
  std::uint64_t r = rng.below(static_cast<std::uint64_t>(n) * (n - 1) / 2);
  std::size_t i = 1;
  while (r >= n - i) {
    r -= n - i;
    ++i;
  }
  const std::size_t j = i + 1 + static_cast<std::size_t>(r);

  const auto& tok = y.tokens;
  const std::string_view left = i == 1 ? kBegin : std::string_view(tok[i - 2]);
  const std::string_view right = j == n ? kEnd : std::string_view(tok[j]);
  const Phrase* phrase = sample_phrase(q, left, right, rng);
  if (phrase == nullptr) return std::nullopt;

  const std::size_t new_len = n - (j - i + 1) + phrase->size();
  if (new_len > config.max_len) return std::nullopt;

  Proposal p;
  p.i = i;
  p.j = j;
  p.phrase = *phrase;
  p.new_caption.tokens.reserve(new_len);
  p.new_caption.tokens.insert(p.new_caption.tokens.end(), tok.begin(), tok.begin() + (i - 1));
  p.new_caption.tokens.insert(p.new_caption.tokens.end(), phrase->tokens.begin(), phrase->tokens.end());
  p.new_caption.tokens.insert(p.new_caption.tokens.end(), tok.begin() + j, tok.end());
  p.forward_prob = context_prob(q, left, right, phrase->tokens);
  p.reverse_prob = context_prob(q, left, right, std::span(tok).subspan(i - 1, j - i + 1));
  p.reverse_prob = std::max(p.reverse_prob, config.reverse_epsilon);
  return p;
}

double acceptance_ratio(const ScoreParts& old_parts, const ScoreParts& new_parts,
                        const Proposal& proposal, double temperature, const DecoderConfig& config) {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be > 0");
  if (proposal.reverse_prob <= 0.0 || proposal.forward_prob <= 0.0) return 0.0;

  double log_a0;
  if (config.eta_inside_temperature) {
    log_a0 = (new_parts.total(config.eta) - old_parts.total(config.eta)) / temperature;
  } else {
    log_a0 = (new_parts.cosine - old_parts.cosine) / temperature +
             config.eta * (static_cast<double>(new_parts.length) - static_cast<double>(old_parts.length));
  }
  const double new_len = static_cast<double>(new_parts.length);
  const double old_len = static_cast<double>(old_parts.length);
  const double log_a1 = 2.0 * std::log(new_len / old_len) + std::log(proposal.reverse_prob / proposal.forward_prob);
  const double log_alpha = log_a0 + log_a1;
  if (log_alpha >= 0.0) return 1.0;
  return std::exp(log_alpha);
}

DecodeResult decode(const CcaModel& model, const SparseVec& phi, const ContextTable& q,
                    const PhraseInventory& inventory, const Caption& init,
                    const DecoderConfig& config, Rng& rng) {
  config.validate();
  if (init.empty()) throw InputError("decode: empty initial caption");

  const CaptionScorer scorer(model, inventory, model.project_input(phi));
  DecodeResult out;
  Caption current = init;
  ScoreParts current_parts = scorer.parts(current);
  out.caption = init;
  out.score = current_parts.total(config.eta);

  std::size_t step = 0;
  for (double t = config.start_temp; t >= config.min_temp; t = temperature_at(config, ++step)) {
    TraceStep trace{step, t, current_parts.total(config.eta), 0.0, 0.0, false, false};
    if (auto prop = propose(current, q, rng, config)) {
      ++out.proposals;
      const ScoreParts new_parts = scorer.parts(prop->new_caption);
      const double new_score = new_parts.total(config.eta);
      if (new_score >= out.score) {
        out.score = new_score;
        out.caption = prop->new_caption;
      }
      const double alpha = acceptance_ratio(current_parts, new_parts, *prop, t, config);
      trace.proposed = true;
      trace.proposal_score = new_score;
      if (rng.uniform() < alpha) {
        current = std::move(prop->new_caption);
        current_parts = new_parts;
        trace.accepted = true;
        ++out.accepted;
      }
    }
    trace.best_score = out.score;
    if (config.record_trace) out.trace.push_back(trace);
  }
  out.iterations = step;
  out.no_valid_proposal = out.proposals == 0;
  return out;
}

DecodeResult decode(const CcaModel& model, const SparseVec& phi, const ContextTable& q,
                    const PhraseInventory& inventory, const Caption& init,
                    const DecoderConfig& config) {
  Rng rng(config.seed);
  return decode(model, phi, q, inventory, init, config, rng);
}

std::vector<Caption> sample_fixed_temp(const CcaModel& model, const SparseVec& phi,
                                       const ContextTable& q, const PhraseInventory& inventory,
                                       const Caption& init, double temperature, std::size_t steps,
                                       std::uint64_t seed, const DecoderConfig& config) {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be > 0");
  if (init.empty()) throw InputError("sample_fixed_temp: empty initial caption");
  const CaptionScorer scorer(model, inventory, model.project_input(phi));
  Rng rng(seed);
  Caption current = init;
  ScoreParts current_parts = scorer.parts(current);
  std::vector<Caption> visited;
  visited.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    if (auto prop = propose(current, q, rng, config)) {
      const ScoreParts new_parts = scorer.parts(prop->new_caption);
      const double alpha = acceptance_ratio(current_parts, new_parts, *prop, temperature, config);
      if (rng.uniform() < alpha) {
        current = std::move(prop->new_caption);
        current_parts = new_parts;
      }
    }
    visited.push_back(current);
  }
  return visited;
}

Caption greedy_chain(const ContextTable& q, std::size_t max_len) {
  Caption out;
  std::string left(kBegin);
  while (out.size() < max_len) {
    const PhraseCount* best = nullptr;
    const ContextKey* best_key = nullptr;
    const auto& contexts = q.contexts();
    for (auto it = contexts.lower_bound(ContextKey{left, ""});
         it != contexts.end() && it->first.first == left; ++it) {
      for (const auto& e : it->second.entries) {
        if (best == nullptr || e.count > best->count) {
          best = &e;
          best_key = &it->first;
        }
      }
    }
    if (best == nullptr) break;
    const std::size_t room = max_len - out.size();
    const std::size_t take = std::min(room, best->phrase.size());
    out.tokens.insert(out.tokens.end(), best->phrase.tokens.begin(),
                      best->phrase.tokens.begin() + static_cast<std::ptrdiff_t>(take));
    if (best_key->second == kEnd) break;
    left = out.tokens.back();
  }
  return out;
}

Caption choose_init(std::span<const Caption> pool, const ContextTable& q,
                    const DecoderConfig& config, Rng& rng) {
  if (config.init == InitMode::kGreedyChain) {
    Caption c = greedy_chain(q, config.max_len);
    if (c.empty()) throw InputError("context table yields no greedy chain from <begin>");
    return c;
  }
  if (pool.empty()) throw InputError("no training captions to draw an initial caption from");
  return pool[rng.below(pool.size())];
}

std::vector<BatchResult> decode_batch(const CcaModel& model, std::span<const BatchInput> inputs,
                                      const ContextTable& q, const PhraseInventory& inventory,
                                      std::span<const Caption> init_pool,
                                      const DecoderConfig& config, unsigned jobs) {
  config.validate();
  std::vector<BatchResult> results(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < inputs.size(); k = next++) {
      const auto& in = inputs[k];
      BatchResult& res = results[k];
      res.id = in.id;
      try {
        Rng rng(derive_seed(config.seed, in.id));
        const Caption init = choose_init(init_pool, q, config, rng);
        res.detail = decode(model, in.phi, q, inventory, init, config, rng);
        res.caption = res.detail.caption;
        res.score = res.detail.score;
        res.ok = true;
        if (res.detail.no_valid_proposal) {
          res.warning = true;
          res.message = "no valid proposal; returning the initial caption";
        }
      } catch (const std::exception& e) {
        res.ok = false;
        res.message = e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(inputs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

void write_decode_results(std::ostream& out, std::span<const BatchResult> results) {
  char buf[64];
  for (const auto& r : results) {
    if (!r.ok) continue;
    std::snprintf(buf, sizeof buf, "%.17g", r.score);
    out << r.id << '\t' << r.caption.text() << '\t' << buf << '\n';
  }
}

void write_trace(std::ostream& out, const std::string& id, std::span<const TraceStep> trace) {
  char buf[160];
  for (const auto& s : trace) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\t%d", s.step, s.temperature,
                  s.current_score, s.proposed ? s.proposal_score : s.current_score, s.best_score,
                  s.accepted ? 1 : 0);
    out << id << '\t' << buf << '\n';
  }
}

}  // namespace ccai
