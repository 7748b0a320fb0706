// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"

#include "ccai/decoder.hpp"
#include "ccai/error.hpp"
#include "oracles.hpp"
#include "toy_world.hpp"

using namespace ccai;

namespace {

const toy::World& so_world() {
  static const toy::World w = toy::subject_object_world();
  return w;
}

SparseVec query(const toy::World& w, std::size_t subject, std::size_t object) {
  return SparseVec::from_entries(w.model.input_dim(), {{subject, 1.0}, {2 + object, 1.0}});
}

ContextTable table_from(std::map<ContextKey, std::map<Phrase, std::uint64_t>> counts) {
  return ContextTable::from_counts(std::move(counts));
}

}  // namespace

TEST_CASE("schedule length") {
  DecoderConfig c;
  c.start_temp = 10000;
  c.tau = 0.995;
  c.min_temp = 0.1;
  const auto closed_form = static_cast<std::size_t>(std::ceil(std::log(10000 / 0.1) / std::log(1 / 0.995)));
  CHECK(closed_form == 2297);
  CHECK(schedule_length(c) == closed_form);
  c.start_temp = 1.0;
  c.tau = 0.5;
  c.min_temp = 0.2;  // 1, 0.5, 0.25 then 0.125 < 0.2
  CHECK(schedule_length(c) == 3);
}

TEST_CASE("config validation") {
  DecoderConfig c;
  CHECK_NOTHROW(c.validate());
  c.tau = 1.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.eta = -0.1;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.min_temp = c.start_temp * 2;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.start_temp = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("score") {
  const auto& w = so_world();
  const LatentVec ux = w.model.project_input(query(w, 0, 0));
  const Caption y = Caption::parse("jenny holds owl");
  const double rho = cosine(ux, w.model.project_output(text_features(y, w.inventory)));
  CHECK(score(ux, w.model, y, w.inventory, 0.0) == rho);
  CHECK(std::abs(score(ux, w.model, y, w.inventory, 0.05) - (rho + 0.15)) <= 1e-12);
  const ScoreParts four{0.3, 4}, six{0.3, 6};
  CHECK(std::abs(six.total(0.05) - four.total(0.05) - 0.10) <= 1e-12);

  // Compositional oracle over every caption of the corpus.
  for (const auto& c : w.pool) {
    const double expected = cosine(w.model.project_input(query(w, 1, 3)),
                                   w.model.project_output(text_features(c, w.inventory))) +
                            0.05 * static_cast<double>(c.size());
    CHECK(std::abs(score(w.model.project_input(query(w, 1, 3)), w.model, c, w.inventory, 0.05) -
                   expected) <= 1e-12);
  }
}

TEST_CASE("propose") {
  DecoderConfig config;
  Rng rng(3);
  SUBCASE("forced outcome") {
    const auto q = table_from({{{std::string(kBegin), std::string(kEnd)}, {{Phrase{{"c"}}, 4}}}});
    const auto p = propose(Caption::parse("a b"), q, rng, config);
    REQUIRE(p.has_value());
    CHECK(p->i == 1);
    CHECK(p->j == 2);
    CHECK(p->new_caption.text() == "c");
    CHECK(p->forward_prob == 1.0);
    CHECK(p->reverse_prob == 0.0);
  }
  SUBCASE("reverse probability of the replaced segment") {
    const auto q = table_from({{{"pizza", "the"}, {{Phrase{{"on"}}, 343}, {Phrase{{"on", "top"}}, 657}}}});
    // Only the pair {2, 3} has the (pizza, the) context in "pizza on top the".
    for (int k = 0; k < 50; ++k) {
      const auto p = propose(Caption::parse("pizza on top the"), q, rng, config);
      if (!p) continue;
      CHECK(p->i == 2);
      CHECK(p->j == 3);
      CHECK(p->reverse_prob == doctest::Approx(0.657));
    }
  }
  SUBCASE("no proposal") {
    const auto q = table_from({{{std::string(kBegin), std::string(kEnd)}, {{Phrase{{"x", "y", "z"}}, 1}}}});
    CHECK_FALSE(propose(Caption::parse("a"), q, rng, config).has_value());
    CHECK_FALSE(propose(Caption::parse("a b"), table_from({}), rng, config).has_value());
    config.max_len = 2;
    CHECK_FALSE(propose(Caption::parse("a b"), q, rng, config).has_value());
    config.max_len = 3;
    CHECK(propose(Caption::parse("a b"), q, rng, config).has_value());
  }
  SUBCASE("reverse epsilon floors the reverse probability") {
    const auto q = table_from({{{std::string(kBegin), std::string(kEnd)}, {{Phrase{{"c"}}, 1}}}});
    config.reverse_epsilon = 1e-3;
    const auto p = propose(Caption::parse("a b"), q, rng, config);
    REQUIRE(p.has_value());
    CHECK(p->reverse_prob == 1e-3);
  }
  SUBCASE("endpoint pairs are uniform") {
    const Caption y = Caption::parse("a b c d e");
    std::map<ContextKey, std::map<Phrase, std::uint64_t>> counts;
    for (std::size_t i = 1; i <= 5; ++i) {
      for (std::size_t j = i + 1; j <= 5; ++j) {
        counts[{i == 1 ? std::string(kBegin) : y.tokens[i - 2], j == 5 ? std::string(kEnd) : y.tokens[j]}]
              [Phrase{{"x"}}] = 1;
      }
    }
    const auto q = table_from(std::move(counts));
    std::map<std::pair<std::size_t, std::size_t>, int> freq;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
      const auto p = propose(y, q, rng, config);
      REQUIRE(p.has_value());
      REQUIRE(p->i < p->j);
      ++freq[{p->i, p->j}];
    }
    REQUIRE(freq.size() == 10);
    double chi2 = 0.0;
    for (const auto& [ij, f] : freq) chi2 += (f - n / 10.0) * (f - n / 10.0) / (n / 10.0);
    CHECK(oracle::chi_square_sf(chi2, 9) > 0.01);
  }
}

TEST_CASE("acceptance ratio") {
  DecoderConfig config;
  config.eta = 0.05;
  Proposal p;
  p.forward_prob = 0.4;
  p.reverse_prob = 0.4;
  CHECK(acceptance_ratio({0.2, 3}, {0.2, 3}, p, 1.0, config) == 1.0);
  const double t = 0.7;
  CHECK(acceptance_ratio({0.5, 3}, {0.5 - t * std::log(2.0), 3}, p, t, config) == doctest::Approx(0.5).epsilon(1e-12));
  p.reverse_prob = 0.0;
  CHECK(acceptance_ratio({0.0, 3}, {1.0, 3}, p, t, config) == 0.0);
  CHECK_THROWS_AS(acceptance_ratio({0.0, 3}, {1.0, 3}, p, 0.0, config), ParameterError);

  Rng rng(19);
  for (int k = 0; k < 500; ++k) {
    const ScoreParts old_parts{2 * rng.uniform() - 1, 1 + rng.below(8)};
    const ScoreParts new_parts{2 * rng.uniform() - 1, 1 + rng.below(8)};
    p.forward_prob = 0.01 + rng.uniform();
    p.reverse_prob = 0.01 + rng.uniform();
    const double temp = 0.05 + 5 * rng.uniform();
    const double on = static_cast<double>(old_parts.length), nn = static_cast<double>(new_parts.length);
    const double a1 = (nn * nn * p.reverse_prob) / (on * on * p.forward_prob);

    config.eta_inside_temperature = true;
    const double a0 = std::exp((new_parts.cosine + config.eta * nn) / temp) /
                      std::exp((old_parts.cosine + config.eta * on) / temp);
    const double got = acceptance_ratio(old_parts, new_parts, p, temp, config);
    CHECK(std::abs(got - std::min(1.0, a0 * a1)) <= 1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);

    config.eta_inside_temperature = false;
    const double a0_literal = std::exp(new_parts.cosine / temp + config.eta * nn) /
                              std::exp(old_parts.cosine / temp + config.eta * on);
    CHECK(std::abs(acceptance_ratio(old_parts, new_parts, p, temp, config) -
                   std::min(1.0, a0_literal * a1)) <= 1e-12);
  }
}

TEST_CASE("decode") {
  const auto& w = so_world();
  DecoderConfig config;
  config.record_trace = true;
  config.seed = 5;
  const auto phi = query(w, 0, 1);
  const Caption init = Caption::parse("mike holds pie");
  const auto result = decode(w.model, phi, w.q, w.inventory, init, config);

  SUBCASE("schedule and trace") {
    CHECK(result.iterations == 2297);
    REQUIRE(result.trace.size() == 2297);
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
      const auto& s = result.trace[k];
      CHECK(s.step == k);
      const double expected = 10000.0 * std::pow(0.995, static_cast<double>(k));
      CHECK(std::abs(s.temperature - expected) <= 1e-9 * expected);
      if (k > 0) CHECK(s.best_score >= result.trace[k - 1].best_score);
    }
    CHECK(result.trace.back().best_score == result.score);
  }
  SUBCASE("best-so-far is exact and never below the init") {
    const double init_score = score(w.model.project_input(phi), w.model, init, w.inventory, config.eta);
    CHECK(result.score >= init_score);
    CHECK(score(w.model.project_input(phi), w.model, result.caption, w.inventory, config.eta) == result.score);
    CHECK(result.caption.text() == "jenny holds owl");
  }
  SUBCASE("starting at the optimum keeps it") {
    const Caption best = Caption::parse("jenny holds owl");
    const auto r = decode(w.model, phi, w.q, w.inventory, best, config);
    CHECK(r.score >= score(w.model.project_input(phi), w.model, best, w.inventory, config.eta));
  }
  SUBCASE("deterministic for a seed") {
    const auto again = decode(w.model, phi, w.q, w.inventory, init, config);
    CHECK(again.caption == result.caption);
    CHECK(again.score == result.score);
    CHECK(again.accepted == result.accepted);
  }
  SUBCASE("no valid proposal returns the init with a flag") {
    const auto r = decode(w.model, phi, w.q, w.inventory, Caption::parse("zebra"), config);
    CHECK(r.no_valid_proposal);
    CHECK(r.caption.text() == "zebra");
  }
}

TEST_CASE("decode finds the exhaustive argmax") {
  const auto& w = so_world();
  const Caption init = Caption::parse("mike holds dog");
  const auto space = toy::enumerate_space(init, w.q, 50, 0.0, 500);
  REQUIRE_FALSE(space.truncated);
  CHECK(space.states.size() == 10);
  DecoderConfig config;
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t o = 0; o < 5; ++o) {
      const auto phi = query(w, s, o);
      const LatentVec ux = w.model.project_input(phi);
      Caption best;
      double best_score = -1e300;
      for (const auto& c : space.candidates) {
        const double sc = score(ux, w.model, c, w.inventory, config.eta);
        if (sc > best_score) {
          best_score = sc;
          best = c;
        }
      }
      int hits = 0;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        config.seed = seed;
        if (decode(w.model, phi, w.q, w.inventory, init, config).caption == best) ++hits;
      }
      CHECK(hits >= 19);
    }
  }
}

TEST_CASE("fixed temperature sampling") {
  SUBCASE("single-caption space keeps the chain constant") {
    const std::vector<Caption> corpus = {Caption::parse("a b")};
    const PhraseInventory inv({Phrase{{"a", "b"}}, Phrase{{"a"}}});
    const auto q = estimate_context_table(corpus, inv);
    const std::vector<VecPair> pairs = {{SparseVec::from_entries(1, {{0, 1.0}}), text_features(corpus[0], inv)}};
    const auto model = train(pairs, 1, 0);
    const auto visited = sample_fixed_temp(model, pairs[0].first, q, inv, corpus[0], 1.0, 200, 3);
    CHECK(visited.size() == 200);
    for (const auto& c : visited) CHECK(c == corpus[0]);
  }
  SUBCASE("stationary distribution matches the normalized target") {
    const auto& w = so_world();
    const auto phi = query(w, 1, 2);
    const LatentVec ux = w.model.project_input(phi);
    const Caption init = Caption::parse("jenny holds ball");
    const auto space = toy::enumerate_space(init, w.q, 50, 0.0, 100);
    REQUIRE(space.states.size() == 10);
    DecoderConfig config;
    std::map<Caption, double> target;
    double z = 0.0;
    for (const auto& c : space.states) {
      target[c] = std::exp(score(ux, w.model, c, w.inventory, config.eta));
      z += target[c];
    }
    for (auto& [c, p] : target) p /= z;

    std::vector<std::vector<Caption>> runs;
    for (std::uint64_t seed : {1u, 2u}) {
      runs.push_back(sample_fixed_temp(w.model, phi, w.q, w.inventory, init, 1.0, 50000, seed, config));
      std::map<Caption, double> freq;
      for (const auto& c : runs.back()) freq[c] += 1.0 / static_cast<double>(runs.back().size());
      double tv = 0.0;
      for (const auto& [c, p] : target) tv += std::abs(p - freq[c]);
      CHECK(0.5 * tv <= 0.05);
    }
    CHECK(runs[0] != runs[1]);
  }
}

TEST_CASE("greedy chain and init choice") {
  const std::vector<Caption> corpus = {Caption::parse("a b c"), Caption::parse("a b c"), Caption::parse("a d")};
  const auto inv = extract_phrases(corpus, 2);
  const auto q = estimate_context_table(corpus, inv);
  const Caption g = greedy_chain(q, 10);
  CHECK(g.size() >= 1);
  CHECK(g.tokens.front() == "a");
  CHECK(greedy_chain(q, 1).size() == 1);

  DecoderConfig config;
  Rng rng(4);
  CHECK(choose_init(corpus, q, config, rng).size() >= 2);
  CHECK_THROWS_AS(choose_init(std::vector<Caption>{}, q, config, rng), InputError);
  config.init = InitMode::kGreedyChain;
  CHECK(choose_init(std::vector<Caption>{}, q, config, rng) == g);
}

TEST_CASE("decode_batch") {
  const auto& w = so_world();
  DecoderConfig config;
  config.seed = 77;
  std::vector<BatchInput> inputs;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t o = 0; o < 5; ++o) inputs.push_back({"q" + std::to_string(s) + std::to_string(o), query(w, s, o)});

  const auto one = decode_batch(w.model, std::span(inputs).first(1), w.q, w.inventory, w.pool, config);
  Rng rng(derive_seed(config.seed, inputs[0].id));
  const Caption init = choose_init(w.pool, w.q, config, rng);
  const auto single = decode(w.model, inputs[0].phi, w.q, w.inventory, init, config, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].ok);
  CHECK(one[0].caption == single.caption);
  CHECK(one[0].score == single.score);

  const auto a = decode_batch(w.model, inputs, w.q, w.inventory, w.pool, config);
  const auto b = decode_batch(w.model, inputs, w.q, w.inventory, w.pool, config, 4);
  auto permuted = inputs;
  std::reverse(permuted.begin(), permuted.end());
  const auto c = decode_batch(w.model, permuted, w.q, w.inventory, w.pool, config, 3);
  std::map<std::string, std::pair<Caption, double>> by_id;
  for (const auto& r : c) by_id[r.id] = {r.caption, r.score};
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].id == inputs[k].id);
    CHECK(a[k].caption == b[k].caption);
    CHECK(a[k].score == b[k].score);
    CHECK(by_id.at(a[k].id).first == a[k].caption);
    CHECK(by_id.at(a[k].id).second == a[k].score);
  }
  std::stringstream fa, fb;
  write_decode_results(fa, a);
  write_decode_results(fb, b);
  CHECK(fa.str() == fb.str());

  SUBCASE("failures are reported per id") {
    auto bad = inputs;
    bad[3].phi = SparseVec(3);
    const auto r = decode_batch(w.model, bad, w.q, w.inventory, w.pool, config, 2);
    CHECK_FALSE(r[3].ok);
    CHECK_FALSE(r[3].message.empty());
    CHECK(r[4].ok);
    CHECK(r[4].caption == a[4].caption);
  }
}

TEST_CASE("length bonus increases output length") {
  const auto& w = toy::variable_length_world();
  const auto phi = SparseVec::from_entries(w.model.input_dim(), {{0, 1.0}, {2, 1.0}});
  std::vector<double> means;
  for (double eta : {0.0, 0.05, 0.2}) {
    DecoderConfig config;
    config.eta = eta;
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      config.seed = seed;
      total += static_cast<double>(decode(w.model, phi, w.q, w.inventory, Caption::parse("mike holds pie"), config).caption.size());
    }
    means.push_back(total / 20.0);
  }
  CHECK(means[0] <= means[1]);
  CHECK(means[1] <= means[2]);
}
