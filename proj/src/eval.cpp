// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include "ccai/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "ccai/error.hpp"

namespace ccai {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts ngrams(const Caption& c, std::size_t n) {
  NgramCounts out;
  if (c.size() < n) return out;
  for (std::size_t a = 0; a + n <= c.size(); ++a) ++out[join(c.tokens, a, a + n)];
  return out;
}

std::size_t closest_length(const std::vector<Caption>& refs, std::size_t hyp_len) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto diff = [&](std::size_t len) {
      return len > hyp_len ? len - hyp_len : hyp_len - len;
    };
    if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) {
      best = r.size();
    }
  }
  return best;
}

}  // namespace

BleuReport corpus_bleu(const HypothesisMap& hyps, const ReferenceSet& refs) {
  std::string missing;
  for (const auto& [id, hyp] : hyps) {
    auto it = refs.find(id);
    if (it == refs.end() || it->second.empty()) missing += (missing.empty() ? "" : ", ") + id;
  }
  if (!missing.empty()) throw InputError("no references for scene(s): " + missing);

  BleuReport r;
  for (const auto& [id, hyp] : hyps) {
    const auto& scene_refs = refs.at(id);
    ++r.sentences;
    r.hyp_length += hyp.size();
    r.ref_length += closest_length(scene_refs, hyp.size());
    for (std::size_t n = 1; n <= kBleuOrder; ++n) {
      const NgramCounts h = ngrams(hyp, n);
      NgramCounts clip;
      for (const auto& ref : scene_refs) {
        for (const auto& [g, c] : ngrams(ref, n)) clip[g] = std::max(clip[g], c);
      }
      for (const auto& [g, c] : h) {
        auto it = clip.find(g);
        if (it != clip.end()) r.matches[n - 1] += std::min(c, it->second);
      }
      r.totals[n - 1] += hyp.size() >= n ? hyp.size() - n + 1 : 0;
    }
  }

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    r.precision[n] = r.totals[n] == 0 ? 0.0
                                      : static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]);
    if (r.matches[n] == 0) {
      zero = true;
    } else {
      log_sum += std::log(r.precision[n]);
    }
  }
  if (r.hyp_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hyp_length >= r.ref_length) {
    r.brevity_penalty = 1.0;
  } else {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
  }
  r.bleu = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / kBleuOrder);
  return r;
}

SelfBleuReport reference_self_bleu(const ReferenceSet& refs, std::size_t batch_index) {
  HypothesisMap hyps;
  ReferenceSet rest;
  SelfBleuReport out;
  for (const auto& [id, list] : refs) {
    if (list.size() <= batch_index || list.size() < 2) {
      ++out.scenes_skipped;
      continue;
    }
    hyps.emplace(id, list[batch_index]);
    auto& others = rest[id];
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (k != batch_index) others.push_back(list[k]);
    }
  }
  out.scenes_used = hyps.size();
  out.report = corpus_bleu(hyps, rest);
  return out;
}

std::size_t unique_caption_count(const HypothesisMap& hyps) {
  std::set<std::vector<std::string>> seen;
  for (const auto& [id, c] : hyps) seen.insert(c.tokens);
  return seen.size();
}

void write_report_text(std::ostream& out, const BleuReport& r,
                       std::optional<std::size_t> unique_captions) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%zu, ref_len=%zu)\n",
                r.bleu, 100 * r.precision[0], 100 * r.precision[1], 100 * r.precision[2],
                100 * r.precision[3], r.brevity_penalty,
                r.ref_length == 0 ? 0.0 : static_cast<double>(r.hyp_length) / static_cast<double>(r.ref_length),
                r.hyp_length, r.ref_length);
  out << buf;
  out << "sentences = " << r.sentences << '\n';
  if (unique_captions) out << "unique captions = " << *unique_captions << '\n';
  out << "METEOR = n/a\n";
}

void write_report_kv(std::ostream& out, const BleuReport& r,
                     std::optional<std::size_t> unique_captions) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "bleu=" << num(r.bleu) << '\n';
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    out << "precision_" << n + 1 << '=' << num(r.precision[n]) << '\n';
    out << "matches_" << n + 1 << '=' << r.matches[n] << '\n';
    out << "totals_" << n + 1 << '=' << r.totals[n] << '\n';
  }
  out << "brevity_penalty=" << num(r.brevity_penalty) << '\n';
  out << "hyp_length=" << r.hyp_length << '\n';
  out << "ref_length=" << r.ref_length << '\n';
  out << "sentences=" << r.sentences << '\n';
  if (unique_captions) out << "unique_captions=" << *unique_captions << '\n';
  out << "meteor=" << (r.meteor ? num(*r.meteor) : std::string("NA")) << '\n';
}

void write_scatter(std::ostream& out, const HypothesisMap& hyps, const ReferenceSet& refs) {
  char buf[64];
  for (const auto& [id, hyp] : hyps) {
    if (!refs.contains(id)) throw InputError("no references for scene: " + id);
    const BleuReport r = corpus_bleu(HypothesisMap{{id, hyp}}, ReferenceSet{{id, refs.at(id)}});
    std::snprintf(buf, sizeof buf, "%.6f", r.bleu);
    out << id << '\t' << buf << '\n';
  }
}

HypothesisMap load_hypotheses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  HypothesisMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw InputError(at_line(path, lineno) + "expected id<TAB>caption");
    const auto rest = line.substr(tab + 1);
    const auto caption = rest.substr(0, rest.find('\t'));
    if (!out.emplace(line.substr(0, tab), Caption::parse(caption)).second) {
      throw InputError(at_line(path, lineno) + "duplicate scene " + line.substr(0, tab));
    }
  }
  return out;
}

}  // namespace ccai
