// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include "ccai/phrase_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "ccai/error.hpp"

namespace ccai {

PhraseInventory::PhraseInventory(std::vector<Phrase> phrases) {
  for (const auto& p : phrases) {
    if (p.tokens.empty()) throw InputError("empty phrase in inventory");
    for (const auto& t : p.tokens) {
      if (t == kBegin || t == kEnd) throw InputError("boundary marker inside phrase '" + p.text() + "'");
    }
  }
  std::sort(phrases.begin(), phrases.end());
  phrases.erase(std::unique(phrases.begin(), phrases.end()), phrases.end());
  phrases_ = std::move(phrases);
  index_.reserve(phrases_.size());
  for (std::size_t i = 0; i < phrases_.size(); ++i) {
    index_.emplace(phrases_[i].text(), i);
    max_len_ = std::max(max_len_, phrases_[i].size());
  }
}

std::optional<std::size_t> PhraseInventory::index_of(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PhraseInventory load_phrase_inventory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Phrase> phrases;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    Phrase p = Phrase::parse(line);
    if (p.tokens.empty()) throw InputError(at_line(path, line_no) + "empty phrase line");
    phrases.push_back(std::move(p));
  }
  if (phrases.empty()) throw InputError(path + ": phrase inventory is empty");
  return PhraseInventory(std::move(phrases));
}

void save_phrase_inventory(const std::string& path, const PhraseInventory& inventory) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& p : inventory.phrases()) out << p.text() << '\n';
  if (!out) throw IoError("failed writing " + path);
}

PhraseInventory extract_phrases(std::span<const Caption> corpus, std::size_t max_len) {
  if (max_len < 1) throw ParameterError("max phrase length must be at least 1");
  std::set<Phrase> found;
  for (const auto& c : corpus) {
    const auto& tok = c.tokens;
    for (std::size_t a = 0; a < tok.size(); ++a) {
      for (std::size_t len = 1; len <= max_len && a + len <= tok.size(); ++len) {
        found.insert(Phrase{{tok.begin() + a, tok.begin() + a + len}});
      }
    }
  }
  return PhraseInventory({found.begin(), found.end()});
}

ContextTable ContextTable::from_counts(
    std::map<ContextKey, std::map<Phrase, std::uint64_t>> counts) {
  ContextTable table;
  for (auto& [key, phrases] : counts) {
    ContextDistribution dist;
    for (const auto& [phrase, count] : phrases) {
      if (count > 0) dist.total += count;
    }
    if (dist.total == 0) continue;
    for (auto& [phrase, count] : phrases) {
      if (count == 0) continue;
      dist.by_text.emplace(phrase.text(), dist.entries.size());
      dist.entries.push_back(
          {phrase, count, static_cast<double>(count) / static_cast<double>(dist.total)});
    }
    table.domain_size_ += dist.entries.size();
    table.contexts_.emplace(key, std::move(dist));
  }
  return table;
}

const ContextDistribution* ContextTable::find(std::string_view left, std::string_view right) const {
  auto it = contexts_.find(ContextKey{std::string(left), std::string(right)});
  return it == contexts_.end() ? nullptr : &it->second;
}

ContextTable estimate_context_table(std::span<const Caption> corpus,
                                    const PhraseInventory& inventory) {
  if (corpus.empty()) throw InputError("cannot estimate a context table from an empty corpus");
  std::map<ContextKey, std::map<Phrase, std::uint64_t>> counts;
  for (const auto& c : corpus) {
    const auto& tok = c.tokens;
    const std::size_t n = tok.size();
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t len = 1; len <= inventory.max_len() && a + len <= n; ++len) {
        const auto idx = inventory.index_of(join(tok, a, a + len));
        if (!idx) continue;
        ContextKey key{a == 0 ? std::string(kBegin) : tok[a - 1],
                       a + len == n ? std::string(kEnd) : tok[a + len]};
        ++counts[std::move(key)][inventory.phrases()[*idx]];
      }
    }
  }
  return ContextTable::from_counts(std::move(counts));
}

const Phrase* sample_phrase(const ContextTable& q, std::string_view left, std::string_view right,
                            Rng& rng) {
  const ContextDistribution* dist = q.find(left, right);
  if (dist == nullptr || dist->total == 0) return nullptr;
  std::uint64_t r = rng.below(dist->total);
  for (const auto& e : dist->entries) {
    if (r < e.count) return &e.phrase;
    r -= e.count;
  }
  return &dist->entries.back().phrase;
}

double context_prob(const ContextTable& q, std::string_view left, std::string_view right,
                    std::span<const std::string> segment) {
  const ContextDistribution* dist = q.find(left, right);
  if (dist == nullptr || segment.empty()) return 0.0;
  std::string text;
  for (std::size_t i = 0; i < segment.size(); ++i) {
    if (i > 0) text.push_back(' ');
    text += segment[i];
  }
  auto it = dist->by_text.find(text);
  return it == dist->by_text.end() ? 0.0 : dist->entries[it->second].prob;
}

void write_context_table(std::ostream& out, const ContextTable& q) {
  char buf[64];
  for (const auto& [key, dist] : q.contexts()) {
    for (const auto& e : dist.entries) {
      std::snprintf(buf, sizeof buf, "%.17g", e.prob);
      out << key.first << '\t' << e.phrase.text() << '\t' << key.second << '\t' << e.count << '\t'
          << buf << '\n';
    }
  }
}

void save_context_table(const std::string& path, const ContextTable& q) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_context_table(out, q);
  if (!out) throw IoError("failed writing " + path);
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

ContextTable read_context_table(std::istream& in, const std::string& name) {
  std::map<ContextKey, std::map<Phrase, std::uint64_t>> counts;
  std::map<ContextKey, std::map<Phrase, double>> stored;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 5) throw InputError(at_line(name, line_no) + "expected 5 tab-separated fields");
    Phrase phrase = Phrase::parse(f[1]);
    if (phrase.tokens.empty() || f[0].empty() || f[2].empty()) {
      throw InputError(at_line(name, line_no) + "empty context or phrase");
    }
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), count);
    if (ec != std::errc{} || ptr != f[3].data() + f[3].size() || count == 0) {
      throw InputError(at_line(name, line_no) + "bad count '" + std::string(f[3]) + "'");
    }
    double prob = 0.0;
    try {
      std::size_t used = 0;
      prob = std::stod(std::string(f[4]), &used);
      if (used != f[4].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InputError(at_line(name, line_no) + "bad probability '" + std::string(f[4]) + "'");
    }
    ContextKey key{std::string(f[0]), std::string(f[2])};
    auto& slot = counts[key][phrase];
    if (slot != 0) throw InputError(at_line(name, line_no) + "duplicate entry");
    slot = count;
    stored[key][phrase] = prob;
  }

  ContextTable table = ContextTable::from_counts(counts);
  for (const auto& [key, dist] : table.contexts()) {
    double sum = 0.0;
    for (const auto& e : dist.entries) {
      const double s = stored[key][e.phrase];
      if (std::abs(s - e.prob) > 1e-9) {
        throw InputError(name + ": probability of '" + e.phrase.text() + "' in context (" +
                         key.first + ", " + key.second + ") does not match its count ratio");
      }
      sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InputError(name + ": context (" + key.first + ", " + key.second +
                       ") is not normalized");
    }
  }
  return table;
}

ContextTable load_context_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_context_table(in, path);
}

}  // namespace ccai
