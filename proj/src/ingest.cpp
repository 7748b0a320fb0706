// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#include "ccai/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "ccai/error.hpp"

namespace ccai {

void Warnings::add(std::string message) {
  if (strict) throw InputError(message);
  messages.push_back(std::move(message));
}

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

SparseEntry parse_feature(std::string_view item, std::size_t dim, const std::string& where) {
  const auto colon = item.find(':');
  if (colon == std::string_view::npos) {
    throw InputError(where + "feature '" + std::string(item) + "' is not idx:val");
  }
  std::size_t index = 0;
  const auto idx = item.substr(0, colon);
  auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), index);
  if (ec != std::errc{} || p != idx.data() + idx.size()) {
    throw InputError(where + "bad feature index '" + std::string(idx) + "'");
  }
  if (index >= dim) {
    throw InputError(where + "feature index " + std::to_string(index) + " >= dim " +
                     std::to_string(dim));
  }
  const std::string val(item.substr(colon + 1));
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(val, &used);
    if (used != val.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InputError(where + "bad feature value '" + val + "'");
  }
  if (!std::isfinite(value)) throw InputError(where + "non-finite feature value");
  return {index, value};
}

}  // namespace

FeatureMap load_visual_features(const std::string& path, std::size_t dim, Warnings& warnings) {
  if (dim == 0) throw ParameterError("feature dimension must be positive");
  auto in = open_in(path);
  FeatureMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::string where = at_line(path, line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw InputError(where + "expected 'scene_id<TAB>features'");
    std::string id = line.substr(0, tab);
    std::vector<SparseEntry> entries;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      const auto next = rest.find_first_of(" \t", pos);
      const auto item = rest.substr(pos, next == std::string_view::npos ? std::string_view::npos
                                                                         : next - pos);
      if (!item.empty()) entries.push_back(parse_feature(item, dim, where));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    SparseVec v;
    try {
      v = SparseVec::from_entries(dim, std::move(entries));
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
    if (v.nnz() == 0) warnings.add(where + "scene '" + id + "' has no active features");
    if (!out.emplace(id, std::move(v)).second) {
      throw InputError(where + "duplicate scene id '" + id + "'");
    }
  }
  return out;
}

CaptionMap load_captions(const std::string& path, Warnings& warnings) {
  auto in = open_in(path);
  CaptionMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::string where = at_line(path, line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw InputError(where + "expected 'scene_id<TAB>caption'");
    Caption c = Caption::parse(std::string_view(line).substr(tab + 1));
    if (c.empty()) throw InputError(where + "empty caption");
    auto& list = out[line.substr(0, tab)];
    list.push_back(std::move(c));
    if (list.size() == kMaxCaptionsPerScene + 1) {
      warnings.add(where + "scene '" + line.substr(0, tab) + "' has more than " +
                   std::to_string(kMaxCaptionsPerScene) + " captions");
    }
  }
  return out;
}

std::size_t count_captions(const CaptionMap& captions) {
  std::size_t n = 0;
  for (const auto& [id, list] : captions) n += list.size();
  return n;
}

const std::vector<std::string>& SplitManifest::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  throw ParameterError("unknown split '" + name + "' (expected train, dev or test)");
}

SplitManifest load_manifest(const std::string& path, Warnings& warnings) {
  auto in = open_in(path);
  SplitManifest out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::string where = at_line(path, line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw InputError(where + "expected 'scene_id<TAB>split'");
    std::string id = line.substr(0, tab);
    const std::string split = line.substr(tab + 1);
    if (!seen.insert(id).second) throw InputError(where + "scene '" + id + "' listed twice");
    if (split == "train") {
      out.train.push_back(std::move(id));
    } else if (split == "dev") {
      out.dev.push_back(std::move(id));
    } else if (split == "test") {
      out.test.push_back(std::move(id));
    } else {
      throw InputError(where + "unknown split '" + split + "'");
    }
  }
  if (out.train.empty()) warnings.add(path + ": manifest has no training scenes");
  return out;
}

void save_visual_features(const std::string& path, const FeatureMap& features) {
  auto out = open_out(path);
  char buf[64];
  for (const auto& [id, v] : features) {
    out << id << '\t';
    bool first = true;
    for (const auto& e : v.entries()) {
      std::snprintf(buf, sizeof buf, "%zu:%.17g", e.index, e.value);
      out << (first ? "" : " ") << buf;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void save_captions(const std::string& path, const CaptionMap& captions) {
  auto out = open_out(path);
  for (const auto& [id, list] : captions) {
    for (const auto& c : list) out << id << '\t' << c.text() << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void save_manifest(const std::string& path, const SplitManifest& manifest) {
  auto out = open_out(path);
  for (const auto& id : manifest.train) out << id << "\ttrain\n";
  for (const auto& id : manifest.dev) out << id << "\tdev\n";
  for (const auto& id : manifest.test) out << id << "\ttest\n";
  if (!out) throw IoError("failed writing " + path);
}

SparseVec text_features(const Caption& y, const PhraseInventory& inventory) {
  std::vector<SparseEntry> entries;
  std::set<std::size_t> fired;
  const auto& tok = y.tokens;
  for (std::size_t a = 0; a < tok.size(); ++a) {
    for (std::size_t len = 1; len <= inventory.max_len() && a + len <= tok.size(); ++len) {
      if (auto idx = inventory.index_of(join(tok, a, a + len))) fired.insert(*idx);
    }
  }
  entries.reserve(fired.size());
  for (auto idx : fired) entries.push_back({idx, 1.0});
  return SparseVec::from_entries(inventory.size(), std::move(entries));
}

std::vector<VecPair> build_training_pairs(const FeatureMap& features, const CaptionMap& captions,
                                          const PhraseInventory& inventory, Warnings& warnings) {
  std::vector<VecPair> pairs;
  for (const auto& [id, list] : captions) {
    auto it = features.find(id);
    if (it == features.end()) {
      warnings.add("captions for unknown scene '" + id + "' skipped (" +
                   std::to_string(list.size()) + ")");
      continue;
    }
    for (const auto& c : list) pairs.emplace_back(it->second, text_features(c, inventory));
  }
  return pairs;
}

std::vector<Caption> flatten(const CaptionMap& captions) {
  std::vector<Caption> out;
  for (const auto& [id, list] : captions) out.insert(out.end(), list.begin(), list.end());
  return out;
}

}  // namespace ccai
