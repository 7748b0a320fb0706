// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

/// @file ingest.hpp
/// Dataset loaders and the text feature map.
///
/// File formats (UTF-8, one record per line):
///   features  "scene_id<TAB>idx:val idx:val ..."   (0-based indices)
///   captions  "scene_id<TAB>caption text"          (one caption per line)
///   manifest  "scene_id<TAB>train|dev|test"
///
/// Loaders collect recoverable problems as warnings; with `strict` set a
/// warning is raised as an InputError instead.

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ccai/caption.hpp"
#include "ccai/phrase_table.hpp"
#include "ccai/sparse.hpp"

namespace ccai {

inline constexpr std::size_t kMaxCaptionsPerScene = 8;

using FeatureMap = std::map<std::string, SparseVec>;
using CaptionMap = std::map<std::string, std::vector<Caption>>;

struct Warnings {
  bool strict = false;
  std::vector<std::string> messages;

  void add(std::string message);
};

FeatureMap load_visual_features(const std::string& path, std::size_t dim, Warnings& warnings);

/// Captions grouped by scene in file order.
CaptionMap load_captions(const std::string& path, Warnings& warnings);

std::size_t count_captions(const CaptionMap& captions);

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;

  /// Ids of the named split ("train", "dev" or "test").
  const std::vector<std::string>& split(const std::string& name) const;
};

SplitManifest load_manifest(const std::string& path, Warnings& warnings);

void save_visual_features(const std::string& path, const FeatureMap& features);
void save_captions(const std::string& path, const CaptionMap& captions);
void save_manifest(const std::string& path, const SplitManifest& manifest);

/// Binary indicator vector over the inventory: 1 at every phrase that occurs
/// as a contiguous token run of `y`.
SparseVec text_features(const Caption& y, const PhraseInventory& inventory);

/// One (phi, psi) pair per (scene, caption), ordered by scene id and then
/// caption order. Captions of scenes without features are skipped with a
/// warning.
std::vector<VecPair> build_training_pairs(const FeatureMap& features, const CaptionMap& captions,
                                          const PhraseInventory& inventory, Warnings& warnings);

/// Entries of `map` whose key is in `ids`.
template <typename Map>
Map restrict_to(const Map& map, std::span<const std::string> ids) {
  Map out;
  for (const auto& id : ids) {
    auto it = map.find(id);
    if (it != map.end()) out.emplace(*it);
  }
  return out;
}

/// All captions of a caption map, flattened in scene order.
std::vector<Caption> flatten(const CaptionMap& captions);

}  // namespace ccai
