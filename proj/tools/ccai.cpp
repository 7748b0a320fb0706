// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

// ccai: command-line driver for the CCA captioning pipeline.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccai/caption.hpp"
#include "ccai/cca.hpp"
#include "ccai/decoder.hpp"
#include "ccai/error.hpp"
#include "ccai/eval.hpp"
#include "ccai/ingest.hpp"
#include "ccai/phrase_table.hpp"
#include "ccai/rng.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace ccai;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class Log {
 public:
  void info(const std::string& msg) { line("", msg); }
  void warn(const std::string& msg) { line("warning: ", msg); }
  void error(const std::string& msg) { line("error: ", msg); }
  bool quiet = false;

 private:
  void line(const char* level, const std::string& msg) {
    if (quiet && level[0] == '\0') return;
    const std::string text = std::string("ccai: ") + level + msg + "\n";
    std::lock_guard lock(mutex_);
    std::cerr << text << std::flush;
  }
  std::mutex mutex_;
};

Log g_log;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return "fnv1a64:" + hex64(fnv1a64(bytes));
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("cannot open " + path + ": no such file");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

struct RunMeta {
  json doc = json::object();

  RunMeta(const std::string& command) {
    doc["command"] = command;
    doc["rng"] = Rng::kName;
    doc["config"] = json::object();
    doc["inputs"] = json::object();
    doc["outputs"] = json::object();
  }
  void input(const std::string& role, const std::string& path) {
    if (path.empty()) return;
    doc["inputs"][role] = {{"path", path}, {"checksum", file_checksum(path)}};
  }
  void output(const std::string& role, const std::string& path) {
    if (path.empty()) return;
    doc["outputs"][role] = {{"path", path}, {"checksum", file_checksum(path)}};
  }
  void write(const std::string& path) const {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path);
  }
};

std::string meta_path(const std::string& explicit_path, const std::string& out) {
  return explicit_path.empty() ? out + ".meta.json" : explicit_path;
}

void report_warnings(const Warnings& w) {
  for (const auto& m : w.messages) g_log.warn(m);
}

// ---- shared option groups ----

struct DecodeFlags {
  DecoderConfig config;
  std::string init = "training";
  bool eta_outside_temperature = false;

  void add(CLI::App& app) {
    app.add_option("--eta", config.eta, "length bonus")->capture_default_str();
    app.add_option("--start-temp", config.start_temp, "initial temperature T")->capture_default_str();
    app.add_option("--tau", config.tau, "cooling factor")->capture_default_str();
    app.add_option("--min-temp", config.min_temp, "stopping temperature")->capture_default_str();
    app.add_option("--seed", config.seed, "random seed")->capture_default_str();
    app.add_option("--max-len", config.max_len, "maximum caption length in words")->capture_default_str();
    app.add_option("--reverse-epsilon", config.reverse_epsilon, "floor for the reverse proposal probability")
        ->capture_default_str();
    app.add_flag("--eta-outside-temperature", eta_outside_temperature,
                 "apply 1/t to the cosine term only");
    app.add_option("--init", init, "initial caption: training or greedy")
        ->check(CLI::IsMember({"training", "greedy"}))
        ->capture_default_str();
  }

  DecoderConfig resolved() const {
    DecoderConfig c = config;
    c.eta_inside_temperature = !eta_outside_temperature;
    c.init = init == "greedy" ? InitMode::kGreedyChain : InitMode::kTrainingCaption;
    c.validate();
    return c;
  }

  static json to_json(const DecoderConfig& c) {
    return {{"eta", c.eta},
            {"start_temp", c.start_temp},
            {"tau", c.tau},
            {"min_temp", c.min_temp},
            {"seed", c.seed},
            {"max_len", c.max_len},
            {"reverse_epsilon", c.reverse_epsilon},
            {"eta_inside_temperature", c.eta_inside_temperature},
            {"init", c.init == InitMode::kGreedyChain ? "greedy" : "training"},
            {"iterations", schedule_length(c)}};
  }
};

std::vector<std::string> scene_ids(const std::optional<SplitManifest>& manifest, const std::string& split) {
  if (!manifest) return {};
  return manifest->split(split);
}

// ---- build-q ----

struct BuildQArgs {
  std::string captions, inventory, inventory_out, manifest, split = "train", out, meta;
  std::size_t max_phrase_len = 5;
  bool strict = false;
};

int cmd_build_q(const BuildQArgs& a) {
  RunMeta meta("build-q");
  meta.doc["config"] = {{"captions", a.captions},         {"inventory", a.inventory},
                        {"max_phrase_len", a.max_phrase_len}, {"manifest", a.manifest},
                        {"split", a.split},               {"strict", a.strict}};
  Warnings w{a.strict, {}};
  require_file(a.captions);
  auto captions = load_captions(a.captions, w);
  if (!a.manifest.empty()) {
    require_file(a.manifest);
    const auto m = load_manifest(a.manifest, w);
    captions = restrict_to(captions, std::span<const std::string>(m.split(a.split)));
  }
  report_warnings(w);
  const auto corpus = flatten(captions);
  PhraseInventory inventory;
  if (!a.inventory.empty()) {
    require_file(a.inventory);
    inventory = load_phrase_inventory(a.inventory);
  } else {
    inventory = extract_phrases(corpus, a.max_phrase_len);
  }
  const auto q = estimate_context_table(corpus, inventory);
  save_context_table(a.out, q);
  if (!a.inventory_out.empty()) save_phrase_inventory(a.inventory_out, inventory);
  std::cout << "captions\t" << corpus.size() << '\n'
            << "inventory_size\t" << inventory.size() << '\n'
            << "contexts\t" << q.num_contexts() << '\n'
            << "q_domain_size\t" << q.domain_size() << '\n';
  meta.input("captions", a.captions);
  meta.input("inventory", a.inventory);
  meta.input("manifest", a.manifest);
  meta.output("q", a.out);
  meta.output("inventory", a.inventory_out);
  meta.doc["stats"] = {{"captions", corpus.size()}, {"inventory_size", inventory.size()},
                       {"contexts", q.num_contexts()}, {"q_domain_size", q.domain_size()}};
  meta.write(meta_path(a.meta, a.out));
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string features, captions, inventory, manifest, split = "train", out, meta;
  std::size_t dim = 0, m = 0;
  std::uint64_t seed = 0;
  bool strict = false;
};

struct TrainingData {
  std::vector<VecPair> pairs;
  std::size_t scenes = 0;
};

TrainingData load_training(const std::string& features_path, std::size_t dim, const std::string& captions_path,
                           const PhraseInventory& inventory, const std::optional<SplitManifest>& manifest,
                           const std::string& split, Warnings& w) {
  auto features = load_visual_features(features_path, dim, w);
  auto captions = load_captions(captions_path, w);
  if (manifest) {
    const auto& ids = manifest->split(split);
    features = restrict_to(features, std::span<const std::string>(ids));
    captions = restrict_to(captions, std::span<const std::string>(ids));
  }
  TrainingData out;
  out.scenes = features.size();
  out.pairs = build_training_pairs(features, captions, inventory, w);
  return out;
}

std::string sigma_summary(const CcaModel& model) {
  std::ostringstream s;
  s.precision(6);
  const auto n = std::min<Eigen::Index>(model.sigma().size(), 10);
  for (Eigen::Index k = 0; k < n; ++k) s << (k ? " " : "") << model.sigma()(k);
  if (model.sigma().size() > n) s << " ... " << model.sigma()(model.sigma().size() - 1);
  return s.str();
}

int cmd_train(const TrainArgs& a) {
  RunMeta meta("train");
  meta.doc["config"] = {{"features", a.features}, {"dim", a.dim},     {"captions", a.captions},
                        {"inventory", a.inventory}, {"manifest", a.manifest}, {"split", a.split},
                        {"m", a.m},               {"seed", a.seed},   {"strict", a.strict}};
  for (const auto* p : {&a.features, &a.captions, &a.inventory}) require_file(*p);
  Warnings w{a.strict, {}};
  std::optional<SplitManifest> manifest;
  if (!a.manifest.empty()) {
    require_file(a.manifest);
    manifest = load_manifest(a.manifest, w);
  }
  const auto inventory = load_phrase_inventory(a.inventory);
  const auto data = load_training(a.features, a.dim, a.captions, inventory, manifest, a.split, w);
  report_warnings(w);
  g_log.info("training on " + std::to_string(data.pairs.size()) + " pairs from " +
             std::to_string(data.scenes) + " scenes");
  const auto model = train(data.pairs, a.m, a.seed);
  save_model(a.out, model);
  g_log.info("retained input dims " + std::to_string(model.input_index().size()) + "/" +
             std::to_string(model.input_dim()) + ", output dims " + std::to_string(model.output_index().size()) +
             "/" + std::to_string(model.output_dim()));
  g_log.info("sigma: " + sigma_summary(model));
  meta.input("features", a.features);
  meta.input("captions", a.captions);
  meta.input("inventory", a.inventory);
  meta.input("manifest", a.manifest);
  meta.output("model", a.out);
  std::vector<double> sigma(model.sigma().data(), model.sigma().data() + model.sigma().size());
  meta.doc["stats"] = {{"pairs", data.pairs.size()},
                       {"retained_input", model.input_index().size()},
                       {"retained_output", model.output_index().size()},
                       {"sigma", sigma}};
  meta.write(meta_path(a.meta, a.out));
  return kExitOk;
}

// ---- decode ----

struct DecodeArgs {
  std::string model, features, q, inventory, init_captions, manifest, split = "test", init_split = "train";
  std::string out, trace, meta;
  unsigned jobs = 1;
  bool strict = false;
  DecodeFlags flags;
};

std::vector<BatchInput> batch_inputs(const FeatureMap& features, const std::vector<std::string>& ids, bool all) {
  std::vector<BatchInput> out;
  if (all) {
    for (const auto& [id, phi] : features) out.push_back({id, phi});
    return out;
  }
  for (const auto& id : ids) {
    auto it = features.find(id);
    if (it == features.end()) throw InputError("scene " + id + " has no visual features");
    out.push_back({id, it->second});
  }
  return out;
}

int report_batch(const std::vector<BatchResult>& results) {
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++failed;
      g_log.error("scene " + r.id + ": " + r.message);
    } else if (r.warning) {
      g_log.warn("scene " + r.id + ": " + r.message);
    }
  }
  if (failed) g_log.error(std::to_string(failed) + " of " + std::to_string(results.size()) + " scenes failed");
  return failed ? kExitRuntime : kExitOk;
}

int cmd_decode(const DecodeArgs& a) {
  const auto config = a.flags.resolved();
  RunMeta meta("decode");
  meta.doc["config"] = {{"model", a.model},     {"features", a.features},       {"q", a.q},
                        {"inventory", a.inventory}, {"init_captions", a.init_captions}, {"manifest", a.manifest},
                        {"split", a.split},     {"init_split", a.init_split},   {"jobs", a.jobs},
                        {"strict", a.strict},   {"decoder", DecodeFlags::to_json(config)}};
  for (const auto* p : {&a.model, &a.features, &a.q, &a.inventory}) require_file(*p);
  Warnings w{a.strict, {}};
  const auto model = load_model(a.model);
  const auto q = load_context_table(a.q);
  const auto inventory = load_phrase_inventory(a.inventory);
  if (inventory.size() != model.output_dim()) {
    throw InputError("inventory has " + std::to_string(inventory.size()) + " phrases but the model expects " +
                     std::to_string(model.output_dim()));
  }
  const auto features = load_visual_features(a.features, model.input_dim(), w);
  std::optional<SplitManifest> manifest;
  if (!a.manifest.empty()) {
    require_file(a.manifest);
    manifest = load_manifest(a.manifest, w);
  }
  std::vector<Caption> pool;
  if (config.init == InitMode::kTrainingCaption) {
    if (a.init_captions.empty()) throw ParameterError("--init training requires --init-captions");
    require_file(a.init_captions);
    auto captions = load_captions(a.init_captions, w);
    if (manifest) captions = restrict_to(captions, std::span<const std::string>(manifest->split(a.init_split)));
    pool = flatten(captions);
  }
  report_warnings(w);
  const auto inputs = batch_inputs(features, scene_ids(manifest, a.split), !manifest);
  g_log.info("decoding " + std::to_string(inputs.size()) + " scenes, " + std::to_string(schedule_length(config)) +
             " iterations each");

  DecoderConfig run_config = config;
  run_config.record_trace = !a.trace.empty();
  const auto results = decode_batch(model, inputs, q, inventory, pool, run_config, std::max(1u, a.jobs));
  {
    auto out = open_out(a.out);
    write_decode_results(out, results);
    if (!out) throw IoError("failed writing " + a.out);
  }
  if (!a.trace.empty()) {
    auto out = open_out(a.trace);
    for (const auto& r : results) {
      if (r.ok) write_trace(out, r.id, r.detail.trace);
    }
    if (!out) throw IoError("failed writing " + a.trace);
  }
  const int status = report_batch(results);
  meta.input("model", a.model);
  meta.input("features", a.features);
  meta.input("q", a.q);
  meta.input("inventory", a.inventory);
  meta.input("init_captions", a.init_captions);
  meta.input("manifest", a.manifest);
  meta.output("captions", a.out);
  meta.output("trace", a.trace);
  meta.doc["stats"] = {{"scenes", results.size()},
                       {"failed", std::count_if(results.begin(), results.end(), [](auto& r) { return !r.ok; })}};
  meta.write(meta_path(a.meta, a.out));
  return status;
}

// ---- eval ----

struct EvalArgs {
  std::string hyps, refs, manifest, split, out, scatter, meta;
  std::optional<std::size_t> self_bleu_batch;
  bool strict = false;
};

int cmd_eval(const EvalArgs& a) {
  RunMeta meta("eval");
  meta.doc["config"] = {{"hyps", a.hyps},         {"refs", a.refs},   {"manifest", a.manifest},
                        {"split", a.split},       {"strict", a.strict},
                        {"self_bleu_batch", a.self_bleu_batch ? json(*a.self_bleu_batch) : json(nullptr)}};
  if (a.hyps.empty() == !a.self_bleu_batch.has_value()) {
    throw ParameterError("give exactly one of --hyps and --self-bleu-batch");
  }
  require_file(a.refs);
  Warnings w{a.strict, {}};
  auto refs = load_captions(a.refs, w);
  if (!a.manifest.empty()) {
    require_file(a.manifest);
    if (a.split.empty()) throw ParameterError("--manifest requires --split");
    refs = restrict_to(refs, std::span<const std::string>(load_manifest(a.manifest, w).split(a.split)));
  }
  report_warnings(w);

  BleuReport report;
  std::optional<std::size_t> unique;
  HypothesisMap hyps;
  if (a.self_bleu_batch) {
    const auto self = reference_self_bleu(refs, *a.self_bleu_batch);
    report = self.report;
    g_log.info("self-BLEU batch " + std::to_string(*a.self_bleu_batch) + ": " +
               std::to_string(self.scenes_used) + " scenes used, " + std::to_string(self.scenes_skipped) +
               " skipped");
    meta.doc["stats"] = {{"scenes_used", self.scenes_used}, {"scenes_skipped", self.scenes_skipped}};
  } else {
    require_file(a.hyps);
    hyps = load_hypotheses(a.hyps);
    report = corpus_bleu(hyps, refs);
    unique = unique_caption_count(hyps);
  }
  write_report_text(std::cout, report, unique);
  if (!a.out.empty()) {
    {
      auto out = open_out(a.out);
      write_report_text(out, report, unique);
    }
    auto kv = open_out(a.out + ".kv");
    write_report_kv(kv, report, unique);
  }
  if (!a.scatter.empty()) {
    if (a.self_bleu_batch) throw ParameterError("--scatter needs --hyps");
    auto out = open_out(a.scatter);
    write_scatter(out, hyps, refs);
  }
  meta.input("hyps", a.hyps);
  meta.input("refs", a.refs);
  meta.input("manifest", a.manifest);
  meta.doc["bleu"] = report.bleu;
  if (unique) meta.doc["unique_captions"] = *unique;
  if (!a.out.empty()) {
    meta.output("report", a.out);
    meta.output("report_kv", a.out + ".kv");
  }
  meta.output("scatter", a.scatter);
  if (!a.out.empty() || !a.meta.empty()) meta.write(meta_path(a.meta, a.out));
  return kExitOk;
}

// ---- sweep ----

struct SweepArgs {
  std::string features, captions, inventory, q, manifest, train_split = "train", dev_split = "dev";
  std::string m_range, out, meta;
  std::size_t dim = 0;
  std::uint64_t train_seed = 0;
  unsigned jobs = 1;
  bool continue_on_error = false, strict = false;
  DecodeFlags flags;
};

struct MRange {
  std::size_t first = 0, last = 0, step = 1;
};

MRange parse_m_range(const std::string& text) {
  MRange r;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> r.first >> c1 >> r.last) || c1 != ':') throw ParameterError("bad --m-range '" + text + "', expected a:b[:step]");
  if (in >> c2) {
    if (c2 != ':' || !(in >> r.step)) throw ParameterError("bad --m-range '" + text + "', expected a:b[:step]");
  }
  std::string rest;
  if (in >> rest) throw ParameterError("bad --m-range '" + text + "'");
  if (r.first < 1 || r.last < r.first || r.step < 1) throw ParameterError("bad --m-range '" + text + "'");
  return r;
}

std::vector<std::size_t> expand(const MRange& r) {
  std::vector<std::size_t> out;
  for (std::size_t m = r.first; m <= r.last; m += r.step) out.push_back(m);
  return out;
}

struct SweepRow {
  std::size_t m = 0;
  bool ok = false;
  double bleu = 0.0;
  std::size_t unique = 0;
  std::string message;
};

int cmd_sweep(const SweepArgs& a) {
  const auto config = a.flags.resolved();
  const auto ms = expand(parse_m_range(a.m_range));
  RunMeta meta("sweep");
  meta.doc["config"] = {{"features", a.features},   {"dim", a.dim},
                        {"captions", a.captions},   {"inventory", a.inventory},
                        {"q", a.q},                 {"manifest", a.manifest},
                        {"train_split", a.train_split}, {"dev_split", a.dev_split},
                        {"m_range", a.m_range},     {"m_values", ms},
                        {"train_seed", a.train_seed}, {"jobs", a.jobs},
                        {"continue_on_error", a.continue_on_error}, {"strict", a.strict},
                        {"decoder", DecodeFlags::to_json(config)}};
  for (const auto* p : {&a.features, &a.captions, &a.inventory, &a.manifest}) require_file(*p);
  Warnings w{a.strict, {}};
  const auto manifest = load_manifest(a.manifest, w);
  const auto inventory = load_phrase_inventory(a.inventory);
  const auto features = load_visual_features(a.features, a.dim, w);
  const auto captions = load_captions(a.captions, w);
  const auto train_ids = manifest.split(a.train_split);
  const auto dev_ids = manifest.split(a.dev_split);
  const auto train_captions = restrict_to(captions, std::span<const std::string>(train_ids));
  const auto pairs = build_training_pairs(restrict_to(features, std::span<const std::string>(train_ids)),
                                          train_captions, inventory, w);
  const auto pool = flatten(train_captions);
  ContextTable q;
  if (!a.q.empty()) {
    require_file(a.q);
    q = load_context_table(a.q);
  } else {
    q = estimate_context_table(pool, inventory);
  }
  const auto dev_refs = restrict_to(captions, std::span<const std::string>(dev_ids));
  const auto inputs = batch_inputs(features, dev_ids, false);
  report_warnings(w);
  g_log.info("sweeping " + std::to_string(ms.size()) + " values of m over " + std::to_string(pairs.size()) +
             " training pairs and " + std::to_string(inputs.size()) + " dev scenes");

  std::vector<SweepRow> rows(ms.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  auto work = [&] {
    for (std::size_t k = next++; k < ms.size() && !abort; k = next++) {
      SweepRow& row = rows[k];
      row.m = ms[k];
      try {
        const auto model = train(pairs, row.m, a.train_seed);
        const auto results = decode_batch(model, inputs, q, inventory, pool, config, 1);
        HypothesisMap hyps;
        for (const auto& r : results) {
          if (!r.ok) throw Error("scene " + r.id + ": " + r.message);
          hyps.emplace(r.id, r.caption);
        }
        row.bleu = corpus_bleu(hyps, dev_refs).bleu;
        row.unique = unique_caption_count(hyps);
        row.ok = true;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", row.bleu);
        g_log.info("m=" + std::to_string(row.m) + " dev BLEU " + buf);
      } catch (const std::exception& e) {
        row.message = e.what();
        g_log.error("m=" + std::to_string(row.m) + ": " + row.message);
        if (!a.continue_on_error) abort = true;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(a.jobs, static_cast<unsigned>(ms.size())));
  std::vector<std::thread> pool_threads;
  for (unsigned t = 1; t < threads; ++t) pool_threads.emplace_back(work);
  work();
  for (auto& t : pool_threads) t.join();

  const SweepRow* best = nullptr;
  std::size_t failed = 0;
  for (const auto& row : rows) {
    if (!row.ok) ++failed;
    else if (!best || row.bleu > best->bleu) best = &row;
  }
  if (abort) {
    const auto it = std::find_if(rows.begin(), rows.end(), [](auto& r) { return !r.message.empty(); });
    throw Error("sweep stopped at m=" + std::to_string(it->m) + ": " + it->message);
  }
  {
    auto out = open_out(a.out);
    out << "m\tbleu\tunique_captions\tstatus\n";
    char buf[32];
    for (const auto& row : rows) {
      if (row.ok) {
        std::snprintf(buf, sizeof buf, "%.17g", row.bleu);
        out << row.m << '\t' << buf << '\t' << row.unique << "\tok\n";
      } else {
        out << row.m << "\tNA\tNA\tfailed: " << row.message << '\n';
      }
    }
    if (!out) throw IoError("failed writing " + a.out);
  }
  json table = json::array();
  for (const auto& row : rows) {
    table.push_back({{"m", row.m}, {"ok", row.ok}, {"bleu", row.ok ? json(row.bleu) : json(nullptr)}});
  }
  meta.doc["rows"] = table;
  meta.doc["best_m"] = best ? json(best->m) : json(nullptr);
  if (best) {
    std::cout << "best_m\t" << best->m << '\n';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", best->bleu);
    std::cout << "best_bleu\t" << buf << '\n';
  }
  meta.input("features", a.features);
  meta.input("captions", a.captions);
  meta.input("inventory", a.inventory);
  meta.input("q", a.q);
  meta.input("manifest", a.manifest);
  meta.output("table", a.out);
  meta.write(meta_path(a.meta, a.out));
  if (!best) throw Error("every value of m failed");
  return failed ? kExitRuntime : kExitOk;
}

// ---- inspect ----

struct InspectArgs {
  std::string model, q, inventory, left, right;
  std::size_t top = 10;
};

int cmd_inspect(const InspectArgs& a) {
  if (a.model.empty() && a.q.empty() && a.inventory.empty()) {
    throw ParameterError("give at least one of --model, --q, --inventory");
  }
  if (!a.model.empty()) {
    require_file(a.model);
    const auto model = load_model(a.model);
    std::cout << "model\t" << a.model << '\n'
              << "m\t" << model.m() << '\n'
              << "input_dim\t" << model.input_dim() << '\t' << "retained\t" << model.input_index().size() << '\n'
              << "output_dim\t" << model.output_dim() << '\t' << "retained\t" << model.output_index().size() << '\n'
              << "sigma\t" << sigma_summary(model) << '\n'
              << "checksum\t" << file_checksum(a.model) << '\n';
  }
  if (!a.inventory.empty()) {
    require_file(a.inventory);
    const auto inventory = load_phrase_inventory(a.inventory);
    std::cout << "inventory_size\t" << inventory.size() << '\n' << "max_phrase_len\t" << inventory.max_len() << '\n';
  }
  if (!a.q.empty()) {
    require_file(a.q);
    const auto q = load_context_table(a.q);
    std::cout << "contexts\t" << q.num_contexts() << '\n' << "q_domain_size\t" << q.domain_size() << '\n';
    if (!a.left.empty() || !a.right.empty()) {
      const auto* dist = q.find(a.left, a.right);
      if (!dist) {
        std::cout << "context (" << a.left << ", " << a.right << ") unseen\n";
      } else {
        std::vector<const PhraseCount*> entries;
        for (const auto& e : dist->entries) entries.push_back(&e);
        std::stable_sort(entries.begin(), entries.end(), [](auto* x, auto* y) { return x->count > y->count; });
        char buf[32];
        for (std::size_t k = 0; k < std::min(a.top, entries.size()); ++k) {
          std::snprintf(buf, sizeof buf, "%.3f", entries[k]->prob);
          std::cout << "Q(" << entries[k]->phrase.text() << " | " << a.left << ", " << a.right << ")\t" << buf
                    << '\t' << entries[k]->count << '\n';
        }
      }
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical correlation inference for image captioning"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_log.quiet, "suppress informational log lines");

  BuildQArgs bq;
  auto* build_q = app.add_subcommand("build-q", "estimate the context phrase table Q from captions");
  build_q->add_option("--captions", bq.captions, "captions file (id<TAB>caption)")->required();
  build_q->add_option("--inventory", bq.inventory, "phrase inventory (one phrase per line)");
  build_q->add_option("--max-phrase-len", bq.max_phrase_len, "n-gram length when extracting phrases")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  build_q->add_option("--inventory-out", bq.inventory_out, "write the phrase inventory used");
  build_q->add_option("--manifest", bq.manifest, "split manifest (id<TAB>split)");
  build_q->add_option("--split", bq.split, "split to estimate from")->capture_default_str();
  build_q->add_option("--out", bq.out, "output table")->required();
  build_q->add_option("--metadata", bq.meta, "run metadata path (default <out>.meta.json)");
  build_q->add_flag("--strict", bq.strict, "treat data warnings as errors");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train the CCA projections");
  train_cmd->add_option("--features", tr.features, "visual features file")->required();
  train_cmd->add_option("--dim", tr.dim, "visual feature dimension")->required()->check(CLI::PositiveNumber);
  train_cmd->add_option("--captions", tr.captions, "captions file")->required();
  train_cmd->add_option("--inventory", tr.inventory, "phrase inventory")->required();
  train_cmd->add_option("--manifest", tr.manifest, "split manifest");
  train_cmd->add_option("--split", tr.split, "split to train on")->capture_default_str();
  train_cmd->add_option("--m", tr.m, "number of CCA components")->required()->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr.seed, "random seed")->capture_default_str();
  train_cmd->add_option("--out", tr.out, "model file")->required();
  train_cmd->add_option("--metadata", tr.meta, "run metadata path (default <out>.meta.json)");
  train_cmd->add_flag("--strict", tr.strict, "treat data warnings as errors");

  DecodeArgs dc;
  auto* decode_cmd = app.add_subcommand("decode", "caption scenes with the annealed sampler");
  decode_cmd->add_option("--model", dc.model, "model file")->required();
  decode_cmd->add_option("--features", dc.features, "visual features file")->required();
  decode_cmd->add_option("--q", dc.q, "context phrase table")->required();
  decode_cmd->add_option("--inventory", dc.inventory, "phrase inventory")->required();
  decode_cmd->add_option("--init-captions", dc.init_captions, "captions to draw initial states from");
  decode_cmd->add_option("--manifest", dc.manifest, "split manifest; without it every scene is decoded");
  decode_cmd->add_option("--split", dc.split, "split to decode")->capture_default_str();
  decode_cmd->add_option("--init-split", dc.init_split, "split of the initial caption pool")->capture_default_str();
  decode_cmd->add_option("--trace", dc.trace, "write the per-step trace");
  decode_cmd->add_option("--jobs", dc.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  decode_cmd->add_option("--out", dc.out, "output captions (id<TAB>caption<TAB>score)")->required();
  decode_cmd->add_option("--metadata", dc.meta, "run metadata path (default <out>.meta.json)");
  decode_cmd->add_flag("--strict", dc.strict, "treat data warnings as errors");
  dc.flags.add(*decode_cmd);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "BLEU against reference captions");
  eval_cmd->add_option("--hyps", ev.hyps, "decoder output");
  eval_cmd->add_option("--refs", ev.refs, "reference captions")->required();
  eval_cmd->add_option("--manifest", ev.manifest, "split manifest");
  eval_cmd->add_option("--split", ev.split, "restrict references to this split");
  eval_cmd->add_option("--self-bleu-batch", ev.self_bleu_batch, "score reference b against the others");
  eval_cmd->add_option("--out", ev.out, "report file; key=value copy written to <out>.kv");
  eval_cmd->add_option("--scatter", ev.scatter, "per-scene sentence BLEU");
  eval_cmd->add_option("--metadata", ev.meta, "run metadata path (default <out>.meta.json)");
  eval_cmd->add_flag("--strict", ev.strict, "treat data warnings as errors");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "train and decode over a range of m, scoring on dev");
  sweep_cmd->add_option("--features", sw.features, "visual features file")->required();
  sweep_cmd->add_option("--dim", sw.dim, "visual feature dimension")->required()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--captions", sw.captions, "captions file")->required();
  sweep_cmd->add_option("--inventory", sw.inventory, "phrase inventory")->required();
  sweep_cmd->add_option("--q", sw.q, "context phrase table (default: estimated from the training split)");
  sweep_cmd->add_option("--manifest", sw.manifest, "split manifest")->required();
  sweep_cmd->add_option("--train-split", sw.train_split, "training split")->capture_default_str();
  sweep_cmd->add_option("--dev-split", sw.dev_split, "tuning split")->capture_default_str();
  sweep_cmd->add_option("--m-range", sw.m_range, "first:last[:step]")->required();
  sweep_cmd->add_option("--train-seed", sw.train_seed, "seed for training")->capture_default_str();
  sweep_cmd->add_option("--jobs", sw.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--continue-on-error", sw.continue_on_error, "keep going when one m fails");
  sweep_cmd->add_option("--out", sw.out, "output table (m<TAB>bleu)")->required();
  sweep_cmd->add_option("--metadata", sw.meta, "run metadata path (default <out>.meta.json)");
  sweep_cmd->add_flag("--strict", sw.strict, "treat data warnings as errors");
  sw.flags.add(*sweep_cmd);

  InspectArgs in;
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a model, table or inventory");
  inspect_cmd->add_option("--model", in.model, "model file");
  inspect_cmd->add_option("--q", in.q, "context phrase table");
  inspect_cmd->add_option("--inventory", in.inventory, "phrase inventory");
  inspect_cmd->add_option("--left", in.left, "left context word");
  inspect_cmd->add_option("--right", in.right, "right context word");
  inspect_cmd->add_option("--top", in.top, "phrases to list for a context")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build_q) return cmd_build_q(bq);
    if (*train_cmd) return cmd_train(tr);
    if (*decode_cmd) return cmd_decode(dc);
    if (*eval_cmd) return cmd_eval(ev);
    if (*sweep_cmd) return cmd_sweep(sw);
    if (*inspect_cmd) return cmd_inspect(in);
  } catch (const IoError& e) {
    g_log.error(e.what());
    return kExitUsage;
  } catch (const InputError& e) {
    g_log.error(e.what());
    return kExitUsage;
  } catch (const ParameterError& e) {
    g_log.error(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    g_log.error(e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
