#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgpr/augment.hpp"
#include "kgpr/binary_io.hpp"
#include "kgpr/encoder.hpp"
#include "kgpr/error.hpp"
#include "kgpr/eval.hpp"
#include "kgpr/hash.hpp"
#include "kgpr/llm.hpp"
#include "kgpr/objective.hpp"
#include "kgpr/optim.hpp"
#include "kgpr/train.hpp"

namespace kgpr {

struct SynthGraphConfig {
  std::size_t entities = 200;
  std::size_t relations = 20;
  std::size_t triplets = 1000;
};

struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::Template;
  LlmConfig llm;
};

struct EvalConfig {
  std::vector<std::size_t> k_list = kDefaultKList;
  double holdout_fraction = 0.2;
};

/// Every tunable of a run in one document. Unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  SynthGraphConfig synth;
  DatasetConfig dataset;
  GeneratorConfig generator;
  EncoderConfig encoder;
  MarginConfig margins;
  AdamWConfig optimizer;
  TrainConfig train;
  EvalConfig eval;

  void validate() const {
    dataset.validate();
    encoder.validate();
    margins.validate();
    optimizer.validate();
    train.validate();
    detail::check_k_list(eval.k_list);
    if (!(eval.holdout_fraction > 0.0 && eval.holdout_fraction < 1.0)) {
      throw Error(ErrorKind::Config, "holdout_fraction must lie in (0, 1)");
    }
    if (jobs < 1) throw Error(ErrorKind::Config, "jobs must be >= 1");
    if (generator.kind == GeneratorKind::ExternalLlm) generator.llm.validate();
  }
};

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["synth"] = {{"entities", c.synth.entities},
                {"relations", c.synth.relations},
                {"triplets", c.synth.triplets}};
  nlohmann::ordered_json slots = nlohmann::ordered_json::array();
  for (auto s : c.dataset.mask_slots) slots.push_back(to_string(s));
  j["dataset"] = {{"neighbors", c.dataset.neighbors_per_question},
                  {"negatives", c.dataset.negatives_per_question},
                  {"mask_slots", slots},
                  {"cap", c.dataset.triplet_cap ? nlohmann::ordered_json(*c.dataset.triplet_cap)
                                                : nlohmann::ordered_json(nullptr)}};
  j["generator"] = {{"kind", to_string(c.generator.kind)},
                    {"base_url", c.generator.llm.base_url},
                    {"path", c.generator.llm.path},
                    {"model", c.generator.llm.model},
                    {"system_prompt", c.generator.llm.system_prompt},
                    {"max_in_flight", c.generator.llm.max_in_flight},
                    {"timeout_seconds", c.generator.llm.timeout_seconds},
                    {"fallback_to_template", c.generator.llm.fallback_to_template}};
  j["encoder"] = {{"dim", c.encoder.dim},
                  {"buckets", c.encoder.buckets},
                  {"init_scale", c.encoder.init_scale}};
  j["margins"] = {{"gamma1", c.margins.gamma1}, {"gamma2", c.margins.gamma2}};
  j["optimizer"] = {{"lr", c.optimizer.lr},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"sparse", c.optimizer.sparse}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"checkpoint_every", c.train.checkpoint_every}};
  j["eval"] = {{"k_list", c.eval.k_list}, {"holdout_fraction", c.eval.holdout_fraction}};
  return j;
}

/// FNV-1a of the canonical JSON rendering.
inline std::uint64_t config_hash(const RunConfig& c) { return fnv1a64(to_json(c).dump()); }

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::string_view section,
                           std::initializer_list<std::string_view> known) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "config section \"" + std::string(section) + "\" must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) {
      throw Error(ErrorKind::Config, "unknown config key \"" +
                                         (section.empty() ? key : std::string(section) + "." + key) + "\"");
    }
  }
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out, std::string_view section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Config, "config key \"" + std::string(section) + "." + key + "\" has the wrong type");
  }
}

}  // namespace detail

/// Overlays the keys present in `j` onto `base`.
inline RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  using detail::read_key;
  using detail::reject_unknown;
  reject_unknown(j, "", {"seed", "jobs", "synth", "dataset", "generator", "encoder", "margins",
                         "optimizer", "train", "eval"});
  RunConfig c = std::move(base);
  read_key(j, "seed", c.seed, "");
  read_key(j, "jobs", c.jobs, "");
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    reject_unknown(s, "synth", {"entities", "relations", "triplets"});
    read_key(s, "entities", c.synth.entities, "synth");
    read_key(s, "relations", c.synth.relations, "synth");
    read_key(s, "triplets", c.synth.triplets, "synth");
  }
  if (j.contains("dataset")) {
    const auto& s = j["dataset"];
    reject_unknown(s, "dataset", {"neighbors", "negatives", "mask_slots", "cap"});
    read_key(s, "neighbors", c.dataset.neighbors_per_question, "dataset");
    read_key(s, "negatives", c.dataset.negatives_per_question, "dataset");
    if (s.contains("mask_slots")) {
      std::vector<std::string> names;
      read_key(s, "mask_slots", names, "dataset");
      c.dataset.mask_slots.clear();
      for (const auto& n : names) {
        const auto slot = parse_mask_slot(n);
        if (!slot) throw Error(ErrorKind::Config, "unknown mask slot \"" + n + "\"");
        c.dataset.mask_slots.push_back(*slot);
      }
    }
    if (s.contains("cap")) {
      if (s["cap"].is_null()) {
        c.dataset.triplet_cap.reset();
      } else {
        std::size_t cap = 0;
        read_key(s, "cap", cap, "dataset");
        c.dataset.triplet_cap = cap;
      }
    }
  }
  if (j.contains("generator")) {
    const auto& s = j["generator"];
    reject_unknown(s, "generator", {"kind", "base_url", "path", "model", "system_prompt",
                                    "max_in_flight", "timeout_seconds", "fallback_to_template"});
    if (s.contains("kind")) {
      std::string kind;
      read_key(s, "kind", kind, "generator");
      const auto parsed = parse_generator_kind(kind);
      if (!parsed) throw Error(ErrorKind::Config, "unknown generator kind \"" + kind + "\"");
      c.generator.kind = *parsed;
    }
    read_key(s, "base_url", c.generator.llm.base_url, "generator");
    read_key(s, "path", c.generator.llm.path, "generator");
    read_key(s, "model", c.generator.llm.model, "generator");
    read_key(s, "system_prompt", c.generator.llm.system_prompt, "generator");
    read_key(s, "max_in_flight", c.generator.llm.max_in_flight, "generator");
    read_key(s, "timeout_seconds", c.generator.llm.timeout_seconds, "generator");
    read_key(s, "fallback_to_template", c.generator.llm.fallback_to_template, "generator");
  }
  if (j.contains("encoder")) {
    const auto& s = j["encoder"];
    reject_unknown(s, "encoder", {"dim", "buckets", "init_scale"});
    read_key(s, "dim", c.encoder.dim, "encoder");
    read_key(s, "buckets", c.encoder.buckets, "encoder");
    read_key(s, "init_scale", c.encoder.init_scale, "encoder");
  }
  if (j.contains("margins")) {
    const auto& s = j["margins"];
    reject_unknown(s, "margins", {"gamma1", "gamma2"});
    read_key(s, "gamma1", c.margins.gamma1, "margins");
    read_key(s, "gamma2", c.margins.gamma2, "margins");
  }
  if (j.contains("optimizer")) {
    const auto& s = j["optimizer"];
    reject_unknown(s, "optimizer", {"lr", "beta1", "beta2", "epsilon", "weight_decay", "sparse"});
    read_key(s, "lr", c.optimizer.lr, "optimizer");
    read_key(s, "beta1", c.optimizer.beta1, "optimizer");
    read_key(s, "beta2", c.optimizer.beta2, "optimizer");
    read_key(s, "epsilon", c.optimizer.epsilon, "optimizer");
    read_key(s, "weight_decay", c.optimizer.weight_decay, "optimizer");
    read_key(s, "sparse", c.optimizer.sparse, "optimizer");
  }
  if (j.contains("train")) {
    const auto& s = j["train"];
    reject_unknown(s, "train", {"epochs", "batch_size", "checkpoint_every"});
    read_key(s, "epochs", c.train.epochs, "train");
    read_key(s, "batch_size", c.train.batch_size, "train");
    read_key(s, "checkpoint_every", c.train.checkpoint_every, "train");
  }
  if (j.contains("eval")) {
    const auto& s = j["eval"];
    reject_unknown(s, "eval", {"k_list", "holdout_fraction"});
    read_key(s, "k_list", c.eval.k_list, "eval");
    read_key(s, "holdout_fraction", c.eval.holdout_fraction, "eval");
  }
  c.train.seed = c.seed;
  c.train.jobs = c.jobs;
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::Config, path.string() + ": invalid JSON");
  return config_from_json(j);
}

}  // namespace kgpr
