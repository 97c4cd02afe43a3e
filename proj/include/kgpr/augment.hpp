#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgpr/error.hpp"
#include "kgpr/graph.hpp"
#include "kgpr/rng.hpp"
#include "kgpr/text.hpp"

namespace kgpr {

enum class MaskSlot { Head, Tail };

inline const char* to_string(MaskSlot slot) noexcept {
  return slot == MaskSlot::Head ? "head" : "tail";
}

inline std::optional<MaskSlot> parse_mask_slot(std::string_view s) noexcept {
  if (s == "head") return MaskSlot::Head;
  if (s == "tail") return MaskSlot::Tail;
  return std::nullopt;
}

inline constexpr std::string_view kMaskToken = "[MASK]";

struct MaskedTriplet {
  Triplet source;
  MaskSlot masked_slot = MaskSlot::Tail;

  /// "[MASK] | r | t" or "h | r | [MASK]".
  std::string render() const {
    if (masked_slot == MaskSlot::Head) {
      return std::string(kMaskToken) + " | " + source.relation + " | " + source.tail;
    }
    return source.head + " | " + source.relation + " | " + std::string(kMaskToken);
  }
};

inline MaskedTriplet mask_triplet(const Triplet& t, MaskSlot slot) { return {t, slot}; }

enum class GeneratorKind { Template, ExternalLlm };

inline const char* to_string(GeneratorKind kind) noexcept {
  return kind == GeneratorKind::Template ? "template" : "external-llm";
}

inline std::optional<GeneratorKind> parse_generator_kind(std::string_view s) noexcept {
  if (s == "template") return GeneratorKind::Template;
  if (s == "external-llm" || s == "llm") return GeneratorKind::ExternalLlm;
  return std::nullopt;
}

struct SyntheticQuestion {
  std::string text;
  TripletId source_triplet_id = 0;
  MaskSlot masked_slot = MaskSlot::Tail;
  GeneratorKind generator = GeneratorKind::Template;

  friend bool operator==(const SyntheticQuestion&, const SyntheticQuestion&) = default;
};

/// One (question, exact triplet, neighbor, negative) quadruple.
struct TrainingExample {
  SyntheticQuestion question;
  TripletId positive_id = 0;
  TripletId neighbor_id = 0;
  TripletId negative_id = 0;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// Turns masked triplets into natural-language questions, one per input and
/// in input order. Implementations throw Error(Generator) on failure.
class QuestionGenerator {
 public:
  virtual ~QuestionGenerator() = default;
  virtual GeneratorKind kind() const noexcept = 0;
  virtual std::vector<SyntheticQuestion> generate(std::span<const MaskedTriplet> masked) = 0;
};

/// Deterministic stand-in for an LLM question writer.
class TemplateQuestionGenerator final : public QuestionGenerator {
 public:
  GeneratorKind kind() const noexcept override { return GeneratorKind::Template; }

  static std::string question_text(const MaskedTriplet& m) {
    const auto words = relation_words(m.source.relation);
    if (m.masked_slot == MaskSlot::Tail) {
      return "What is the " + words + " of " + m.source.head + "?";
    }
    return "What has " + words + " " + m.source.tail + "?";
  }

  std::vector<SyntheticQuestion> generate(std::span<const MaskedTriplet> masked) override {
    std::vector<SyntheticQuestion> out;
    out.reserve(masked.size());
    for (const auto& m : masked) {
      out.push_back({question_text(m), m.source.id, m.masked_slot, GeneratorKind::Template});
    }
    return out;
  }
};

inline SyntheticQuestion generate_question(QuestionGenerator& gen, const MaskedTriplet& m) {
  auto out = gen.generate(std::span<const MaskedTriplet>(&m, 1));
  if (out.size() != 1) throw Error(ErrorKind::Generator, "generator returned no question");
  return std::move(out.front());
}

struct DatasetConfig {
  std::size_t neighbors_per_question = 1;
  std::size_t negatives_per_question = 1;
  std::vector<MaskSlot> mask_slots{MaskSlot::Head, MaskSlot::Tail};
  std::optional<std::size_t> triplet_cap;

  void validate() const {
    if (neighbors_per_question < 1 || negatives_per_question < 1) {
      throw Error(ErrorKind::Config, "neighbors and negatives per question must be >= 1");
    }
    if (mask_slots.empty()) throw Error(ErrorKind::Config, "at least one mask slot is required");
  }
};

struct SkipReport {
  std::size_t no_neighbor = 0;  // triplets
  std::size_t no_negative = 0;  // (triplet, slot) questions

  std::size_t total() const noexcept { return no_neighbor + no_negative; }
  friend bool operator==(const SkipReport&, const SkipReport&) = default;
};

struct Dataset {
  std::vector<TrainingExample> examples;
  SkipReport skipped;
};

/// Raised when every triplet was skipped; carries the skip report.
class EmptyDatasetError : public Error {
 public:
  explicit EmptyDatasetError(const SkipReport& skipped)
      : Error(ErrorKind::Empty, "every triplet was skipped (no_neighbor=" +
                                    std::to_string(skipped.no_neighbor) + ", no_negative=" +
                                    std::to_string(skipped.no_negative) + ")"),
        skipped_(skipped) {}

  const SkipReport& skipped() const noexcept { return skipped_; }

 private:
  SkipReport skipped_;
};

/// For each triplet (up to the cap) and mask slot: draw neighbors without
/// replacement from the 1-hop set and negatives by rejection sampling, then
/// ask the generator for one question per surviving (triplet, slot). All RNG
/// draws happen before any generator call, so the sampled structure does not
/// depend on the generator.
inline Dataset build_dataset(const KnowledgeGraph& g, QuestionGenerator& gen,
                             const DatasetConfig& cfg, Rng& rng) {
  cfg.validate();
  if (g.empty()) throw Error(ErrorKind::Empty, "cannot build a dataset from an empty graph");

  struct Plan {
    MaskedTriplet masked;
    std::vector<TripletId> nbs;
    std::vector<TripletId> negs;
  };
  std::vector<Plan> plans;
  SkipReport skipped;

  const std::size_t limit = std::min(g.size(), cfg.triplet_cap.value_or(g.size()));
  for (TripletId id = 0; id < limit; ++id) {
    const Triplet& t = g[id];
    const auto pool = neighbors(g, t);
    if (pool.empty()) {
      ++skipped.no_neighbor;
      continue;
    }
    for (MaskSlot slot : cfg.mask_slots) {
      Plan plan{mask_triplet(t, slot), {}, {}};
      // Partial Fisher-Yates: uniform draws without replacement.
      auto candidates = pool;
      const std::size_t take = std::min(cfg.neighbors_per_question, candidates.size());
      for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + rng.uniform_index(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
        plan.nbs.push_back(candidates[i]);
      }
      for (std::size_t i = 0; i < cfg.negatives_per_question; ++i) {
        if (auto neg = sample_negative(g, t, rng)) plan.negs.push_back(*neg);
      }
      if (plan.negs.empty()) {
        ++skipped.no_negative;
        continue;
      }
      plans.push_back(std::move(plan));
    }
  }

  std::vector<MaskedTriplet> masked;
  masked.reserve(plans.size());
  for (const auto& p : plans) masked.push_back(p.masked);
  if (plans.empty()) throw EmptyDatasetError(skipped);
  const auto questions = gen.generate(masked);
  if (questions.size() != plans.size()) {
    throw Error(ErrorKind::Generator, "generator returned " + std::to_string(questions.size()) +
                                          " questions for " + std::to_string(plans.size()) +
                                          " masked triplets");
  }

  Dataset out;
  out.skipped = skipped;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    for (auto nb : plans[i].nbs) {
      for (auto neg : plans[i].negs) {
        out.examples.push_back({questions[i], plans[i].masked.source.id, nb, neg});
      }
    }
  }
  if (out.examples.empty()) throw EmptyDatasetError(skipped);
  return out;
}

/// Checks ids resolve in `g` and the neighbor/negative overlap rules hold.
inline void validate_examples(const KnowledgeGraph& g, std::span<const TrainingExample> examples) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    const auto where = " (example " + std::to_string(i) + ")";
    if (ex.positive_id >= g.size() || ex.neighbor_id >= g.size() || ex.negative_id >= g.size() ||
        ex.question.source_triplet_id >= g.size()) {
      throw Error(ErrorKind::Mismatch, "triplet id does not resolve in graph" + where);
    }
    const auto& pos = g[ex.positive_id];
    if (ex.neighbor_id == ex.positive_id || !g[ex.neighbor_id].shares_entity(pos)) {
      throw Error(ErrorKind::Mismatch, "neighbor shares no entity with positive" + where);
    }
    if (g[ex.negative_id].shares_entity(pos)) {
      throw Error(ErrorKind::Mismatch, "negative shares an entity with positive" + where);
    }
  }
}

// JSONL ------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const TrainingExample& ex) {
  nlohmann::ordered_json j;
  j["question"] = ex.question.text;
  j["source_triplet_id"] = ex.question.source_triplet_id;
  j["masked_slot"] = to_string(ex.question.masked_slot);
  j["generator"] = to_string(ex.question.generator);
  j["positive_id"] = ex.positive_id;
  j["neighbor_id"] = ex.neighbor_id;
  j["negative_id"] = ex.negative_id;
  return j;
}

inline void write_dataset(std::span<const TrainingExample> examples,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write dataset " + path.string());
  for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

namespace detail {

inline TripletId json_id(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::Schema, "missing field \"" + std::string(key) + "\"" + where);
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > UINT32_MAX) {
    throw Error(ErrorKind::Schema, "field \"" + std::string(key) + "\" must be a non-negative integer" + where);
  }
  return static_cast<TripletId>(v.get<std::uint64_t>());
}

inline std::string json_string(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::Schema, "missing field \"" + std::string(key) + "\"" + where);
  const auto& v = j.at(key);
  if (!v.is_string()) throw Error(ErrorKind::Schema, "field \"" + std::string(key) + "\" must be a string" + where);
  return v.get<std::string>();
}

}  // namespace detail

inline TrainingExample example_from_json(const nlohmann::json& j, const std::string& where = {}) {
  if (!j.is_object()) throw Error(ErrorKind::Schema, "expected a JSON object" + where);
  TrainingExample ex;
  ex.question.text = detail::json_string(j, "question", where);
  if (ex.question.text.empty()) throw Error(ErrorKind::Schema, "empty question" + where);
  ex.question.source_triplet_id = detail::json_id(j, "source_triplet_id", where);
  const auto slot = parse_mask_slot(detail::json_string(j, "masked_slot", where));
  if (!slot) throw Error(ErrorKind::Schema, "masked_slot must be \"head\" or \"tail\"" + where);
  ex.question.masked_slot = *slot;
  const auto gen = parse_generator_kind(detail::json_string(j, "generator", where));
  if (!gen) throw Error(ErrorKind::Schema, "unknown generator" + where);
  ex.question.generator = *gen;
  ex.positive_id = detail::json_id(j, "positive_id", where);
  ex.neighbor_id = detail::json_id(j, "neighbor_id", where);
  ex.negative_id = detail::json_id(j, "negative_id", where);
  return ex;
}

inline std::vector<TrainingExample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open dataset " + path.string());
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto where = " at line " + std::to_string(lineno) + " of " + path.string();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Schema, std::string("invalid JSON") + where + ": " + e.what());
    }
    out.push_back(example_from_json(j, where));
  }
  return out;
}

}  // namespace kgpr
