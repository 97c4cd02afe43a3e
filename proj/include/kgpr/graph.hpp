#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kgpr/error.hpp"
#include "kgpr/rng.hpp"

namespace kgpr {

using TripletId = std::uint32_t;

struct Triplet {
  TripletId id = 0;
  std::string head;
  std::string relation;
  std::string tail;

  bool shares_entity(const Triplet& other) const noexcept {
    return head == other.head || head == other.tail || tail == other.head ||
           tail == other.tail;
  }

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Immutable triplet store with an entity -> triplet-id index. Entities are
/// compared by exact string equality; relations never count as entities.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Builds a graph from (head, relation, tail) tuples in order. Exact
  /// duplicates are dropped and counted; ids are assigned after dropping.
  static KnowledgeGraph from_tuples(
      const std::vector<std::array<std::string, 3>>& tuples) {
    KnowledgeGraph g;
    std::set<std::array<std::string, 3>> seen;
    for (const auto& tuple : tuples) {
      for (const auto& field : tuple) {
        if (field.empty()) {
          throw Error(ErrorKind::Parse, "triplet field must be non-empty");
        }
      }
      if (!seen.insert(tuple).second) {
        ++g.duplicates_dropped_;
        continue;
      }
      g.push(tuple[0], tuple[1], tuple[2]);
    }
    return g;
  }

  std::span<const Triplet> triplets() const noexcept { return triplets_; }
  std::size_t size() const noexcept { return triplets_.size(); }
  bool empty() const noexcept { return triplets_.empty(); }
  const Triplet& at(TripletId id) const {
    if (id >= triplets_.size()) {
      throw Error(ErrorKind::Mismatch,
                  "triplet id " + std::to_string(id) + " out of range (graph has " +
                      std::to_string(triplets_.size()) + " triplets)");
    }
    return triplets_[id];
  }
  const Triplet& operator[](TripletId id) const noexcept { return triplets_[id]; }

  std::size_t entity_count() const noexcept { return entity_index_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }
  std::size_t duplicates_dropped() const noexcept { return duplicates_dropped_; }

  /// Sorted ids of triplets with `entity` as head or tail; empty if unknown.
  std::span<const TripletId> triplets_with(std::string_view entity) const {
    auto it = entity_index_.find(std::string(entity));
    if (it == entity_index_.end()) return {};
    return it->second;
  }

  bool contains(const Triplet& t) const noexcept {
    return t.id < triplets_.size() && triplets_[t.id] == t;
  }

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.triplets_ == b.triplets_;
  }

 private:
  void push(const std::string& h, const std::string& r, const std::string& t) {
    const auto id = static_cast<TripletId>(triplets_.size());
    triplets_.push_back(Triplet{id, h, r, t});
    entity_index_[h].push_back(id);
    if (t != h) entity_index_[t].push_back(id);
    relations_.insert(r);
  }

  std::vector<Triplet> triplets_;
  std::unordered_map<std::string, std::vector<TripletId>> entity_index_;
  std::unordered_set<std::string> relations_;
  std::size_t duplicates_dropped_ = 0;
};

/// Parses `head<TAB>relation<TAB>tail` lines. Blank lines are skipped and a
/// trailing carriage return is tolerated.
inline KnowledgeGraph parse_graph_tsv(std::istream& in) {
  std::vector<std::array<std::string, 3>> tuples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos
                                                                    : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 ||
        std::any_of(fields.begin(), fields.end(), [](const auto& f) { return f.empty(); })) {
      throw Error(ErrorKind::Parse,
                  "malformed triplet at line " + std::to_string(lineno) +
                      ": expected 3 non-empty tab-separated fields");
    }
    tuples.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  auto g = KnowledgeGraph::from_tuples(tuples);
  if (g.empty()) throw Error(ErrorKind::Empty, "graph contains no triplets");
  return g;
}

inline KnowledgeGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open graph file " + path.string());
  return parse_graph_tsv(in);
}

inline void write_graph(const KnowledgeGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write graph file " + path.string());
  for (const auto& t : g.triplets()) {
    out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

/// Ids of triplets sharing a head or tail entity with `t`, excluding `t`.
/// Result is sorted ascending.
inline std::vector<TripletId> neighbors(const KnowledgeGraph& g, const Triplet& t) {
  if (!g.contains(t)) throw Error(ErrorKind::Mismatch, "triplet does not belong to graph");
  std::vector<TripletId> out;
  const auto a = g.triplets_with(t.head);
  const auto b = g.triplets_with(t.tail);
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  std::erase(out, t.id);
  return out;
}

inline constexpr int kNegativeSampleAttempts = 100;

/// Rejection-samples a triplet sharing no entity with `t`. Returns nullopt
/// once kNegativeSampleAttempts draws have all been rejected.
inline std::optional<TripletId> sample_negative(const KnowledgeGraph& g,
                                                const Triplet& t, Rng& rng) {
  if (!g.contains(t)) throw Error(ErrorKind::Mismatch, "triplet does not belong to graph");
  for (int attempt = 0; attempt < kNegativeSampleAttempts; ++attempt) {
    const auto id = static_cast<TripletId>(rng.uniform_index(g.size()));
    if (!g[id].shares_entity(t)) return id;
  }
  return std::nullopt;
}

/// Uniformly sampled distinct (h, r, t) with h != t over entities "e<i>" and
/// relations "r<j>".
inline KnowledgeGraph generate_synthetic_graph(std::size_t entities,
                                               std::size_t relations,
                                               std::size_t triplets, Rng& rng) {
  if (entities < 1 || relations < 1 || triplets < 1) {
    throw Error(ErrorKind::Infeasible, "synthetic graph counts must be >= 1");
  }
  const std::uint64_t capacity =
      static_cast<std::uint64_t>(entities) * (entities - 1) * relations;
  if (triplets > capacity) {
    throw Error(ErrorKind::Infeasible,
                "cannot place " + std::to_string(triplets) + " distinct triplets: only " +
                    std::to_string(capacity) + " (head, relation, tail) combinations with head != tail");
  }
  // Encode (h, r, t') with t' in [0, entities-1) skipping h.
  auto decode = [&](std::uint64_t code) {
    const std::uint64_t per_head = (entities - 1) * relations;
    const std::uint64_t h = code / per_head;
    const std::uint64_t rest = code % per_head;
    const std::uint64_t r = rest / (entities - 1);
    std::uint64_t t = rest % (entities - 1);
    if (t >= h) ++t;
    return std::array<std::string, 3>{"e" + std::to_string(h), "r" + std::to_string(r),
                                      "e" + std::to_string(t)};
  };

  std::vector<std::uint64_t> codes;
  codes.reserve(triplets);
  if (triplets * 2 > capacity) {
    std::vector<std::uint64_t> all(capacity);
    for (std::uint64_t i = 0; i < capacity; ++i) all[i] = i;
    for (std::size_t i = 0; i < triplets; ++i) {
      const auto j = i + rng.uniform_index(capacity - i);
      std::swap(all[i], all[j]);
      codes.push_back(all[i]);
    }
  } else {
    std::unordered_set<std::uint64_t> used;
    while (codes.size() < triplets) {
      const auto code = rng.uniform_index(capacity);
      if (used.insert(code).second) codes.push_back(code);
    }
  }
  std::vector<std::array<std::string, 3>> tuples;
  tuples.reserve(triplets);
  for (auto code : codes) tuples.push_back(decode(code));
  return KnowledgeGraph::from_tuples(tuples);
}

}  // namespace kgpr
