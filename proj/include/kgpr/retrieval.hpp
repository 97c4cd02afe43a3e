#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgpr/binary_io.hpp"
#include "kgpr/checkpoint.hpp"
#include "kgpr/encoder.hpp"
#include "kgpr/error.hpp"
#include "kgpr/graph.hpp"
#include "kgpr/hash.hpp"

namespace kgpr {

inline constexpr std::string_view kIndexMagic = "GPRI";

/// Precomputed triplet-tower embeddings of a whole graph, stored in single
/// precision exactly as they are written to disk. Row norms are recomputed
/// from the rows in double precision; rows at or below kDegenerateNorm are
/// never retrieved.
class TripletIndex {
 public:
  TripletIndex() = default;

  static TripletIndex build(const KnowledgeGraph& graph, const Tower& triplet_tower,
                            std::uint64_t checkpoint_fingerprint) {
    if (graph.empty()) throw Error(ErrorKind::Empty, "cannot index an empty graph");
    TripletIndex idx;
    idx.dim_ = triplet_tower.dim();
    idx.fingerprint_ = checkpoint_fingerprint;
    idx.rows_.reserve(graph.size() * idx.dim_);
    for (const auto& t : graph.triplets()) {
      for (double v : encode_triplet(triplet_tower, t)) idx.rows_.push_back(static_cast<float>(v));
    }
    idx.finish();
    return idx;
  }

  static TripletIndex build(const KnowledgeGraph& graph, const Checkpoint& ckpt) {
    return build(graph, ckpt.towers.triplet, ckpt.fingerprint);
  }

  std::size_t size() const noexcept { return norms_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t checkpoint_fingerprint() const noexcept { return fingerprint_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {rows_.data() + i * dim_, dim_};
  }
  double norm(std::size_t i) const noexcept { return norms_[i]; }
  bool retrievable(std::size_t i) const noexcept { return norms_[i] > kDegenerateNorm; }
  std::size_t retrievable_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(norms_.begin(), norms_.end(),
                                                  [](double n) { return n > kDegenerateNorm; }));
  }

  /// Cosine of row i against a query of precomputed norm. Same arithmetic as
  /// cosine(z_q, row(i)).
  double score(std::size_t i, std::span<const double> z_q, double q_norm) const noexcept {
    return cosine_from_parts(dot(z_q, row(i)), q_norm, norms_[i]);
  }

  /// "GPRI", u32 [count, d], count f32 norms, count*d f32 rows, u64 checkpoint
  /// fingerprint; little-endian.
  Bytes serialize() const {
    ByteWriter w;
    w.magic(kIndexMagic);
    w.u32(static_cast<std::uint32_t>(size()));
    w.u32(static_cast<std::uint32_t>(dim_));
    for (double n : norms_) w.f32(static_cast<float>(n));
    for (float v : rows_) w.f32(v);
    w.u64(fingerprint_);
    return std::move(w.bytes());
  }

  static TripletIndex deserialize(std::span<const unsigned char> bytes,
                                  const std::string& what = "index") {
    ByteReader r(bytes, what);
    r.expect_magic(kIndexMagic);
    TripletIndex idx;
    const std::size_t count = r.u32();
    idx.dim_ = r.u32();
    if (count == 0 || idx.dim_ == 0) throw Error(ErrorKind::Schema, what + ": empty index");
    if (r.remaining() != 4 * count + 4 * count * idx.dim_ + 8) {
      throw Error(ErrorKind::Schema, what + ": size does not match header");
    }
    std::vector<float> stored_norms(count);
    for (auto& n : stored_norms) n = r.f32();
    idx.rows_.resize(count * idx.dim_);
    for (auto& v : idx.rows_) v = r.f32();
    idx.fingerprint_ = r.u64();
    idx.finish();
    for (std::size_t i = 0; i < count; ++i) {
      if (static_cast<float>(idx.norms_[i]) != stored_norms[i]) {
        throw Error(ErrorKind::Schema, what + ": stored norm of row " + std::to_string(i) +
                                           " does not match its row");
      }
    }
    return idx;
  }

  void save(const std::filesystem::path& path) const { write_file_bytes(path, serialize()); }
  static TripletIndex load(const std::filesystem::path& path) {
    return deserialize(read_file_bytes(path), path.string());
  }

  friend bool operator==(const TripletIndex& a, const TripletIndex& b) {
    return a.dim_ == b.dim_ && a.fingerprint_ == b.fingerprint_ && a.rows_ == b.rows_;
  }

 private:
  void finish() {
    const std::size_t count = rows_.size() / dim_;
    norms_.resize(count);
    for (std::size_t i = 0; i < count; ++i) norms_[i] = l2_norm(row(i));
    if (retrievable_count() == 0) {
      throw Error(ErrorKind::Degenerate, "every triplet embedding is degenerate");
    }
  }

  std::size_t dim_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::vector<float> rows_;
  std::vector<double> norms_;
};

struct ScoredTriplet {
  TripletId id = 0;
  double score = 0.0;

  friend bool operator==(const ScoredTriplet&, const ScoredTriplet&) = default;
};

/// Higher score first, then lower id.
constexpr bool ranks_before(const ScoredTriplet& a, const ScoredTriplet& b) noexcept {
  return a.score > b.score || (a.score == b.score && a.id < b.id);
}

struct RetrievalResult {
  std::vector<ScoredTriplet> entries;

  std::vector<TripletId> ids() const {
    std::vector<TripletId> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.id);
    return out;
  }
};

/// Scores of every retrievable row against an encoded query.
inline std::vector<ScoredTriplet> score_all(const TripletIndex& index, const Embedding& z_q) {
  if (z_q.size() != index.dim()) throw Error(ErrorKind::Mismatch, "query and index dimensions differ");
  const double qn = l2_norm(std::span<const double>(z_q));
  if (!(qn > kDegenerateNorm)) throw Error(ErrorKind::Degenerate, "question embedding is degenerate");
  std::vector<ScoredTriplet> scored;
  scored.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index.retrievable(i)) scored.push_back({static_cast<TripletId>(i), index.score(i, z_q, qn)});
  }
  return scored;
}

inline RetrievalResult top_k(std::vector<ScoredTriplet> scored, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::Config, "K must be >= 1");
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), ranks_before);
  scored.resize(keep);
  return {std::move(scored)};
}

/// Top-K triplets for a question by exhaustive cosine scan.
inline RetrievalResult retrieve_topk(const TripletIndex& index, const Tower& query_tower,
                                     std::string_view question, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::Config, "K must be >= 1");
  return top_k(score_all(index, encode_question(query_tower, question)), k);
}

/// As above, refusing an index built from a different checkpoint.
inline RetrievalResult retrieve_topk(const TripletIndex& index, const Checkpoint& ckpt,
                                     std::string_view question, std::size_t k) {
  if (index.checkpoint_fingerprint() != ckpt.fingerprint) {
    throw Error(ErrorKind::Mismatch, "index was built from checkpoint " +
                                         hex64(index.checkpoint_fingerprint()) +
                                         " but the loaded checkpoint is " + hex64(ckpt.fingerprint));
  }
  return retrieve_topk(index, ckpt.towers.query, question, k);
}

inline std::vector<Triplet> assemble_subgraph(const KnowledgeGraph& graph,
                                              const RetrievalResult& result) {
  std::vector<Triplet> out;
  out.reserve(result.entries.size());
  for (const auto& e : result.entries) out.push_back(graph.at(e.id));
  return out;
}

/// One "head | relation | tail" line per triplet.
inline std::string render_subgraph(std::span<const Triplet> triplets) {
  std::string out;
  for (const auto& t : triplets) out += serialize_triplet(t) + "\n";
  return out;
}

}  // namespace kgpr
