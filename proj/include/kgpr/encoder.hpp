#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgpr/error.hpp"
#include "kgpr/graph.hpp"
#include "kgpr/hash.hpp"
#include "kgpr/rng.hpp"
#include "kgpr/text.hpp"

namespace kgpr {

struct EncoderConfig {
  std::size_t dim = 64;
  std::size_t buckets = 32768;
  double init_scale = 0.05;

  void validate() const {
    if (dim < 2) throw Error(ErrorKind::Config, "encoder dim must be >= 2");
    if (buckets < 2) throw Error(ErrorKind::Config, "encoder buckets must be >= 2");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
      throw Error(ErrorKind::Config, "encoder init_scale must be positive and finite");
    }
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

using Embedding = std::vector<double>;

inline constexpr double kDegenerateNorm = 1e-12;

inline std::string serialize_triplet(const Triplet& t) {
  return t.head + " | " + t.relation + " | " + t.tail;
}

inline std::uint32_t token_bucket(std::string_view token, std::size_t buckets) noexcept {
  return static_cast<std::uint32_t>(fnv1a64(token) % buckets);
}

inline std::vector<std::uint32_t> bucket_ids(std::string_view text, std::size_t buckets) {
  std::vector<std::uint32_t> ids;
  for (const auto& token : tokenize(text)) ids.push_back(token_bucket(token, buckets));
  return ids;
}

/// One encoder tower: a hashed embedding table pooled by mean.
class Tower {
 public:
  Tower() = default;

  explicit Tower(const EncoderConfig& cfg)
      : dim_(cfg.dim), buckets_(cfg.buckets), table_(cfg.dim * cfg.buckets, 0.0) {
    cfg.validate();
  }

  /// Entries drawn uniform(-init_scale, init_scale), row-major.
  static Tower random(const EncoderConfig& cfg, std::uint64_t seed) {
    Tower tower(cfg);
    Rng rng(seed);
    for (auto& w : tower.table_) w = rng.uniform(-cfg.init_scale, cfg.init_scale);
    return tower;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t buckets() const noexcept { return buckets_; }

  std::span<double> row(std::size_t bucket) noexcept {
    return {table_.data() + bucket * dim_, dim_};
  }
  std::span<const double> row(std::size_t bucket) const noexcept {
    return {table_.data() + bucket * dim_, dim_};
  }
  std::span<double> table() noexcept { return table_; }
  std::span<const double> table() const noexcept { return table_; }

  /// Mean of the rows at `ids`; every occurrence contributes.
  Embedding pool(std::span<const std::uint32_t> ids) const {
    if (ids.empty()) throw Error(ErrorKind::Degenerate, "cannot encode an empty token list");
    Embedding z(dim_, 0.0);
    for (auto id : ids) {
      const auto r = row(id);
      for (std::size_t k = 0; k < dim_; ++k) z[k] += r[k];
    }
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (auto& v : z) v *= inv;
    return z;
  }

  Embedding encode(std::string_view text) const {
    const auto ids = bucket_ids(text, buckets_);
    if (ids.empty()) {
      throw Error(ErrorKind::Degenerate,
                  "text has no tokens to encode: \"" + std::string(text) + "\"");
    }
    return pool(ids);
  }

  friend bool operator==(const Tower&, const Tower&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t buckets_ = 0;
  std::vector<double> table_;
};

/// The two independent towers of the retriever.
struct TowerPair {
  Tower query;
  Tower triplet;

  static TowerPair random(const EncoderConfig& cfg, std::uint64_t seed) {
    return {Tower::random(cfg, derive_seed(seed, 1)), Tower::random(cfg, derive_seed(seed, 2))};
  }

  friend bool operator==(const TowerPair&, const TowerPair&) = default;
};

inline Embedding encode(const Tower& tower, std::string_view text) { return tower.encode(text); }

inline Embedding encode_question(const Tower& query_tower, std::string_view question) {
  return query_tower.encode(question);
}

inline Embedding encode_triplet(const Tower& triplet_tower, const Triplet& t) {
  return triplet_tower.encode(serialize_triplet(t));
}

template <class A, class B>
double dot(std::span<const A> a, std::span<const B> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

template <class A>
double l2_norm(std::span<const A> a) noexcept {
  return std::sqrt(dot(a, a));
}

inline double cosine_from_parts(double dot_ab, double norm_a, double norm_b) noexcept {
  return std::clamp(dot_ab / (norm_a * norm_b), -1.0, 1.0);
}

/// Cosine similarity clamped to [-1, 1]. Throws on a near-zero-norm input.
template <class A, class B>
double cosine(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Mismatch, "cosine of vectors of different length");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > kDegenerateNorm) || !(nb > kDegenerateNorm)) {
    throw Error(ErrorKind::Degenerate, "cosine of a near-zero-norm embedding");
  }
  return cosine_from_parts(dot(a, b), na, nb);
}

inline double cosine(const Embedding& a, const Embedding& b) {
  return cosine(std::span<const double>(a), std::span<const double>(b));
}

}  // namespace kgpr
