#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "kgpr/augment.hpp"
#include "kgpr/encoder.hpp"
#include "kgpr/error.hpp"
#include "kgpr/graph.hpp"

namespace kgpr {

struct MarginConfig {
  double gamma1 = 0.5;  // exact triplet over neighbor
  double gamma2 = 0.5;  // neighbor over negative

  void validate() const {
    if (!std::isfinite(gamma1) || !std::isfinite(gamma2) || gamma1 < 0.0 || gamma2 < 0.0) {
      throw Error(ErrorKind::Config, "margins must be finite and >= 0");
    }
  }
};

/// max(0, gamma + cos(n, q) - cos(p, q)) given the two cosines.
inline double hinge(double gamma, double cos_preferred, double cos_less) noexcept {
  return std::max(0.0, gamma + cos_less - cos_preferred);
}

/// Margin loss of preferring p over n for query q.
inline double margin_loss(const Embedding& p, const Embedding& n, const Embedding& q, double gamma) {
  return hinge(gamma, cosine(p, q), cosine(n, q));
}

/// Exact-over-neighbor hinge plus neighbor-over-negative hinge.
inline double total_loss(const Embedding& z_tau, const Embedding& z_nb, const Embedding& z_neg,
                         const Embedding& z_q, const MarginConfig& m) {
  return margin_loss(z_tau, z_nb, z_q, m.gamma1) + margin_loss(z_nb, z_neg, z_q, m.gamma2);
}

/// Row-sparse gradient of one embedding table.
class SparseGrad {
 public:
  explicit SparseGrad(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  const std::map<std::uint32_t, std::vector<double>>& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }

  void add(std::uint32_t row, std::span<const double> g, double scale = 1.0) {
    auto& dst = rows_[row];
    if (dst.empty()) dst.assign(dim_, 0.0);
    for (std::size_t k = 0; k < dim_; ++k) dst[k] += scale * g[k];
  }

  void merge(const SparseGrad& other, double scale = 1.0) {
    for (const auto& [row, g] : other.rows_) add(row, g, scale);
  }

  /// Dense copy (buckets x dim).
  std::vector<double> dense(std::size_t buckets) const {
    std::vector<double> out(buckets * dim_, 0.0);
    for (const auto& [row, g] : rows_) std::copy(g.begin(), g.end(), out.begin() + row * dim_);
    return out;
  }

 private:
  std::size_t dim_;
  std::map<std::uint32_t, std::vector<double>> rows_;
};

struct Gradients {
  SparseGrad query;
  SparseGrad triplet;

  explicit Gradients(std::size_t dim = 0) : query(dim), triplet(dim) {}

  void merge(const Gradients& other, double scale = 1.0) {
    query.merge(other.query, scale);
    triplet.merge(other.triplet, scale);
  }
};

/// Hashed bucket ids of the four texts of one example.
struct ExampleTokens {
  std::vector<std::uint32_t> question;
  std::vector<std::uint32_t> positive;
  std::vector<std::uint32_t> neighbor;
  std::vector<std::uint32_t> negative;
};

inline ExampleTokens tokenize_example(const TrainingExample& ex, const KnowledgeGraph& g,
                                      std::size_t buckets) {
  return {bucket_ids(ex.question.text, buckets),
          bucket_ids(serialize_triplet(g.at(ex.positive_id)), buckets),
          bucket_ids(serialize_triplet(g.at(ex.neighbor_id)), buckets),
          bucket_ids(serialize_triplet(g.at(ex.negative_id)), buckets)};
}

namespace detail {

struct CosineTerm {
  double value;
  double norm_a;
  double norm_q;
};

inline CosineTerm cosine_term(const Embedding& a, const Embedding& q) {
  const double na = l2_norm(std::span<const double>(a));
  const double nq = l2_norm(std::span<const double>(q));
  if (!(na > kDegenerateNorm) || !(nq > kDegenerateNorm)) {
    throw Error(ErrorKind::Degenerate, "near-zero-norm embedding in loss");
  }
  return {cosine_from_parts(dot(std::span<const double>(a), std::span<const double>(q)), na, nq),
          na, nq};
}

// d cos(a, q) scaled by `w`, accumulated into ga and gq.
inline void accumulate_cosine_grad(const Embedding& a, const Embedding& q, const CosineTerm& c,
                                   double w, Embedding& ga, Embedding& gq) {
  const double inv = 1.0 / (c.norm_a * c.norm_q);
  const double ca = c.value / (c.norm_a * c.norm_a);
  const double cq = c.value / (c.norm_q * c.norm_q);
  for (std::size_t k = 0; k < a.size(); ++k) {
    ga[k] += w * (q[k] * inv - ca * a[k]);
    gq[k] += w * (a[k] * inv - cq * q[k]);
  }
}

inline void scatter_mean(SparseGrad& out, std::span<const std::uint32_t> ids, const Embedding& gz) {
  const double share = 1.0 / static_cast<double>(ids.size());
  for (auto id : ids) out.add(id, gz, share);
}

}  // namespace detail

/// Loss of one example and its gradient with respect to every embedding row
/// it touches, accumulated into `grads`. A hinge at or below zero contributes
/// nothing, so an example with zero loss leaves `grads` untouched.
inline double backward(const TowerPair& towers, const ExampleTokens& tokens,
                       const MarginConfig& margins, Gradients& grads) {
  const Embedding zq = towers.query.pool(tokens.question);
  const Embedding zt = towers.triplet.pool(tokens.positive);
  const Embedding zn = towers.triplet.pool(tokens.neighbor);
  const Embedding zg = towers.triplet.pool(tokens.negative);

  const auto c_tau = detail::cosine_term(zt, zq);
  const auto c_nb = detail::cosine_term(zn, zq);
  const auto c_neg = detail::cosine_term(zg, zq);

  const double h1 = margins.gamma1 + c_nb.value - c_tau.value;
  const double h2 = margins.gamma2 + c_neg.value - c_nb.value;
  const bool active1 = h1 > 0.0;
  const bool active2 = h2 > 0.0;
  const double loss = (active1 ? h1 : 0.0) + (active2 ? h2 : 0.0);
  if (!active1 && !active2) return loss;

  // dL/dcos for each of the three pairs.
  const double w_tau = active1 ? -1.0 : 0.0;
  const double w_nb = (active1 ? 1.0 : 0.0) - (active2 ? 1.0 : 0.0);
  const double w_neg = active2 ? 1.0 : 0.0;

  const std::size_t d = zq.size();
  Embedding gq(d, 0.0), gt(d, 0.0), gn(d, 0.0), gg(d, 0.0);
  if (w_tau != 0.0) detail::accumulate_cosine_grad(zt, zq, c_tau, w_tau, gt, gq);
  if (w_nb != 0.0) detail::accumulate_cosine_grad(zn, zq, c_nb, w_nb, gn, gq);
  if (w_neg != 0.0) detail::accumulate_cosine_grad(zg, zq, c_neg, w_neg, gg, gq);

  detail::scatter_mean(grads.query, tokens.question, gq);
  if (w_tau != 0.0) detail::scatter_mean(grads.triplet, tokens.positive, gt);
  if (w_nb != 0.0) detail::scatter_mean(grads.triplet, tokens.neighbor, gn);
  if (w_neg != 0.0) detail::scatter_mean(grads.triplet, tokens.negative, gg);
  return loss;
}

/// Forward-only loss of one example.
inline double example_loss(const TowerPair& towers, const ExampleTokens& tokens,
                           const MarginConfig& margins) {
  return total_loss(towers.triplet.pool(tokens.positive), towers.triplet.pool(tokens.neighbor),
                    towers.triplet.pool(tokens.negative), towers.query.pool(tokens.question),
                    margins);
}

}  // namespace kgpr
