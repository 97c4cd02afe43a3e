#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "kgpr/augment.hpp"
#include "kgpr/encoder.hpp"
#include "kgpr/error.hpp"
#include "kgpr/graph.hpp"
#include "kgpr/objective.hpp"
#include "kgpr/optim.hpp"
#include "kgpr/rng.hpp"

namespace kgpr {

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 512;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  // 0 disables intermediate checkpoints.
  std::size_t checkpoint_every = 0;

  void validate() const {
    if (epochs < 1) throw Error(ErrorKind::Config, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorKind::Config, "batch size must be >= 1");
    if (jobs < 1) throw Error(ErrorKind::Config, "jobs must be >= 1");
  }
};

struct LossPoint {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double mean_loss = 0.0;
};

struct TrainResult {
  TowerPair towers;
  std::vector<LossPoint> curve;
  std::uint64_t steps = 0;
};

/// Called after every `checkpoint_every` epochs with the 1-based epoch.
using EpochCallback = std::function<void(std::size_t epoch, const TowerPair&)>;

/// Mean loss over a batch and the mean gradient, reduced in example order so
/// the result does not depend on `jobs`.
inline double batch_gradients(const TowerPair& towers, std::span<const ExampleTokens> tokens,
                              std::span<const std::size_t> batch, const MarginConfig& margins,
                              std::size_t jobs, Gradients& out) {
  const std::size_t n = batch.size();
  std::vector<Gradients> per(n, Gradients(towers.query.dim()));
  std::vector<double> losses(n, 0.0);
  std::vector<std::string> errors(n);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        losses[i] = backward(towers, tokens[batch[i]], margins, per[i]);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t workers = std::min(jobs, n);
  if (workers <= 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  const double inv = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      throw Error(ErrorKind::Degenerate,
                  "example " + std::to_string(batch[i]) + ": " + errors[i]);
    }
    loss += losses[i];
    out.merge(per[i], inv);
  }
  return loss * inv;
}

namespace detail {

inline void apply_grad(AdamW& opt, std::size_t block, Tower& tower, const SparseGrad& grad) {
  const std::size_t d = tower.dim();
  if (opt.config().sparse) {
    for (const auto& [row, g] : grad.rows()) {
      if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
      opt.update(block, row * d, tower.row(row), g);
    }
  } else {
    const auto dense = grad.dense(tower.buckets());
    opt.update(block, 0, tower.table(), dense);
  }
}

}  // namespace detail

/// One optimizer step on both towers from an accumulated gradient.
inline void adamw_step(TowerPair& towers, const Gradients& grads, AdamW& opt,
                       std::size_t query_block, std::size_t triplet_block) {
  opt.begin_step();
  detail::apply_grad(opt, query_block, towers.query, grads.query);
  detail::apply_grad(opt, triplet_block, towers.triplet, grads.triplet);
}

/// Epoch loop over a fixed dataset with seeded shuffling. `initial` seeds the
/// towers; pass TowerPair::random(encoder, seed) for a fresh start.
inline TrainResult train(std::span<const TrainingExample> dataset, const KnowledgeGraph& graph,
                         TowerPair initial, const TrainConfig& cfg, const MarginConfig& margins,
                         const AdamWConfig& optim, const EpochCallback& on_checkpoint = {}) {
  cfg.validate();
  margins.validate();
  if (dataset.empty()) throw Error(ErrorKind::Empty, "training dataset is empty");
  if (initial.query.dim() != initial.triplet.dim()) {
    throw Error(ErrorKind::Config, "query and triplet towers must share a dimension");
  }
  validate_examples(graph, dataset);

  std::vector<ExampleTokens> tokens;
  tokens.reserve(dataset.size());
  for (const auto& ex : dataset) {
    ExampleTokens t = tokenize_example(ex, graph, initial.query.buckets());
    if (initial.triplet.buckets() != initial.query.buckets()) {
      t.positive = bucket_ids(serialize_triplet(graph[ex.positive_id]), initial.triplet.buckets());
      t.neighbor = bucket_ids(serialize_triplet(graph[ex.neighbor_id]), initial.triplet.buckets());
      t.negative = bucket_ids(serialize_triplet(graph[ex.negative_id]), initial.triplet.buckets());
    }
    if (t.question.empty() || t.positive.empty() || t.neighbor.empty() || t.negative.empty()) {
      throw Error(ErrorKind::Degenerate,
                  "example " + std::to_string(tokens.size()) + " has a text without tokens");
    }
    tokens.push_back(std::move(t));
  }

  TrainResult result{std::move(initial), {}, 0};
  AdamW opt(optim);
  const auto qb = opt.add_block(result.towers.query.table().size());
  const auto tb = opt.add_block(result.towers.triplet.table().size());

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffler(derive_seed(cfg.seed, 3));

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffler.shuffle(std::span<std::size_t>(order));
    std::size_t batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      Gradients grads(result.towers.query.dim());
      const double loss = batch_gradients(result.towers, tokens, batch, margins, cfg.jobs, grads);
      adamw_step(result.towers, grads, opt, qb, tb);
      result.curve.push_back({epoch, ++batch_no, loss});
    }
    if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      on_checkpoint(epoch, result.towers);
    }
  }
  result.steps = opt.step();
  return result;
}

inline std::string loss_curve_csv(std::span<const LossPoint> curve) {
  std::string out = "epoch,batch,mean_loss\n";
  char buf[64];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", p.epoch, p.batch, p.mean_loss);
    out += buf;
  }
  return out;
}

}  // namespace kgpr
