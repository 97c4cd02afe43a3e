#include <gtest/gtest.h>

#include "kgpr/augment.hpp"
#include "kgpr/optim.hpp"
#include "kgpr/train.hpp"

namespace kgpr {
namespace {

double one_param(double p, std::vector<double> grads, AdamWConfig cfg) {
  AdamW opt(cfg);
  const auto b = opt.add_block(1);
  for (double g : grads) {
    opt.begin_step();
    opt.update(b, 0, std::span<double>(&p, 1), std::span<const double>(&g, 1));
  }
  return p;
}

TEST(AdamWTest, MatchesReferenceSteps) {
  AdamWConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.0;
  // Frozen from the independent Python oracle.
  EXPECT_NEAR(one_param(1.0, {1.0}, cfg), 0.900000001, 1e-15);
  EXPECT_NEAR(one_param(1.0, {1.0, 1.0}, cfg), 0.8000000020000007, 1e-15);
  cfg.lr = 0.01;
  cfg.weight_decay = 0.1;
  EXPECT_NEAR(one_param(2.0, {0.5}, cfg), 1.9880000002, 1e-15);
}

TEST(AdamWTest, ZeroGradientAndZeroDecayIsANoOp) {
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  EXPECT_EQ(one_param(0.75, {0.0, 0.0, 0.0}, cfg), 0.75);
}

TEST(AdamWTest, Validation) {
  AdamWConfig cfg;
  cfg.lr = 0;
  EXPECT_THROW(AdamW{cfg}, Error);
  cfg = {};
  cfg.beta1 = 1.0;
  EXPECT_THROW(AdamW{cfg}, Error);
  AdamW opt;
  const auto b = opt.add_block(2);
  double p[2] = {0, 0};
  const double g[2] = {1, 1};
  EXPECT_THROW(opt.update(b, 0, p, g), Error);  // before begin_step
  opt.begin_step();
  EXPECT_THROW(opt.update(b, 1, p, g), Error);  // out of range
}

TEST(AdamWStepTest, SparseModeLeavesUntouchedRowsAlone) {
  EncoderConfig cfg;
  cfg.dim = 2;
  cfg.buckets = 4;
  for (bool sparse : {true, false}) {
    TowerPair towers = TowerPair::random(cfg, 1);
    const TowerPair before = towers;
    AdamWConfig oc;
    oc.sparse = sparse;
    AdamW opt(oc);
    const auto qb = opt.add_block(towers.query.table().size());
    const auto tb = opt.add_block(towers.triplet.table().size());
    Gradients grads(2);
    grads.query.add(1, std::vector<double>{1.0, -1.0});
    adamw_step(towers, grads, opt, qb, tb);
    EXPECT_NE(towers.query.row(1)[0], before.query.row(1)[0]);
    if (sparse) {
      EXPECT_EQ(towers.triplet, before.triplet);
      EXPECT_EQ(towers.query.row(0)[0], before.query.row(0)[0]);
    } else {
      // Dense mode applies decoupled decay to every entry.
      EXPECT_DOUBLE_EQ(towers.triplet.row(0)[0], before.triplet.row(0)[0] * (1 - oc.lr * oc.weight_decay));
    }
  }
}

TEST(AdamWStepTest, SmallStepDoesNotIncreaseBatchLoss) {
  Rng graph_rng(stage_seed(42, Stage::Graph));
  const auto g = generate_synthetic_graph(200, 20, 1000, graph_rng);
  TemplateQuestionGenerator gen;
  DatasetConfig dc;
  dc.triplet_cap = 64;
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto ds = build_dataset(g, gen, dc, rng);
    EncoderConfig ec;
    ec.buckets = 4096;
    TowerPair towers = TowerPair::random(ec, seed);
    std::vector<ExampleTokens> tokens;
    for (const auto& ex : ds.examples) tokens.push_back(tokenize_example(ex, g, ec.buckets));
    std::vector<std::size_t> batch(tokens.size());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;

    Gradients grads(ec.dim);
    const double before = batch_gradients(towers, tokens, batch, MarginConfig{}, 1, grads);
    ASSERT_GT(before, 0.0);
    AdamWConfig oc;
    oc.lr = 1e-3;
    AdamW opt(oc);
    const auto qb = opt.add_block(towers.query.table().size());
    const auto tb = opt.add_block(towers.triplet.table().size());
    adamw_step(towers, grads, opt, qb, tb);
    Gradients unused(ec.dim);
    const double after = batch_gradients(towers, tokens, batch, MarginConfig{}, 1, unused);
    if (after > before) ++violations;
  }
  EXPECT_LE(violations, 1);
}

}  // namespace
}  // namespace kgpr
