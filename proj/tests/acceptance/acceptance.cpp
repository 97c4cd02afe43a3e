// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "kgpr/kgpr.hpp"

namespace {

using namespace kgpr;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

KnowledgeGraph desk_graph() {
  Rng rng(stage_seed(42, Stage::Graph));
  return generate_synthetic_graph(200, 20, 1000, rng);
}

// Plain-loop forward pass over raw tables, independent of the library's.
double reference_loss(const std::vector<double>& qt, const std::vector<double>& tt, std::size_t d,
                      const ExampleTokens& ex, double g1, double g2) {
  auto pool = [&](const std::vector<double>& table, const std::vector<std::uint32_t>& ids) {
    std::vector<double> z(d, 0.0);
    for (auto id : ids)
      for (std::size_t k = 0; k < d; ++k) z[k] += table[id * d + k] / static_cast<double>(ids.size());
    return z;
  };
  auto cos = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double xy = 0, xx = 0, yy = 0;
    for (std::size_t k = 0; k < d; ++k) {
      xy += x[k] * y[k];
      xx += x[k] * x[k];
      yy += y[k] * y[k];
    }
    return xy / std::sqrt(xx * yy);
  };
  const auto zq = pool(qt, ex.question);
  const double ct = cos(pool(tt, ex.positive), zq);
  const double cn = cos(pool(tt, ex.neighbor), zq);
  const double cg = cos(pool(tt, ex.negative), zq);
  return std::max(0.0, g1 + cn - ct) + std::max(0.0, g2 + cg - cn);
}

Outcome ac1_gradient_oracle() {
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.buckets = 64;
  cfg.init_scale = 1.0;
  const MarginConfig m;
  const double h = 1e-4;
  Rng rng(42);
  auto ids = [&] {
    std::vector<std::uint32_t> v(1 + rng.uniform_index(4));
    for (auto& id : v) id = static_cast<std::uint32_t>(rng.uniform_index(cfg.buckets));
    return v;
  };
  double worst = 0.0;
  std::size_t checked = 0, kinks = 0;
  for (int e = 0; e < 100; ++e) {
    const auto towers = TowerPair::random(cfg, derive_seed(42, 1000 + e));
    const ExampleTokens ex{ids(), ids(), ids(), ids()};
    Gradients grads(cfg.dim);
    backward(towers, ex, m, grads);
    std::vector<double> qt(towers.query.table().begin(), towers.query.table().end());
    std::vector<double> tt(towers.triplet.table().begin(), towers.triplet.table().end());
    const auto gq = grads.query.dense(cfg.buckets);
    const auto gt = grads.triplet.dense(cfg.buckets);
    const double mid = reference_loss(qt, tt, cfg.dim, ex, m.gamma1, m.gamma2);
    auto check = [&](std::vector<double>& table, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < table.size(); ++i) {
        const double saved = table[i];
        table[i] = saved + h;
        const double up = reference_loss(qt, tt, cfg.dim, ex, m.gamma1, m.gamma2);
        table[i] = saved - h;
        const double down = reference_loss(qt, tt, cfg.dim, ex, m.gamma1, m.gamma2);
        table[i] = saved;
        if (std::abs((up - mid) - (mid - down)) > 1e-6) {
          ++kinks;  // a hinge switches inside the stencil
          continue;
        }
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(analytic[i]));
        if (scale < 1e-8) continue;
        worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
        ++checked;
      }
    };
    check(qt, gq);
    check(tt, gt);
  }
  return {worst < 1e-4 && checked > 0,
          fmt("max rel err %.3g over %.0f entries (%.0f kink entries skipped)", worst,
              static_cast<double>(checked), static_cast<double>(kinks))};
}

Outcome ac2_loss_goldens() {
  auto at = [](double c) { return Embedding{c, std::sqrt(1.0 - c * c)}; };
  const Embedding q{1, 0};
  const MarginConfig m;
  const Embedding same{0.3, -0.7};
  const std::vector<std::pair<double, double>> cases{
      {total_loss(at(0.9), at(0.6), at(0.0), q, m), 0.2},
      {total_loss(same, same, same, same, m), 1.0},
      {total_loss(at(1.0), at(0.4), at(-0.2), q, m), 0.0},
      {margin_loss(at(0.3), at(0.3), q, 0.5), 0.5},
      {margin_loss(at(1.0), at(0.0), q, 0.5), 0.0},
      {margin_loss(at(0.2), at(0.9), q, 0.5), 1.2},
  };
  double worst = 0.0;
  for (const auto& [got, want] : cases) worst = std::max(worst, std::abs(got - want));
  return {worst <= 1e-12, fmt("6 cases, max abs err %.3g", worst)};
}

Outcome ac3_dataset_invariants() {
  const auto g = desk_graph();
  TemplateQuestionGenerator gen;
  Rng rng(stage_seed(42, Stage::Dataset));
  const auto ds = build_dataset(g, gen, {}, rng);
  std::size_t violations = 0;
  for (const auto& ex : ds.examples) {
    const auto& t = g[ex.positive_id];
    auto shares = [&](const Triplet& u) {
      return u.head == t.head || u.head == t.tail || u.tail == t.head || u.tail == t.tail;
    };
    if (ex.neighbor_id == ex.positive_id || !shares(g[ex.neighbor_id])) ++violations;
    if (ex.negative_id == ex.positive_id || shares(g[ex.negative_id])) ++violations;
  }
  return {violations == 0 && ds.examples.size() == 2000,
          fmt("%.0f examples, %.0f violations", static_cast<double>(ds.examples.size()),
              static_cast<double>(violations))};
}

Outcome ac4_retrieval_oracle() {
  const auto g = desk_graph();
  const auto towers = TowerPair::random(EncoderConfig{}, 42);
  const auto ckpt = Checkpoint::from_towers(towers);
  const auto idx = TripletIndex::build(g, ckpt);
  Rng rng(4242);
  std::size_t mismatches = 0;
  for (int q = 0; q < 200; ++q) {
    const auto& t = g[rng.uniform_index(g.size())];
    const std::string question = (q % 2 ? "What is the " + t.relation + " of " + t.head + "?"
                                         : "What has " + t.relation + " " + t.tail + "?");
    const auto zq = encode_question(ckpt.towers.query, question);
    std::vector<std::pair<double, TripletId>> all;
    for (const auto& u : g.triplets()) {
      Embedding row(idx.row(u.id).begin(), idx.row(u.id).end());
      all.emplace_back(cosine(zq, row), u.id);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (std::size_t k : {1, 5, 10, 50}) {
      const auto ids = retrieve_topk(idx, ckpt, question, k).ids();
      bool same = ids.size() == k;
      for (std::size_t i = 0; same && i < k; ++i) same = ids[i] == all[i].second;
      if (!same) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("800 queries, %.0f mismatches", static_cast<double>(mismatches))};
}

const PipelineResult& seed42_pipeline() {
  static const PipelineResult r = run_pipeline(RunConfig{});
  return r;
}

Outcome ac5_training_effectiveness() {
  const auto& r = seed42_pipeline();
  const double trained = r.trained_report.recall_at_k.at(10);
  const double untrained = r.untrained_report.recall_at_k.at(10);
  const auto& o = r.trained_report.ordering;
  const double gap1 = o.mean_cos_positive - o.mean_cos_neighbor;
  const double gap2 = o.mean_cos_neighbor - o.mean_cos_negative;
  // Regression values pinned from the first seed-42 run.
  const bool pinned = std::abs(trained - 0.875) < 1e-12 && std::abs(untrained - 0.015) < 1e-12;
  return {trained >= 3 * untrained && gap1 > 0.05 && gap2 > 0.05 && pinned,
          fmt("recall@10 trained %.4f vs untrained %.4f; gaps %.4f, %.4f", trained, untrained, gap1, gap2) +
              (pinned ? "" : " (pinned regression values changed)")};
}

Outcome ac6_k_sweep_trend() {
  const auto& r = seed42_pipeline();
  bool ok = true;
  double prev = -1.0;
  std::string detail = "trained/untrained:";
  for (auto k : kDefaultKList) {
    const double t = r.trained_report.recall_at_k.at(k);
    const double u = r.untrained_report.recall_at_k.at(k);
    ok = ok && t >= prev && t > u;
    prev = t;
    detail += fmt(" @%.0f %.4f/%.4f", static_cast<double>(k), t, u);
  }
  return {ok, detail};
}

Outcome ac7_determinism() {
  const auto base = std::filesystem::temp_directory_path() / ("kgpr_accept_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  run_pipeline(RunConfig{}, base / "a");
  run_pipeline(RunConfig{}, base / "b");
  std::vector<std::string> differ;
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(base / "a")) {
    const auto name = entry.path().filename().string();
    ++compared;
    if (!std::filesystem::exists(base / "b" / name) ||
        read_file_bytes(entry.path()) != read_file_bytes(base / "b" / name)) {
      differ.push_back(name);
    }
  }
  std::filesystem::remove_all(base);
  std::string detail = std::to_string(compared) + " artifacts compared";
  for (const auto& d : differ) detail += ", differs: " + d;
  return {differ.empty() && compared >= 3, detail};
}

Outcome ac8_augmentation_goldens() {
  const auto g = load_graph(std::filesystem::path(KGPR_TEST_DATA_DIR) / "adhd.tsv");
  TemplateQuestionGenerator gen;
  Rng rng(42);
  const auto ds = build_dataset(g, gen, {}, rng);
  std::vector<const TrainingExample*> tau;
  for (const auto& ex : ds.examples) {
    if (ex.question.source_triplet_id == 0) tau.push_back(&ex);
  }
  bool ok = tau.size() == 2 && tau[0]->question.masked_slot == MaskSlot::Head &&
            tau[1]->question.masked_slot == MaskSlot::Tail;
  for (const auto* ex : tau) {
    ok = ok && g[ex->neighbor_id].shares_entity(g[0]) && !g[ex->negative_id].shares_entity(g[0]);
  }
  const auto nbs = neighbors(g, g[0]);
  const bool cephalon_nb = std::find(nbs.begin(), nbs.end(), 2u) != nbs.end();
  const bool prednisone_neg = !g[3].shares_entity(g[0]);
  return {ok && cephalon_nb && prednisone_neg,
          fmt("%.0f questions for the source triplet; Cephalon neighbor %.0f, Prednisone negative %.0f",
              static_cast<double>(tau.size()), cephalon_nb, prednisone_neg)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1 gradient oracle", ac1_gradient_oracle},
      {"AC2 loss goldens", ac2_loss_goldens},
      {"AC3 dataset invariants", ac3_dataset_invariants},
      {"AC4 retrieval oracle", ac4_retrieval_oracle},
      {"AC5 training effectiveness", ac5_training_effectiveness},
      {"AC6 k-sweep trend", ac6_k_sweep_trend},
      {"AC7 determinism", ac7_determinism},
      {"AC8 augmentation goldens", ac8_augmentation_goldens},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
