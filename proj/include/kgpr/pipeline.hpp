#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgpr/augment.hpp"
#include "kgpr/binary_io.hpp"
#include "kgpr/checkpoint.hpp"
#include "kgpr/config.hpp"
#include "kgpr/eval.hpp"
#include "kgpr/graph.hpp"
#include "kgpr/llm.hpp"
#include "kgpr/retrieval.hpp"
#include "kgpr/rng.hpp"
#include "kgpr/train.hpp"

namespace kgpr {

inline std::unique_ptr<QuestionGenerator> make_generator(const GeneratorConfig& cfg) {
  if (cfg.kind == GeneratorKind::ExternalLlm) return std::make_unique<LlmQuestionGenerator>(cfg.llm);
  return std::make_unique<TemplateQuestionGenerator>();
}

inline nlohmann::ordered_json run_stamp(const RunConfig& cfg) {
  return {{"seed", cfg.seed}, {"config_hash", hex64(config_hash(cfg))}};
}

struct PipelineResult {
  KnowledgeGraph graph;
  Dataset dataset;
  SplitResult split;
  TrainResult training;
  Checkpoint trained;
  Checkpoint untrained;
  EvalReport trained_report;
  EvalReport untrained_report;
  nlohmann::ordered_json report;
};

inline nlohmann::ordered_json skip_json(const SkipReport& s) {
  return {{"no_neighbor", s.no_neighbor}, {"no_negative", s.no_negative}};
}

/// synth-graph -> build-dataset -> split -> train -> index -> eval, all
/// seeded from cfg.seed. When `out_dir` is non-empty every intermediate
/// artifact is written there.
inline PipelineResult run_pipeline(RunConfig cfg, const std::filesystem::path& out_dir = {}) {
  cfg.train.seed = cfg.seed;
  cfg.train.jobs = cfg.jobs;
  cfg.validate();
  const auto stamp = run_stamp(cfg);
  PipelineResult r;

  Rng graph_rng(stage_seed(cfg.seed, Stage::Graph));
  r.graph = generate_synthetic_graph(cfg.synth.entities, cfg.synth.relations, cfg.synth.triplets,
                                     graph_rng);
  auto gen = make_generator(cfg.generator);
  Rng dataset_rng(stage_seed(cfg.seed, Stage::Dataset));
  r.dataset = build_dataset(r.graph, *gen, cfg.dataset, dataset_rng);
  Rng split_rng(stage_seed(cfg.seed, Stage::Split));
  r.split = split_dataset(r.dataset.examples, cfg.eval.holdout_fraction, split_rng);

  const auto initial = TowerPair::random(cfg.encoder, stage_seed(cfg.seed, Stage::Init));
  r.untrained = Checkpoint::from_towers(initial);
  r.training = train(r.split.train, r.graph, initial, cfg.train, cfg.margins, cfg.optimizer);

  nlohmann::ordered_json meta = stamp;
  meta["config"] = to_json(cfg);
  meta["training"] = {{"steps", r.training.steps},
                      {"examples", r.split.train.size()},
                      {"final_batch_loss", r.training.curve.empty() ? 0.0 : r.training.curve.back().mean_loss}};
  r.trained = Checkpoint::from_towers(r.training.towers, meta);

  const auto trained_index = TripletIndex::build(r.graph, r.trained);
  const auto untrained_index = TripletIndex::build(r.graph, r.untrained);
  r.trained_report = evaluate(trained_index, r.trained.towers.query, r.graph, r.split.heldout,
                              cfg.eval.k_list, cfg.jobs);
  r.untrained_report = evaluate(untrained_index, r.untrained.towers.query, r.graph,
                                r.split.heldout, cfg.eval.k_list, cfg.jobs);

  auto& rep = r.report;
  rep = stamp;
  rep["config"] = to_json(cfg);
  rep["graph"] = {{"triplets", r.graph.size()},
                  {"entities", r.graph.entity_count()},
                  {"relations", r.graph.relation_count()}};
  rep["dataset"] = {{"examples", r.dataset.examples.size()},
                    {"skipped", skip_json(r.dataset.skipped)},
                    {"train_examples", r.split.train.size()},
                    {"heldout_examples", r.split.heldout.size()}};
  rep["training"] = meta["training"];
  rep["checkpoint_fingerprint"] = hex64(r.trained.fingerprint);
  rep["trained"] = to_json(r.trained_report);
  rep["untrained"] = to_json(r.untrained_report);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_graph(r.graph, out_dir / "graph.tsv");
    write_dataset(r.dataset.examples, out_dir / "dataset.jsonl");
    write_dataset(r.split.train, out_dir / "train.jsonl");
    write_dataset(r.split.heldout, out_dir / "heldout.jsonl");
    write_text_file(out_dir / "loss.csv", loss_curve_csv(r.training.curve));
    save_checkpoint(out_dir / "model.ckpt", r.training.towers, meta);
    trained_index.save(out_dir / "index.gpri");
    nlohmann::ordered_json index_meta = stamp;
    index_meta["checkpoint_fingerprint"] = hex64(trained_index.checkpoint_fingerprint());
    write_text_file(out_dir / "index.gpri.json", index_meta.dump(2) + "\n");
    std::vector<KSweepRow> rows;
    for (auto k : cfg.eval.k_list) {
      rows.push_back({k, r.trained_report.recall_at_k.at(k), r.trained_report.neighbor_recall_at_k.at(k)});
    }
    write_text_file(out_dir / "k_sweep.csv", k_sweep_csv(rows));
    for (const char* name : {"graph.tsv", "dataset.jsonl", "train.jsonl", "heldout.jsonl",
                             "loss.csv", "k_sweep.csv"}) {
      write_text_file(sidecar_path(out_dir / name), stamp.dump(2) + "\n");
    }
    write_text_file(out_dir / "report.json", rep.dump(2) + "\n");
  }
  return r;
}

}  // namespace kgpr
