// kgpr: command-line front end for the knowledge-graph pretrained retriever.
//
// Exit codes: 0 success, 1 operational error, 2 usage error.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgpr/kgpr.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_path;
  std::string format = "text";
  std::size_t jobs = 0;
  CLI::Option* jobs_opt = nullptr;
};

// Resolved config: defaults, then the config file, then explicit flags.
kgpr::RunConfig base_config(const Common& common) {
  kgpr::RunConfig cfg;
  if (!common.config_path.empty()) cfg = kgpr::load_config(common.config_path);
  if (common.jobs_opt != nullptr && common.jobs_opt->count() > 0) cfg.jobs = common.jobs;
  return cfg;
}

template <class T, class U>
void override_with(const CLI::Option* opt, const T& value, U& target) {
  if (opt->count() > 0) target = static_cast<U>(value);
}

void finalize(kgpr::RunConfig& cfg) {
  cfg.train.seed = cfg.seed;
  cfg.train.jobs = cfg.jobs;
  cfg.validate();
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw kgpr::Error(kgpr::ErrorKind::Config, "invalid K value \"" + item + "\"");
    }
  }
  return out;
}

void emit(const Common& common, const ordered_json& j, const std::string& text) {
  if (common.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

ordered_json stamp(const kgpr::RunConfig& cfg) { return kgpr::run_stamp(cfg); }

void write_sidecar(const fs::path& artifact, ordered_json meta) {
  kgpr::write_text_file(kgpr::sidecar_path(artifact), meta.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgpr: train and query a knowledge-graph triplet retriever"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "JSON run config; flags override its values")
      ->check(CLI::ExistingFile);
  app.add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));
  common.jobs_opt = app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::function<void()> action;

  // synth-graph ------------------------------------------------------------
  auto* synth = app.add_subcommand("synth-graph", "Generate a uniform random graph");
  std::size_t s_entities = 0, s_relations = 0, s_triplets = 0;
  std::uint64_t s_seed = 0;
  std::string s_out;
  auto* s_ent_opt = synth->add_option("--entities", s_entities, "Entity count");
  auto* s_rel_opt = synth->add_option("--relations", s_relations, "Relation count");
  auto* s_tri_opt = synth->add_option("--triplets", s_triplets, "Triplet count");
  auto* s_seed_opt = synth->add_option("--seed", s_seed, "Seed");
  synth->add_option("--out", s_out, "Output TSV (stdout if omitted)");
  synth->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      override_with(s_ent_opt, s_entities, cfg.synth.entities);
      override_with(s_rel_opt, s_relations, cfg.synth.relations);
      override_with(s_tri_opt, s_triplets, cfg.synth.triplets);
      override_with(s_seed_opt, s_seed, cfg.seed);
      finalize(cfg);
      kgpr::Rng rng(kgpr::stage_seed(cfg.seed, kgpr::Stage::Graph));
      const auto g = kgpr::generate_synthetic_graph(cfg.synth.entities, cfg.synth.relations,
                                                    cfg.synth.triplets, rng);
      if (s_out.empty()) {
        for (const auto& t : g.triplets()) std::cout << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
        return;
      }
      kgpr::write_graph(g, s_out);
      auto j = stamp(cfg);
      j["triplets"] = g.size();
      j["entities"] = g.entity_count();
      j["relations"] = g.relation_count();
      write_sidecar(s_out, j);
      emit(common, j, "wrote " + std::to_string(g.size()) + " triplets to " + s_out + "\n");
    };
  });

  // build-dataset ----------------------------------------------------------
  auto* build = app.add_subcommand("build-dataset", "Generate (question, triplet, neighbor, negative) examples");
  std::string b_graph, b_out, b_generator = "template", b_heldout_out, b_url, b_model, b_prompt;
  std::uint64_t b_seed = 0;
  std::size_t b_neighbors = 1, b_negatives = 1, b_cap = 0;
  double b_holdout = 0.2;
  bool b_fallback = false;
  build->add_option("--graph", b_graph, "Triples TSV")->required()->check(CLI::ExistingFile);
  build->add_option("--out", b_out, "Output JSONL")->required();
  auto* b_gen_opt = build->add_option("--generator", b_generator, "Question generator")
                        ->check(CLI::IsMember({"template", "llm", "external-llm"}));
  auto* b_seed_opt = build->add_option("--seed", b_seed, "Seed");
  auto* b_nb_opt = build->add_option("--neighbors", b_neighbors, "Neighbors per question");
  auto* b_neg_opt = build->add_option("--negatives", b_negatives, "Negatives per question");
  auto* b_cap_opt = build->add_option("--cap", b_cap, "Only use the first N triplets");
  auto* b_holdout_opt = build->add_option("--holdout", b_holdout, "Held-out fraction (with --heldout-out)");
  build->add_option("--heldout-out", b_heldout_out,
                    "Split by source triplet: training part to --out, held-out part here");
  auto* b_url_opt = build->add_option("--llm-url", b_url, "Chat-completions base URL");
  auto* b_model_opt = build->add_option("--llm-model", b_model, "Model name");
  auto* b_prompt_opt = build->add_option("--llm-prompt", b_prompt, "System prompt override");
  auto* b_fallback_opt = build->add_flag("--llm-fallback-template", b_fallback,
                                         "Use the template question when a request fails");
  build->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      if (b_gen_opt->count() > 0) {
        cfg.generator.kind = *kgpr::parse_generator_kind(b_generator);
      }
      override_with(b_seed_opt, b_seed, cfg.seed);
      override_with(b_nb_opt, b_neighbors, cfg.dataset.neighbors_per_question);
      override_with(b_neg_opt, b_negatives, cfg.dataset.negatives_per_question);
      if (b_cap_opt->count() > 0) cfg.dataset.triplet_cap = b_cap;
      override_with(b_holdout_opt, b_holdout, cfg.eval.holdout_fraction);
      override_with(b_url_opt, b_url, cfg.generator.llm.base_url);
      override_with(b_model_opt, b_model, cfg.generator.llm.model);
      override_with(b_prompt_opt, b_prompt, cfg.generator.llm.system_prompt);
      if (b_fallback_opt->count() > 0) cfg.generator.llm.fallback_to_template = b_fallback;
      finalize(cfg);

      const auto g = kgpr::load_graph(b_graph);
      auto gen = kgpr::make_generator(cfg.generator);
      kgpr::Rng rng(kgpr::stage_seed(cfg.seed, kgpr::Stage::Dataset));
      const auto ds = kgpr::build_dataset(g, *gen, cfg.dataset, rng);
      auto j = stamp(cfg);
      j["examples"] = ds.examples.size();
      j["skipped"] = kgpr::skip_json(ds.skipped);
      std::string text = "built " + std::to_string(ds.examples.size()) + " examples (skipped: " +
                         std::to_string(ds.skipped.no_neighbor) + " without neighbors, " +
                         std::to_string(ds.skipped.no_negative) + " without negatives)\n";
      if (b_heldout_out.empty()) {
        kgpr::write_dataset(ds.examples, b_out);
      } else {
        kgpr::Rng split_rng(kgpr::stage_seed(cfg.seed, kgpr::Stage::Split));
        const auto split = kgpr::split_dataset(ds.examples, cfg.eval.holdout_fraction, split_rng);
        kgpr::write_dataset(split.train, b_out);
        kgpr::write_dataset(split.heldout, b_heldout_out);
        j["train_examples"] = split.train.size();
        j["heldout_examples"] = split.heldout.size();
        write_sidecar(b_heldout_out, j);
        text += "split: " + std::to_string(split.train.size()) + " train, " +
                std::to_string(split.heldout.size()) + " held out\n";
      }
      write_sidecar(b_out, j);
      emit(common, j, text);
    };
  });

  // train ------------------------------------------------------------------
  auto* trn = app.add_subcommand("train", "Pretrain both towers on a dataset");
  std::string t_dataset, t_graph, t_out, t_loss_csv;
  std::size_t t_epochs = 0, t_batch = 0, t_dim = 0, t_buckets = 0, t_ckpt_every = 0;
  double t_lr = 0, t_g1 = 0, t_g2 = 0, t_wd = 0;
  std::uint64_t t_seed = 0;
  bool t_dense = false;
  trn->add_option("--dataset", t_dataset, "Training JSONL")->required()->check(CLI::ExistingFile);
  trn->add_option("--graph", t_graph, "Triples TSV")->required()->check(CLI::ExistingFile);
  trn->add_option("--out", t_out, "Output checkpoint")->required();
  auto* t_epochs_opt = trn->add_option("--epochs", t_epochs, "Epochs");
  auto* t_batch_opt = trn->add_option("--batch", t_batch, "Batch size");
  auto* t_lr_opt = trn->add_option("--lr", t_lr, "AdamW learning rate");
  auto* t_wd_opt = trn->add_option("--weight-decay", t_wd, "AdamW decoupled weight decay");
  auto* t_g1_opt = trn->add_option("--gamma1", t_g1, "Exact-over-neighbor margin");
  auto* t_g2_opt = trn->add_option("--gamma2", t_g2, "Neighbor-over-negative margin");
  auto* t_dim_opt = trn->add_option("--dim", t_dim, "Embedding dimension");
  auto* t_buckets_opt = trn->add_option("--buckets", t_buckets, "Hash buckets per tower");
  auto* t_seed_opt = trn->add_option("--seed", t_seed, "Seed");
  auto* t_every_opt = trn->add_option("--checkpoint-every", t_ckpt_every, "Also write <out>.epoch<N> every N epochs");
  auto* t_dense_opt = trn->add_flag("--dense", t_dense, "Dense AdamW updates over every row");
  trn->add_option("--loss-csv", t_loss_csv, "Loss curve CSV (default <out>.loss.csv)");
  trn->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      override_with(t_epochs_opt, t_epochs, cfg.train.epochs);
      override_with(t_batch_opt, t_batch, cfg.train.batch_size);
      override_with(t_lr_opt, t_lr, cfg.optimizer.lr);
      override_with(t_wd_opt, t_wd, cfg.optimizer.weight_decay);
      override_with(t_g1_opt, t_g1, cfg.margins.gamma1);
      override_with(t_g2_opt, t_g2, cfg.margins.gamma2);
      override_with(t_dim_opt, t_dim, cfg.encoder.dim);
      override_with(t_buckets_opt, t_buckets, cfg.encoder.buckets);
      override_with(t_seed_opt, t_seed, cfg.seed);
      override_with(t_every_opt, t_ckpt_every, cfg.train.checkpoint_every);
      if (t_dense_opt->count() > 0) cfg.optimizer.sparse = !t_dense;
      finalize(cfg);

      const auto g = kgpr::load_graph(t_graph);
      const auto ds = kgpr::read_dataset(t_dataset);
      auto meta = stamp(cfg);
      meta["config"] = kgpr::to_json(cfg);
      const auto initial = kgpr::TowerPair::random(cfg.encoder, kgpr::stage_seed(cfg.seed, kgpr::Stage::Init));
      auto on_epoch = [&](std::size_t epoch, const kgpr::TowerPair& towers) {
        auto m = meta;
        m["training"] = {{"epoch", epoch}};
        kgpr::save_checkpoint(t_out + ".epoch" + std::to_string(epoch), towers, m);
      };
      const auto result = kgpr::train(ds, g, initial, cfg.train, cfg.margins, cfg.optimizer, on_epoch);
      meta["training"] = {{"steps", result.steps},
                          {"examples", ds.size()},
                          {"final_batch_loss", result.curve.empty() ? 0.0 : result.curve.back().mean_loss}};
      const auto fp = kgpr::save_checkpoint(t_out, result.towers, meta);
      const std::string csv = t_loss_csv.empty() ? t_out + ".loss.csv" : t_loss_csv;
      kgpr::write_text_file(csv, kgpr::loss_curve_csv(result.curve));
      write_sidecar(csv, stamp(cfg));
      auto j = meta;
      j["checkpoint_fingerprint"] = kgpr::hex64(fp);
      j["loss_csv"] = csv;
      emit(common, j,
           "trained " + std::to_string(result.steps) + " steps; final batch loss " +
               std::to_string(result.curve.back().mean_loss) + "; checkpoint " + t_out + " (" +
               kgpr::hex64(fp) + ")\n");
    };
  });

  // index ------------------------------------------------------------------
  auto* idx = app.add_subcommand("index", "Embed every triplet with the triplet tower");
  std::string i_graph, i_ckpt, i_out;
  idx->add_option("--graph", i_graph, "Triples TSV")->required()->check(CLI::ExistingFile);
  idx->add_option("--ckpt", i_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  idx->add_option("--out", i_out, "Output index")->required();
  idx->callback([&] {
    action = [&] {
      const auto g = kgpr::load_graph(i_graph);
      const auto ckpt = kgpr::load_checkpoint(i_ckpt);
      const auto index = kgpr::TripletIndex::build(g, ckpt);
      index.save(i_out);
      ordered_json j;
      if (ckpt.metadata.is_object()) {
        for (const char* key : {"seed", "config_hash"}) {
          if (ckpt.metadata.contains(key)) j[key] = ckpt.metadata[key];
        }
      }
      j["rows"] = index.size();
      j["retrievable"] = index.retrievable_count();
      j["dim"] = index.dim();
      j["checkpoint_fingerprint"] = kgpr::hex64(index.checkpoint_fingerprint());
      write_sidecar(i_out, j);
      emit(common, j, "indexed " + std::to_string(index.size()) + " triplets (" +
                          std::to_string(index.retrievable_count()) + " retrievable) to " + i_out + "\n");
    };
  });

  // retrieve ---------------------------------------------------------------
  auto* ret = app.add_subcommand("retrieve", "Top-K triplets for a question");
  std::string r_idx, r_ckpt, r_question, r_graph, r_format = "lines";
  std::size_t r_k = 10;
  ret->add_option("--idx", r_idx, "Index file")->required()->check(CLI::ExistingFile);
  ret->add_option("--ckpt", r_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  ret->add_option("--question", r_question, "Question text")->required();
  ret->add_option("--k", r_k, "Number of triplets")->check(CLI::PositiveNumber);
  ret->add_option("--graph", r_graph, "Triples TSV used to render triplets")->check(CLI::ExistingFile);
  auto* r_format_opt = ret->add_option("--format", r_format, "Result format")
                           ->check(CLI::IsMember({"lines", "json"}));
  ret->callback([&] {
    action = [&] {
      const auto index = kgpr::TripletIndex::load(r_idx);
      const auto ckpt = kgpr::load_checkpoint(r_ckpt);
      const auto result = kgpr::retrieve_topk(index, ckpt, r_question, r_k);
      std::optional<kgpr::KnowledgeGraph> g;
      if (!r_graph.empty()) {
        g = kgpr::load_graph(r_graph);
        if (g->size() != index.size()) {
          throw kgpr::Error(kgpr::ErrorKind::Mismatch, "graph and index sizes differ");
        }
      }
      const bool as_json = (r_format_opt->count() > 0 && r_format == "json") ||
                           (r_format_opt->count() == 0 && common.format == "json");
      if (as_json) {
        ordered_json j;
        j["question"] = r_question;
        j["k"] = r_k;
        j["checkpoint_fingerprint"] = kgpr::hex64(ckpt.fingerprint);
        j["results"] = ordered_json::array();
        for (const auto& e : result.entries) {
          ordered_json row{{"id", e.id}, {"score", e.score}};
          if (g) row["triplet"] = kgpr::serialize_triplet((*g)[e.id]);
          j["results"].push_back(row);
        }
        std::cout << j.dump(2) << "\n";
      } else if (g) {
        std::cout << kgpr::render_subgraph(kgpr::assemble_subgraph(*g, result));
      } else {
        for (const auto& e : result.entries) std::cout << e.id << '\t' << e.score << '\n';
      }
    };
  });

  // eval / k-sweep ---------------------------------------------------------
  std::string e_idx, e_ckpt, e_graph, e_heldout, e_k = "1,2,5,10,20,40", e_out, e_csv;
  auto add_eval_options = [&](CLI::App* sub) {
    sub->add_option("--idx", e_idx, "Index file")->required()->check(CLI::ExistingFile);
    sub->add_option("--ckpt", e_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--graph", e_graph, "Triples TSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--heldout", e_heldout, "Held-out JSONL")->required()->check(CLI::ExistingFile);
    return sub->add_option("--k", e_k, "Comma-separated ascending K values");
  };
  auto load_eval_inputs = [&](kgpr::RunConfig& cfg, const CLI::Option* k_opt) {
    if (k_opt->count() > 0) cfg.eval.k_list = parse_k_list(e_k);
    finalize(cfg);
    auto g = kgpr::load_graph(e_graph);
    auto heldout = kgpr::read_dataset(e_heldout);
    auto index = kgpr::TripletIndex::load(e_idx);
    auto ckpt = kgpr::load_checkpoint(e_ckpt);
    if (index.checkpoint_fingerprint() != ckpt.fingerprint) {
      throw kgpr::Error(kgpr::ErrorKind::Mismatch, "index was built from a different checkpoint");
    }
    return std::tuple{std::move(g), std::move(heldout), std::move(index), std::move(ckpt)};
  };

  auto* ev = app.add_subcommand("eval", "Held-out retrieval metrics");
  auto* ev_k_opt = add_eval_options(ev);
  ev->add_option("--out", e_out, "Report JSON")->required();
  ev->add_option("--csv", e_csv, "K-sweep CSV (default <out>.csv)");
  ev->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      auto [g, heldout, index, ckpt] = load_eval_inputs(cfg, ev_k_opt);
      const auto report = kgpr::evaluate(index, ckpt.towers.query, g, heldout, cfg.eval.k_list, cfg.jobs);
      ordered_json j;
      if (ckpt.metadata.is_object()) {
        for (const char* key : {"seed", "config_hash"}) {
          if (ckpt.metadata.contains(key)) j[key] = ckpt.metadata[key];
        }
      }
      j["checkpoint_fingerprint"] = kgpr::hex64(ckpt.fingerprint);
      j["k_list"] = cfg.eval.k_list;
      j["report"] = kgpr::to_json(report);
      kgpr::write_text_file(e_out, j.dump(2) + "\n");
      std::vector<kgpr::KSweepRow> rows;
      for (auto k : cfg.eval.k_list) {
        rows.push_back({k, report.recall_at_k.at(k), report.neighbor_recall_at_k.at(k)});
      }
      const std::string csv = e_csv.empty() ? e_out + ".csv" : e_csv;
      kgpr::write_text_file(csv, kgpr::k_sweep_csv(rows));
      write_sidecar(csv, {{"seed", j.value("seed", ordered_json())},
                          {"config_hash", j.value("config_hash", ordered_json())},
                          {"checkpoint_fingerprint", j["checkpoint_fingerprint"]}});
      std::ostringstream text;
      text << "questions " << report.questions << ", MRR " << report.mrr << "\n";
      for (const auto& row : rows) {
        text << "recall@" << row.k << " " << row.recall << "  neighbor_recall@" << row.k << " "
             << row.neighbor_recall << "\n";
      }
      emit(common, j, text.str());
    };
  });

  auto* ks = app.add_subcommand("k-sweep", "Recall and neighbor recall per K as CSV");
  auto* ks_k_opt = add_eval_options(ks);
  std::string ks_out;
  ks->add_option("--out", ks_out, "Output CSV (stdout if omitted)");
  ks->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      auto [g, heldout, index, ckpt] = load_eval_inputs(cfg, ks_k_opt);
      const auto rows = kgpr::k_sweep(index, ckpt.towers.query, g, heldout, cfg.eval.k_list, cfg.jobs);
      const auto csv = kgpr::k_sweep_csv(rows);
      if (!ks_out.empty()) {
        kgpr::write_text_file(ks_out, csv);
        ordered_json meta{{"checkpoint_fingerprint", kgpr::hex64(ckpt.fingerprint)}};
        for (const char* key : {"seed", "config_hash"}) {
          if (ckpt.metadata.is_object() && ckpt.metadata.contains(key)) meta[key] = ckpt.metadata[key];
        }
        write_sidecar(ks_out, meta);
      }
      if (common.format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows) j.push_back({{"k", r.k}, {"recall", r.recall}, {"neighbor_recall", r.neighbor_recall}});
        std::cout << j.dump(2) << "\n";
      } else if (ks_out.empty()) {
        std::cout << csv;
      }
    };
  });

  // pipeline ---------------------------------------------------------------
  auto* pipe = app.add_subcommand("pipeline", "synth-graph -> build-dataset -> split -> train -> index -> eval");
  std::uint64_t p_seed = 0;
  std::string p_out;
  std::size_t p_epochs = 0, p_batch = 0, p_dim = 0;
  auto* p_seed_opt = pipe->add_option("--seed", p_seed, "Seed");
  pipe->add_option("--out", p_out, "Output directory")->required();
  auto* p_epochs_opt = pipe->add_option("--epochs", p_epochs, "Epochs");
  auto* p_batch_opt = pipe->add_option("--batch", p_batch, "Batch size");
  auto* p_dim_opt = pipe->add_option("--dim", p_dim, "Embedding dimension");
  pipe->callback([&] {
    action = [&] {
      auto cfg = base_config(common);
      override_with(p_seed_opt, p_seed, cfg.seed);
      override_with(p_epochs_opt, p_epochs, cfg.train.epochs);
      override_with(p_batch_opt, p_batch, cfg.train.batch_size);
      override_with(p_dim_opt, p_dim, cfg.encoder.dim);
      finalize(cfg);
      const auto started = std::chrono::system_clock::now();
      const auto result = kgpr::run_pipeline(cfg, p_out);
      const auto seconds = std::chrono::duration<double>(std::chrono::system_clock::now() - started).count();
      ordered_json meta = stamp(cfg);
      meta["started_unix"] = std::chrono::duration_cast<std::chrono::seconds>(started.time_since_epoch()).count();
      meta["wall_seconds"] = seconds;
      kgpr::write_text_file(fs::path(p_out) / "run_meta.json", meta.dump(2) + "\n");
      const auto& tr = result.trained_report;
      const auto& un = result.untrained_report;
      std::ostringstream text;
      text << "wrote " << (fs::path(p_out) / "report.json").string() << "\n";
      for (auto k : cfg.eval.k_list) {
        text << "recall@" << k << " trained " << tr.recall_at_k.at(k) << " untrained "
             << un.recall_at_k.at(k) << "\n";
      }
      text << "MRR trained " << tr.mrr << " untrained " << un.mrr << "\n";
      emit(common, result.report, text.str());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const kgpr::Error& e) {
    std::cerr << "error [" << kgpr::to_string(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
