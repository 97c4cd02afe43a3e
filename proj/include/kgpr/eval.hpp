#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgpr/augment.hpp"
#include "kgpr/encoder.hpp"
#include "kgpr/error.hpp"
#include "kgpr/graph.hpp"
#include "kgpr/retrieval.hpp"
#include "kgpr/rng.hpp"

namespace kgpr {

inline const std::vector<std::size_t> kDefaultKList{1, 2, 5, 10, 20, 40};

struct OrderingStats {
  double mean_cos_positive = 0.0;
  double mean_cos_neighbor = 0.0;
  double mean_cos_negative = 0.0;
};

struct EvalReport {
  std::size_t questions = 0;
  std::size_t examples = 0;
  std::map<std::size_t, double> recall_at_k;
  std::map<std::size_t, double> neighbor_recall_at_k;
  double mrr = 0.0;
  OrderingStats ordering;
};

struct SplitResult {
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> heldout;
};

/// Splits by source triplet: all examples of one source triplet land on the
/// same side. round(fraction * groups) groups are held out.
inline SplitResult split_dataset(std::span<const TrainingExample> examples, double holdout_fraction,
                                 Rng& rng) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw Error(ErrorKind::Config, "holdout fraction must lie in (0, 1)");
  }
  if (examples.size() < 2) throw Error(ErrorKind::Empty, "need at least 2 examples to split");
  std::set<TripletId> group_set;
  for (const auto& ex : examples) group_set.insert(ex.question.source_triplet_id);
  std::vector<TripletId> groups(group_set.begin(), group_set.end());
  rng.shuffle(std::span<TripletId>(groups));
  const auto held = static_cast<std::size_t>(
      std::llround(holdout_fraction * static_cast<double>(groups.size())));
  if (held == 0 || held == groups.size()) {
    throw Error(ErrorKind::Empty, "split of " + std::to_string(groups.size()) +
                                      " source triplets leaves one side empty");
  }
  const std::set<TripletId> heldout_ids(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(held));
  SplitResult out;
  for (const auto& ex : examples) {
    (heldout_ids.count(ex.question.source_triplet_id) ? out.heldout : out.train).push_back(ex);
  }
  return out;
}

namespace detail {

inline void check_k_list(std::span<const std::size_t> k_list) {
  if (k_list.empty()) throw Error(ErrorKind::Config, "k list is empty");
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (k_list[i] == 0) throw Error(ErrorKind::Config, "K must be >= 1");
    if (i > 0 && k_list[i] <= k_list[i - 1]) {
      throw Error(ErrorKind::Config, "k list must be strictly ascending");
    }
  }
}

struct QuestionOutcome {
  std::size_t rank = 0;  // 1-based; 0 when the source is not retrievable
  std::vector<double> neighbor_fraction;  // per K
};

inline QuestionOutcome evaluate_question(const TripletIndex& index, const Tower& query_tower,
                                         const KnowledgeGraph& graph, const SyntheticQuestion& q,
                                         std::span<const std::size_t> k_list) {
  auto scored = score_all(index, encode_question(query_tower, q.text));
  std::sort(scored.begin(), scored.end(), ranks_before);
  QuestionOutcome out;
  const Triplet& source = graph.at(q.source_triplet_id);
  std::size_t related = 0;
  std::size_t next_k = 0;
  for (std::size_t pos = 0; pos < scored.size() && next_k < k_list.size(); ++pos) {
    const auto id = scored[pos].id;
    if (id == source.id) out.rank = pos + 1;
    if (graph[id].shares_entity(source)) ++related;
    while (next_k < k_list.size() && (pos + 1 == k_list[next_k] || pos + 1 == scored.size())) {
      out.neighbor_fraction.push_back(static_cast<double>(related) / static_cast<double>(pos + 1));
      ++next_k;
    }
  }
  if (out.rank == 0) {
    for (std::size_t pos = 0; pos < scored.size(); ++pos) {
      if (scored[pos].id == source.id) {
        out.rank = pos + 1;
        break;
      }
    }
  }
  return out;
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Distinct held-out questions, keyed by (source triplet, slot, text), in
/// first-occurrence order.
inline std::vector<SyntheticQuestion> distinct_questions(std::span<const TrainingExample> examples) {
  std::set<std::tuple<TripletId, MaskSlot, std::string>> seen;
  std::vector<SyntheticQuestion> out;
  for (const auto& ex : examples) {
    const auto& q = ex.question;
    if (seen.emplace(q.source_triplet_id, q.masked_slot, q.text).second) out.push_back(q);
  }
  return out;
}

/// Retrieval metrics over distinct held-out questions, plus mean cosines of
/// each example's exact, neighbor and negative triplet to its question.
/// Recall@K counts the question's source triplet in the top K; MRR uses its
/// rank in the full ordering and scores 0 when the source is unretrievable.
inline EvalReport evaluate(const TripletIndex& index, const Tower& query_tower,
                           const KnowledgeGraph& graph, std::span<const TrainingExample> heldout,
                           std::span<const std::size_t> k_list, std::size_t jobs = 1) {
  detail::check_k_list(k_list);
  if (heldout.empty()) throw Error(ErrorKind::Empty, "held-out set is empty");
  if (index.size() != graph.size()) {
    throw Error(ErrorKind::Mismatch, "index has " + std::to_string(index.size()) +
                                         " rows but graph has " + std::to_string(graph.size()) +
                                         " triplets");
  }
  validate_examples(graph, heldout);

  const auto questions = distinct_questions(heldout);
  std::vector<detail::QuestionOutcome> outcomes(questions.size());
  detail::parallel_for(questions.size(), jobs, [&](std::size_t i) {
    outcomes[i] = detail::evaluate_question(index, query_tower, graph, questions[i], k_list);
  });

  EvalReport r;
  r.questions = questions.size();
  r.examples = heldout.size();
  const double nq = static_cast<double>(questions.size());
  for (std::size_t j = 0; j < k_list.size(); ++j) {
    std::size_t hits = 0;
    double related = 0.0;
    for (const auto& o : outcomes) {
      if (o.rank != 0 && o.rank <= k_list[j]) ++hits;
      related += o.neighbor_fraction.at(j);
    }
    r.recall_at_k[k_list[j]] = static_cast<double>(hits) / nq;
    r.neighbor_recall_at_k[k_list[j]] = related / nq;
  }
  double rr = 0.0;
  for (const auto& o : outcomes) rr += o.rank == 0 ? 0.0 : 1.0 / static_cast<double>(o.rank);
  r.mrr = rr / nq;

  double pos = 0.0, nb = 0.0, neg = 0.0;
  std::size_t counted = 0;
  for (const auto& ex : heldout) {
    if (!index.retrievable(ex.positive_id) || !index.retrievable(ex.neighbor_id) ||
        !index.retrievable(ex.negative_id)) {
      continue;
    }
    const auto zq = encode_question(query_tower, ex.question.text);
    const double qn = l2_norm(std::span<const double>(zq));
    if (!(qn > kDegenerateNorm)) continue;
    pos += index.score(ex.positive_id, zq, qn);
    nb += index.score(ex.neighbor_id, zq, qn);
    neg += index.score(ex.negative_id, zq, qn);
    ++counted;
  }
  if (counted > 0) {
    const double c = static_cast<double>(counted);
    r.ordering = {pos / c, nb / c, neg / c};
  }
  return r;
}

struct KSweepRow {
  std::size_t k = 0;
  double recall = 0.0;
  double neighbor_recall = 0.0;
};

inline std::vector<KSweepRow> k_sweep(const TripletIndex& index, const Tower& query_tower,
                                      const KnowledgeGraph& graph,
                                      std::span<const TrainingExample> heldout,
                                      std::span<const std::size_t> k_list = kDefaultKList,
                                      std::size_t jobs = 1) {
  const auto report = evaluate(index, query_tower, graph, heldout, k_list, jobs);
  std::vector<KSweepRow> rows;
  for (auto k : k_list) rows.push_back({k, report.recall_at_k.at(k), report.neighbor_recall_at_k.at(k)});
  return rows;
}

inline std::string k_sweep_csv(std::span<const KSweepRow> rows) {
  std::string out = "k,recall,neighbor_recall\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.k, r.recall, r.neighbor_recall);
    out += buf;
  }
  return out;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["questions"] = r.questions;
  j["examples"] = r.examples;
  auto& recall = j["recall_at_k"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.recall_at_k) recall[std::to_string(k)] = v;
  auto& nrecall = j["neighbor_recall_at_k"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.neighbor_recall_at_k) nrecall[std::to_string(k)] = v;
  j["mrr"] = r.mrr;
  j["ordering_stats"] = {{"mean_cos_positive", r.ordering.mean_cos_positive},
                         {"mean_cos_neighbor", r.ordering.mean_cos_neighbor},
                         {"mean_cos_negative", r.ordering.mean_cos_negative}};
  j["qa_metrics"] =
      "not computed; retrieval-level recall, MRR and ordering statistics stand in for "
      "answer-level QA accuracy";
  return j;
}

}  // namespace kgpr
