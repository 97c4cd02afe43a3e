#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "kgpr/augment.hpp"
#include "test_util.hpp"

namespace kgpr {
namespace {

using test::data_path;

const Triplet kAdhd{0, "Attention deficit hyperactivity disorder", "treatments", "Modafinil"};

TEST(MaskTripletTest, Rendering) {
  EXPECT_EQ(mask_triplet(kAdhd, MaskSlot::Tail).render(),
            "Attention deficit hyperactivity disorder | treatments | [MASK]");
  EXPECT_EQ(mask_triplet(Triplet{0, "a", "r", "b"}, MaskSlot::Head).render(), "[MASK] | r | b");
  EXPECT_EQ(mask_triplet(kAdhd, MaskSlot::Head).masked_slot, MaskSlot::Head);
  EXPECT_EQ(mask_triplet(kAdhd, MaskSlot::Tail).masked_slot, MaskSlot::Tail);
}

TEST(RelationWordsTest, CollapsesRunsAndTrims) {
  EXPECT_EQ(relation_words("countries_spoken_in"), "countries spoken in");
  EXPECT_EQ(relation_words("__a--b__"), "a b");
  EXPECT_EQ(relation_words("/people/person/nationality"), "people person nationality");
}

TEST(TemplateGeneratorTest, TailAndHeadQuestions) {
  TemplateQuestionGenerator gen;
  const auto tail = generate_question(gen, mask_triplet(kAdhd, MaskSlot::Tail));
  EXPECT_EQ(tail.text, "What is the treatments of Attention deficit hyperactivity disorder?");
  EXPECT_EQ(tail.source_triplet_id, 0u);
  EXPECT_EQ(tail.masked_slot, MaskSlot::Tail);
  EXPECT_EQ(tail.generator, GeneratorKind::Template);
  EXPECT_EQ(generate_question(gen, mask_triplet(kAdhd, MaskSlot::Head)).text,
            "What has treatments Modafinil?");
  const Triplet jam{3, "Jamaican English", "countries_spoken_in", "Jamaica"};
  EXPECT_EQ(generate_question(gen, mask_triplet(jam, MaskSlot::Tail)).text,
            "What is the countries spoken in of Jamaican English?");
}

void expect_overlap_rules(const KnowledgeGraph& g, const std::vector<TrainingExample>& examples) {
  for (const auto& ex : examples) {
    const auto& pos = g[ex.positive_id];
    ASSERT_EQ(ex.question.source_triplet_id, ex.positive_id);
    ASSERT_NE(ex.neighbor_id, ex.positive_id);
    ASSERT_NE(ex.negative_id, ex.positive_id);
    ASSERT_NE(ex.neighbor_id, ex.negative_id);
    ASSERT_TRUE(g[ex.neighbor_id].shares_entity(pos));
    ASSERT_FALSE(g[ex.negative_id].shares_entity(pos));
  }
}

TEST(BuildDatasetTest, TwoQuestionsPerTriplet) {
  const auto g = load_graph(data_path("adhd.tsv"));
  TemplateQuestionGenerator gen;
  Rng rng(42);
  DatasetConfig cfg;
  cfg.triplet_cap = 1;
  const auto ds = build_dataset(g, gen, cfg, rng);
  ASSERT_EQ(ds.examples.size(), 2u);
  EXPECT_EQ(ds.examples[0].question.masked_slot, MaskSlot::Head);
  EXPECT_EQ(ds.examples[1].question.masked_slot, MaskSlot::Tail);
  expect_overlap_rules(g, ds.examples);
  for (const auto& ex : ds.examples) {
    EXPECT_TRUE(ex.neighbor_id == 1u || ex.neighbor_id == 2u);
    EXPECT_TRUE(ex.negative_id == 3u || ex.negative_id == 4u);
  }
}

TEST(BuildDatasetTest, SingleTripletIsSkipped) {
  const auto g = KnowledgeGraph::from_tuples({{"a", "r", "b"}});
  TemplateQuestionGenerator gen;
  Rng rng(1);
  try {
    build_dataset(g, gen, {}, rng);
    FAIL() << "all-skipped dataset must be an error";
  } catch (const EmptyDatasetError& e) {
    EXPECT_EQ(e.skipped().no_neighbor, 1u);
    EXPECT_EQ(e.skipped().no_negative, 0u);
  }
}

TEST(BuildDatasetTest, HubGraphSkipsForMissingNegatives) {
  const auto g = KnowledgeGraph::from_tuples({{"hub", "r", "a"}, {"b", "r", "hub"}, {"hub", "s", "c"}});
  TemplateQuestionGenerator gen;
  Rng rng(1);
  try {
    build_dataset(g, gen, {}, rng);
    FAIL();
  } catch (const EmptyDatasetError& e) {
    EXPECT_EQ(e.skipped().no_neighbor, 0u);
    EXPECT_EQ(e.skipped().no_negative, 6u);
  }
}

KnowledgeGraph desk_graph() {
  Rng rng(stage_seed(42, Stage::Graph));
  return generate_synthetic_graph(200, 20, 1000, rng);
}

TEST(BuildDatasetTest, DeskFixtureCountMatchesEnumeration) {
  const auto g = desk_graph();
  // Oracle: triplets with a neighbor and at least one entity-disjoint triplet.
  std::size_t eligible = 0;
  for (const auto& t : g.triplets()) {
    bool nb = false, neg = false;
    for (const auto& u : g.triplets()) {
      if (u.id == t.id) continue;
      (u.shares_entity(t) ? nb : neg) = true;
    }
    eligible += (nb && neg) ? 1 : 0;
  }
  TemplateQuestionGenerator gen;
  Rng rng(stage_seed(42, Stage::Dataset));
  const auto ds = build_dataset(g, gen, {}, rng);
  EXPECT_EQ(ds.examples.size(), 2 * eligible);
  EXPECT_EQ(ds.examples.size(), 2000u);  // pinned
  EXPECT_EQ(ds.skipped.total(), 0u);
  expect_overlap_rules(g, ds.examples);
}

TEST(BuildDatasetTest, ReproducibleAndBounded) {
  const auto g = desk_graph();
  TemplateQuestionGenerator gen;
  DatasetConfig cfg;
  cfg.neighbors_per_question = 3;
  cfg.negatives_per_question = 2;
  cfg.triplet_cap = 120;
  Rng a(5), b(5);
  const auto da = build_dataset(g, gen, cfg, a);
  const auto db = build_dataset(g, gen, cfg, b);
  EXPECT_EQ(da.examples, db.examples);
  EXPECT_LE(da.examples.size(), cfg.mask_slots.size() * 3 * 2 * 120);
  EXPECT_EQ(da.examples.size(), cfg.mask_slots.size() * 3 * 2 * 120);
  expect_overlap_rules(g, da.examples);
  // Neighbors of one question are drawn without replacement.
  for (std::size_t i = 0; i < da.examples.size(); i += 6) {
    std::set<TripletId> nbs;
    for (std::size_t j = i; j < i + 6; ++j) nbs.insert(da.examples[j].neighbor_id);
    EXPECT_EQ(nbs.size(), 3u);
  }
}

TEST(BuildDatasetTest, NeighborDrawsCappedByPoolSize) {
  const auto g = test::chain_graph();
  TemplateQuestionGenerator gen;
  DatasetConfig cfg;
  cfg.neighbors_per_question = 5;
  cfg.mask_slots = {MaskSlot::Tail};
  Rng rng(2);
  const auto ds = build_dataset(g, gen, cfg, rng);
  // Ends of the chain have 1 neighbor, the middle three have 2.
  EXPECT_EQ(ds.examples.size(), 1u + 2 + 2 + 2 + 1);
  expect_overlap_rules(g, ds.examples);
}

class FailingGenerator final : public QuestionGenerator {
 public:
  GeneratorKind kind() const noexcept override { return GeneratorKind::ExternalLlm; }
  std::vector<SyntheticQuestion> generate(std::span<const MaskedTriplet>) override {
    throw Error(ErrorKind::Generator, "endpoint down");
  }
};

TEST(BuildDatasetTest, GeneratorErrorsPropagate) {
  const auto g = load_graph(data_path("adhd.tsv"));
  FailingGenerator gen;
  Rng rng(1);
  EXPECT_THROW(build_dataset(g, gen, {}, rng), Error);
}

TEST(DatasetIoTest, RoundTrip) {
  test::TempDir dir;
  const auto g = desk_graph();
  TemplateQuestionGenerator gen;
  Rng rng(3);
  DatasetConfig cfg;
  cfg.triplet_cap = 50;
  const auto ds = build_dataset(g, gen, cfg, rng);
  write_dataset(ds.examples, dir / "d.jsonl");
  EXPECT_EQ(read_dataset(dir / "d.jsonl"), ds.examples);
}

TEST(DatasetIoTest, EmptyListIsEmptyFile) {
  test::TempDir dir;
  write_dataset({}, dir / "e.jsonl");
  EXPECT_EQ(std::filesystem::file_size(dir / "e.jsonl"), 0u);
  EXPECT_TRUE(read_dataset(dir / "e.jsonl").empty());
}

TEST(DatasetIoTest, WireFormat) {
  const TrainingExample ex{{"What has treatments Modafinil?", 0, MaskSlot::Head, GeneratorKind::Template}, 0, 2, 3};
  EXPECT_EQ(to_json(ex).dump(),
            R"({"question":"What has treatments Modafinil?","source_triplet_id":0,"masked_slot":"head",)"
            R"("generator":"template","positive_id":0,"neighbor_id":2,"negative_id":3})");
}

TEST(DatasetIoTest, MissingFieldReportsLine) {
  test::TempDir dir;
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"question":"q","source_triplet_id":0,"masked_slot":"head","generator":"template","positive_id":0,"neighbor_id":1,"negative_id":2})"
        << "\n"
        << R"({"question":"q","source_triplet_id":0,"masked_slot":"head","generator":"template","positive_id":0,"neighbor_id":1})"
        << "\n";
  }
  try {
    read_dataset(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Schema);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("negative_id"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  }
}

TEST(DatasetIoTest, TypeAndValueViolations) {
  test::TempDir dir;
  auto expect_schema_error = [&](const std::string& line) {
    {
      std::ofstream out(dir / "x.jsonl");
      out << line << "\n";
    }
    EXPECT_THROW(read_dataset(dir / "x.jsonl"), Error) << line;
  };
  expect_schema_error(R"({"question":"q","source_triplet_id":-1,"masked_slot":"head","generator":"template","positive_id":0,"neighbor_id":1,"negative_id":2})");
  expect_schema_error(R"({"question":"q","source_triplet_id":0,"masked_slot":"middle","generator":"template","positive_id":0,"neighbor_id":1,"negative_id":2})");
  expect_schema_error(R"({"question":"","source_triplet_id":0,"masked_slot":"head","generator":"template","positive_id":0,"neighbor_id":1,"negative_id":2})");
  expect_schema_error(R"({"question":"q","source_triplet_id":"0","masked_slot":"head","generator":"template","positive_id":0,"neighbor_id":1,"negative_id":2})");
  expect_schema_error("not json");
}

TEST(ValidateExamplesTest, CatchesBrokenInvariants) {
  const auto g = load_graph(data_path("adhd.tsv"));
  const SyntheticQuestion q{"q", 0, MaskSlot::Tail, GeneratorKind::Template};
  EXPECT_NO_THROW(validate_examples(g, std::vector<TrainingExample>{{q, 0, 2, 3}}));
  EXPECT_THROW(validate_examples(g, std::vector<TrainingExample>{{q, 0, 3, 4}}), Error);
  EXPECT_THROW(validate_examples(g, std::vector<TrainingExample>{{q, 0, 2, 1}}), Error);
  EXPECT_THROW(validate_examples(g, std::vector<TrainingExample>{{q, 0, 2, 99}}), Error);
}

}  // namespace
}  // namespace kgpr
