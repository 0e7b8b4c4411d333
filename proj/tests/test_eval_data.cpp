#include <gtest/gtest.h>

#include <fstream>

#include "phenosample/error.hpp"
#include "phenosample/eval/data.hpp"
#include "phenosample/eval/folds.hpp"
#include "support/oracles.hpp"

namespace ps = phenosample;
namespace ev = phenosample::eval;

TEST(TaskSpec, DefaultsAndCompatibility) {
  const auto c = ev::TaskSpec::defaults(ev::TaskKind::classification, 3);
  EXPECT_EQ(c.loss, ev::LossKind::cross_entropy);
  EXPECT_EQ(c.primary_metric(), ev::Metric::macro_f1);
  EXPECT_EQ(ev::TaskSpec::defaults(ev::TaskKind::multilabel, 5).primary_metric(), ev::Metric::micro_map);
  EXPECT_EQ(ev::TaskSpec::defaults(ev::TaskKind::regression, 1).loss, ev::LossKind::mse);
  EXPECT_EQ(ev::TaskSpec::defaults(ev::TaskKind::distribution, 8).loss, ev::LossKind::kl);
  EXPECT_EQ(ev::TaskSpec::defaults(ev::TaskKind::distribution, 8).primary_metric(), ev::Metric::r2);

  ev::TaskSpec bad = c;
  bad.loss = ev::LossKind::mse;
  EXPECT_THROW(bad.validate(), ps::ConfigError);
  ev::TaskSpec bce = ev::TaskSpec::defaults(ev::TaskKind::multilabel, 4);
  bce.loss = ev::LossKind::presence_weighted_bce;
  EXPECT_NO_THROW(bce.validate());
  EXPECT_EQ(bce.pos_weight, 12.0);
  bce.pos_weight = 0.0;
  EXPECT_THROW(bce.validate(), ps::ConfigError);
  EXPECT_THROW(ev::parse_task_kind("ranking"), ps::ConfigError);
}

TEST(Embeddings, CsvAndBinaryRoundTrip) {
  oracle::TempDir dir("emb");
  ev::EmbeddingTable t;
  t.ids = {4, 2, 9};
  t.values = ev::Matrix(3, 2);
  t.values.data = {0.5, -1.25, 3.0, 4.0, 0.125, 2.0};
  ev::write_embeddings(t, dir / "e.json");
  EXPECT_EQ(ev::read_embeddings(dir / "e.json").ids, t.ids);
  EXPECT_EQ(ev::read_embeddings(dir / "e.json").values, t.values);

  std::ofstream(dir / "e.csv") << "id,a,b\n4,0.5,-1.25\n2,3,4\n9,0.125,2\n";
  const auto csv = ev::read_embeddings(dir / "e.csv");
  EXPECT_EQ(csv.ids, t.ids);
  EXPECT_EQ(csv.values, t.values);
  std::ofstream(dir / "ragged.csv") << "1,0.5,2\n2,3\n";
  EXPECT_THROW(ev::read_embeddings(dir / "ragged.csv"), ps::DecodeError);
  std::ofstream(dir / "nan.csv") << "1,nan,2\n";
  EXPECT_THROW(ev::read_embeddings(dir / "nan.csv"), ps::Error);
}

TEST(Labels, AlignedToIdsAndValidated) {
  oracle::TempDir dir("labels");
  std::ofstream(dir / "l.jsonl") << R"({"id": 2, "y": 1})" << "\n" << R"({"id": 4, "y": 0})" << "\n";
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 2);
  const std::vector<std::int64_t> ids{4, 2};
  const auto y = ev::read_labels(dir / "l.jsonl", task, ids);
  EXPECT_EQ(y.data, (std::vector<double>{1, 0, 0, 1}));
  const std::vector<std::int64_t> missing{4, 7};
  EXPECT_THROW(ev::read_labels(dir / "l.jsonl", task, missing), ps::Error);

  std::ofstream(dir / "d.jsonl") << R"({"id": 1, "y": [0.5, 0.6]})" << "\n";
  const std::vector<std::int64_t> one{1};
  EXPECT_THROW(ev::read_labels(dir / "d.jsonl", ev::TaskSpec::defaults(ev::TaskKind::distribution, 2), one),
               ps::Error);
  std::ofstream(dir / "c.jsonl") << R"({"id": 1, "y": 5})" << "\n";
  EXPECT_THROW(ev::read_labels(dir / "c.jsonl", task, one), ps::Error);
}

TEST(Folds, HundredSamplesTenFolds) {
  const auto plan = ev::make_folds(100, {10, 0.9, 1});
  ASSERT_EQ(plan.folds.size(), 10u);
  for (const auto& f : plan.folds) {
    EXPECT_EQ(f.test.size(), 10u);
    EXPECT_EQ(f.train.size(), 81u);
    EXPECT_EQ(f.val.size(), 9u);
  }
  EXPECT_NO_THROW(plan.validate());
}

TEST(Folds, PartitionAndDeterminism) {
  for (const std::size_t n : {10u, 37u, 101u}) {
    const auto plan = ev::make_folds(n, {10, 0.9, 5});
    std::vector<int> seen(n, 0);
    for (const auto& f : plan.folds) {
      for (const auto i : f.test) ++seen[i];
      std::vector<int> in(n, 0);
      for (const auto* part : {&f.train, &f.val, &f.test})
        for (const auto i : *part) ++in[i];
      for (const int c : in) EXPECT_EQ(c, 1);
      EXPECT_TRUE(std::is_sorted(f.test.begin(), f.test.end()));
    }
    for (const int c : seen) EXPECT_EQ(c, 1);
    const auto again = ev::make_folds(n, {10, 0.9, 5});
    for (std::size_t k = 0; k < plan.folds.size(); ++k) EXPECT_EQ(plan.folds[k].train, again.folds[k].train);
  }
  EXPECT_NE(ev::make_folds(50, {10, 0.9, 1}).folds[0].test, ev::make_folds(50, {10, 0.9, 2}).folds[0].test);
  EXPECT_THROW(ev::make_folds(5, {10, 0.9, 0}), ps::Error);
}
