#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "phenosample/error.hpp"
#include "phenosample/eval/metrics.hpp"
#include "phenosample/rng.hpp"
#include "support/oracles.hpp"

namespace ps = phenosample;
namespace ev = phenosample::eval;

namespace {

ev::Matrix matrix(std::size_t r, std::size_t c, std::vector<double> v) {
  ev::Matrix m(r, c);
  m.data = std::move(v);
  return m;
}

}  // namespace

TEST(AveragePrecision, ReferenceExample) {
  const std::vector<double> s{0.9, 0.8, 0.7}, y{1, 0, 1};
  EXPECT_NEAR(*ev::average_precision(s, y), 5.0 / 6.0, 1e-15);
  const std::vector<double> none{0, 0, 0};
  EXPECT_FALSE(ev::average_precision(s, none).has_value());
}

TEST(AveragePrecision, ExhaustiveAgainstDefinitionUpToTwelve) {
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = static_cast<double>(n - i);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<double> y(n);
      std::vector<int> yi(n);
      for (std::size_t i = 0; i < n; ++i) yi[i] = static_cast<int>(y[i] = (mask >> i) & 1u);
      const auto got = ev::average_precision(scores, y);
      const auto want = oracle::average_precision_by_definition(scores, yi);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (got) {
        ASSERT_NEAR(*got, *want, 1e-12) << "n=" << n << " mask=" << mask;
      }
    }
  }
}

TEST(AveragePrecision, TiesKeepInputOrder) {
  const std::vector<double> s{0.5, 0.5, 0.5}, y{0, 0, 1};
  EXPECT_NEAR(*ev::average_precision(s, y), 1.0 / 3.0, 1e-15);
  const std::vector<double> y2{1, 0, 0};
  EXPECT_NEAR(*ev::average_precision(s, y2), 1.0, 1e-15);
}

TEST(Auroc, MidRanksAndDegenerateCases) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8}, y{0, 0, 1, 1};
  EXPECT_NEAR(*ev::auroc(s, y), 0.75, 1e-15);
  const std::vector<double> tie{0.5, 0.5}, y2{0, 1};
  EXPECT_NEAR(*ev::auroc(tie, y2), 0.5, 1e-15);
  const std::vector<double> one{1, 1};
  EXPECT_FALSE(ev::auroc(tie, one).has_value());
}

TEST(Regression, HandComputedValues) {
  const std::vector<double> truth{0, 1}, pred{1, 0};
  EXPECT_DOUBLE_EQ(*ev::r2_score(truth, pred), -3.0);
  EXPECT_DOUBLE_EQ(*ev::r2_score(truth, truth), 1.0);
  const std::vector<double> flat{2, 2};
  EXPECT_FALSE(ev::r2_score(flat, pred).has_value());

  const auto task = ev::TaskSpec::defaults(ev::TaskKind::regression, 1);
  const auto m = ev::compute_metrics(matrix(4, 1, {1, 2, 3, 4}), matrix(4, 1, {2, 1, 4, 3}), task).values;
  EXPECT_DOUBLE_EQ(m.at(ev::Metric::mae), 1.0);
  EXPECT_DOUBLE_EQ(m.at(ev::Metric::rmse), 1.0);
  EXPECT_DOUBLE_EQ(m.at(ev::Metric::r2), 1.0 - 4.0 / 5.0);
  const auto m2 = ev::compute_metrics(matrix(3, 1, {1, 2, 6}), matrix(3, 1, {0, 2, 3}), task).values;
  EXPECT_DOUBLE_EQ(m2.at(ev::Metric::mae), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(m2.at(ev::Metric::rmse), std::sqrt(10.0 / 3.0));
}

TEST(Classification, HandComputedF1) {
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::classification, 3);
  // truth: 0 0 1 2 ; predicted: 0 1 1 1
  const auto truth = matrix(4, 3, {1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto pred = matrix(4, 3, {0.8, 0.1, 0.1, 0.2, 0.7, 0.1, 0.1, 0.8, 0.1, 0.3, 0.4, 0.3});
  const auto m = ev::compute_metrics(pred, truth, task).values;
  EXPECT_DOUBLE_EQ(m.at(ev::Metric::accuracy), 0.5);
  // Per class F1: 2/3, 1/2, 0.
  EXPECT_DOUBLE_EQ(m.at(ev::Metric::macro_f1), (2.0 / 3.0 + 0.5 + 0.0) / 3.0);
  EXPECT_DOUBLE_EQ(m.at(ev::Metric::micro_f1), 0.5);
  const auto perfect = ev::compute_metrics(truth, truth, task).values;
  EXPECT_DOUBLE_EQ(perfect.at(ev::Metric::macro_f1), 1.0);
}

TEST(Multilabel, ThresholdAndSkippedLabels) {
  const auto task = ev::TaskSpec::defaults(ev::TaskKind::multilabel, 2);
  const auto truth = matrix(3, 2, {1, 0, 0, 0, 1, 0});
  const auto scores = matrix(3, 2, {0.9, 0.2, 0.4, 0.6, 0.55, 0.1});
  const auto r = ev::compute_metrics(scores, truth, task);
  EXPECT_EQ(r.skipped.at(ev::Metric::macro_map), 1u);
  EXPECT_DOUBLE_EQ(r.values.at(ev::Metric::macro_map), 1.0);
  // Label 0: tp 2 fp 0 fn 0; label 1: fp 1.
  EXPECT_DOUBLE_EQ(r.values.at(ev::Metric::micro_f1), 4.0 / 5.0);
}

TEST(KlDivergence, Values) {
  const std::vector<double> p{1, 0}, q{0.5, 0.5};
  EXPECT_NEAR(ev::kl_divergence(p, q), std::log(2.0), 1e-15);
  EXPECT_EQ(ev::kl_divergence(q, q), 0.0);
  const std::vector<double> neg{-0.1, 1.1};
  EXPECT_THROW(ev::kl_divergence(neg, q), ps::Error);
  const std::vector<double> zero_q{0, 1};
  EXPECT_TRUE(std::isfinite(ev::kl_divergence(q, zero_q)));
  ps::Pcg64 rng(3);
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> a(5), b(5);
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      sa += (a[i] = rng.uniform());
      sb += (b[i] = rng.uniform());
    }
    for (std::size_t i = 0; i < 5; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    ASSERT_GE(ev::kl_divergence(a, b), -1e-15);
    ASSERT_EQ(ev::kl_divergence(a, a), 0.0);
  }
}

TEST(BiomasstersBins, ZeroInflatedGivesEightBins) {
  ps::Pcg64 rng(5);
  std::vector<std::vector<double>> images(40, std::vector<double>(100));
  for (auto& img : images)
    for (double& v : img) v = rng.uniform() < 0.3 ? 0.0 : 1.0 + 99.0 * rng.uniform();
  const auto b = ev::biomassters_bins(images);
  EXPECT_EQ(b.bins(), 8u);
  for (const auto& img : images) {
    const auto& d = b.distributions[static_cast<std::size_t>(&img - images.data())];
    double zeros = 0;
    for (const double v : img) zeros += v == 0.0;
    EXPECT_GE(d[0], zeros / 100.0);
    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-9);
  }
  EXPECT_EQ(b.bin_of(0.0), 0u);
}

TEST(BiomasstersBins, OneBinImageIsOneHotAndErrors) {
  std::vector<std::vector<double>> images{{0, 0, 0, 0}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
  const auto b = ev::biomassters_bins(images);
  EXPECT_EQ(b.distributions[0][0], 1.0);
  for (std::size_t i = 1; i < b.bins(); ++i) EXPECT_EQ(b.distributions[0][i], 0.0);
  images.push_back({});
  EXPECT_THROW(ev::biomassters_bins(images), ps::Error);
  EXPECT_THROW(ev::biomassters_bins({}), ps::Error);
}
