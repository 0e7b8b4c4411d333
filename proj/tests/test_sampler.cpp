#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "phenosample/error.hpp"
#include "phenosample/rng.hpp"
#include "phenosample/sampler.hpp"
#include "support/oracles.hpp"

namespace ps = phenosample;

namespace {

ps::LocationAttributes attrs(std::array<std::optional<double>, 4> ndvi, bool mountain) {
  return {1, ndvi, mountain};
}

}  // namespace

TEST(Pcg64, ReferenceStreamIsStable) {
  ps::Pcg64 a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    (void)c();
  }
  EXPECT_NE(ps::Pcg64(42)(), ps::Pcg64(43)());
  EXPECT_NE(ps::Pcg64(42, 1)(), ps::Pcg64(42, 2)());
  EXPECT_NE(ps::derive_seed(1, 0), ps::derive_seed(1, 1));
}

TEST(Pcg64, UniformAndBoundedRanges) {
  ps::Pcg64 rng(5);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = rng.bounded(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (const int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Ndvi, Formula) {
  EXPECT_DOUBLE_EQ(ps::ndvi(0.3, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(ps::ndvi(0.8, 0.2), 0.6);
  EXPECT_DOUBLE_EQ(ps::ndvi(0.0, 0.0), 0.0);
  EXPECT_THROW(ps::ndvi(-0.1, 0.2), ps::Error);
}

TEST(LocationWeight, PolicyExamples) {
  const ps::WeightPolicy p;
  EXPECT_DOUBLE_EQ(ps::location_weight(attrs({0.05, 0.05, 0.05, 0.05}, false), p).weight, 0.25);
  EXPECT_DOUBLE_EQ(ps::location_weight(attrs({0.4, 0.5, 0.3, 0.2}, true), p).weight, 2.0);
  EXPECT_DOUBLE_EQ(ps::location_weight(attrs({0.05, 0.05, 0.05, 0.05}, true), p).weight, 0.5);
  EXPECT_DOUBLE_EQ(ps::location_weight(attrs({0.05, 0.5, 0.05, 0.05}, false), p).weight, 1.0);
}

TEST(LocationWeight, MissingNdviIsVegetatedAndFlagged) {
  const auto w = ps::location_weight(attrs({}, false));
  EXPECT_DOUBLE_EQ(w.weight, 1.0);
  EXPECT_TRUE(w.ndvi_missing);
  EXPECT_FALSE(w.non_vegetated);
  const auto partial = ps::location_weight(attrs({0.05, {}, {}, 0.02}, false));
  EXPECT_TRUE(partial.non_vegetated);
  EXPECT_FALSE(partial.ndvi_missing);
}

TEST(LocationWeight, RejectsInvalidInputs) {
  EXPECT_THROW(ps::location_weight(attrs({1.5, {}, {}, {}}, false)), ps::ValidationError);
  EXPECT_THROW((ps::WeightPolicy{0.0, 0.1, 2.0}).validate(), ps::ConfigError);
  EXPECT_THROW((ps::WeightPolicy{4.0, 0.1, -2.0}).validate(), ps::ConfigError);
}

TEST(LocationWeight, Monotonicity) {
  ps::Pcg64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    std::array<std::optional<double>, 4> v{};
    for (auto& x : v)
      if (rng.uniform() < 0.8) x = rng.uniform() * 0.4 - 0.1;
    const double flat = ps::location_weight(attrs(v, false)).weight;
    EXPECT_GE(ps::location_weight(attrs(v, true)).weight, flat);
    for (std::size_t s = 0; s < 4; ++s) {
      auto lower = v;
      lower[s] = 0.0;
      EXPECT_LE(ps::location_weight(attrs(lower, false)).weight, flat);
    }
  }
}

TEST(DrawLocations, SingleWeightAndErrors) {
  ps::Pcg64 rng(1);
  const std::vector<double> one{1.0};
  for (const auto i : ps::draw_locations(one, 100, rng)) EXPECT_EQ(i, 0u);
  EXPECT_TRUE(ps::draw_locations(one, 0, rng).empty());
  const std::vector<double> bad{1.0, 0.0};
  EXPECT_THROW(ps::draw_locations(bad, 1, rng), ps::Error);
  EXPECT_THROW(ps::draw_locations({}, 1, rng), ps::Error);
}

TEST(DrawLocations, FrequencyWithinThreeSigma) {
  ps::Pcg64 rng(2024);
  const std::vector<double> w{1.0, 3.0};
  const std::size_t n = 1000000;
  std::size_t heavy = 0;
  for (const auto i : ps::draw_locations(w, n, rng)) heavy += i;
  const double sigma = std::sqrt(0.75 * 0.25 / static_cast<double>(n));
  EXPECT_LE(std::abs(static_cast<double>(heavy) / n - 0.75), 3.0 * sigma);
}

TEST(DrawLocations, ReproducibleAndScaleInvariant) {
  const std::vector<double> w{0.25, 1.0, 2.0, 0.5};
  std::vector<double> scaled;
  for (const double x : w) scaled.push_back(x * 8.0);
  ps::Pcg64 a(3), b(3), c(3);
  const auto da = ps::draw_locations(w, 5000, a);
  EXPECT_EQ(da, ps::draw_locations(w, 5000, b));
  EXPECT_EQ(da, ps::draw_locations(scaled, 5000, c));
}

TEST(DrawSeasons, DistinctAndComplete) {
  ps::Pcg64 rng(8);
  const std::vector<int> all{0, 1, 2, 3};
  for (int t = 0; t < 100000; ++t) {
    const std::size_t m = 1 + t % 4;
    const auto got = ps::draw_seasons(all, m, rng);
    ASSERT_EQ(got.size(), m);
    ASSERT_EQ(std::set<int>(got.begin(), got.end()).size(), m);
  }
  auto perm = ps::draw_seasons(all, 4, rng);
  std::sort(perm.begin(), perm.end());
  EXPECT_EQ(perm, all);
  EXPECT_THROW(ps::draw_seasons(all, 5, rng), ps::Error);
  const std::vector<int> dup{1, 1, 2};
  EXPECT_THROW(ps::draw_seasons(dup, 2, rng), ps::Error);
}

TEST(DrawSeasons, OrderedPairsAreUniform) {
  ps::Pcg64 rng(99);
  const std::vector<int> all{0, 1, 2, 3};
  std::map<std::pair<int, int>, int> counts;
  const int trials = 120000;
  for (int t = 0; t < trials; ++t) {
    const auto d = ps::draw_seasons(all, 2, rng);
    ++counts[{d[0], d[1]}];
  }
  ASSERT_EQ(counts.size(), 12u);
  for (const auto& [k, c] : counts) EXPECT_NEAR(c, trials / 12, 400);
}

TEST(WeightFiles, RoundTrip) {
  oracle::TempDir dir("weights");
  const std::vector<ps::LocationWeight> w{{1, 0.5, true, true, false}, {3, 1.0, false, false, true}};
  ps::write_weights(w, dir / "w.jsonl");
  EXPECT_EQ(ps::read_weights(dir / "w.jsonl"), w);
}
