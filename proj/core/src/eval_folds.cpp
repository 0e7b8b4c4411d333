#include <algorithm>
#include <cmath>
#include <numeric>

#include "phenosample/error.hpp"
#include "phenosample/eval/folds.hpp"
#include "phenosample/rng.hpp"

namespace phenosample::eval {
namespace {

void shuffle(std::vector<std::size_t>& v, Pcg64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

FoldPlan make_folds(std::size_t n, const FoldParams& params) {
  if (params.k_folds < 1) throw ConfigError("k_folds must be at least 1");
  if (!(params.train_fraction > 0.0 && params.train_fraction <= 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1]");
  }
  if (n < params.k_folds) {
    throw Error("make_folds: " + std::to_string(n) + " samples cannot fill " + std::to_string(params.k_folds) +
                " folds");
  }
  FoldPlan plan;
  plan.params = params;
  plan.n = n;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Pcg64 rng(params.seed);
  shuffle(order, rng);

  const std::size_t k = params.k_folds;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t begin = f * n / k;
    const std::size_t end = (f + 1) * n / k;
    Fold fold;
    fold.test.assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::size_t> rest;
    rest.reserve(n - fold.test.size());
    rest.insert(rest.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(begin));
    rest.insert(rest.end(), order.begin() + static_cast<std::ptrdiff_t>(end), order.end());
    Pcg64 split_rng(derive_seed(params.seed, f + 1));
    shuffle(rest, split_rng);
    const auto n_train =
        static_cast<std::size_t>(std::llround(params.train_fraction * static_cast<double>(rest.size())));
    fold.train.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
    fold.val.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());
    std::sort(fold.test.begin(), fold.test.end());
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.val.begin(), fold.val.end());
    plan.folds.push_back(std::move(fold));
  }
  plan.validate();
  return plan;
}

void FoldPlan::validate() const {
  std::vector<int> test_hits(n, 0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> seen(n, 0);
    for (const auto* part : {&folds[f].train, &folds[f].val, &folds[f].test}) {
      for (const std::size_t i : *part) {
        if (i >= n) throw ValidationError("fold index", "index " + std::to_string(i) + " >= n");
        ++seen[i];
      }
    }
    for (const std::size_t i : folds[f].test) ++test_hits[i];
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
      throw ValidationError("fold partition", "fold " + std::to_string(f) + " train/val/test do not partition the ids");
    }
  }
  if (std::any_of(test_hits.begin(), test_hits.end(), [](int c) { return c != 1; })) {
    throw ValidationError("test partition", "test folds do not partition the ids");
  }
}

}  // namespace phenosample::eval
