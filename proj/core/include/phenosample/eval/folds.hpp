#pragma once

#include <cstdint>
#include <vector>

namespace phenosample::eval {

struct FoldParams {
  std::size_t k_folds = 10;
  double train_fraction = 0.9;  // of the non-test ids; the rest is validation
  std::uint64_t seed = 0;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  FoldParams params;
  std::size_t n = 0;
  std::vector<Fold> folds;

  /// Test sets partition [0, n); within a fold the three index lists partition [0, n).
  void validate() const;
};

/// Shuffles [0, n) and cuts it into k near-equal test folds (sizes differ by
/// at most one). The remaining ids of each fold are shuffled again and split
/// round(train_fraction * rest) / rest. Index lists are sorted ascending.
FoldPlan make_folds(std::size_t n, const FoldParams& params);

}  // namespace phenosample::eval
