#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "ksivi/kernels.hpp"

namespace ksivi {

/// Samples stored column-wise (d x n); CSV files hold one sample per row.
struct SampleSet {
  Eigen::MatrixXd points;
  std::string label;

  Eigen::Index size() const { return points.cols(); }
  Eigen::Index dim() const { return points.rows(); }
  void validate() const;
};

class DegenerateSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unbiased MMD^2: distinct pairs within each set, all pairs across.
double mmd2_ustat(const SampleSet& x, const SampleSet& y, const KernelSpec& kernel);
/// Biased MMD^2 including the diagonal terms; exactly 0 for identical sets.
double mmd2_vstat(const SampleSet& x, const SampleSet& y, const KernelSpec& kernel);

/// Mean over `n_proj` random unit directions of the 1-D order-2 Wasserstein
/// distance between projections. The larger set is subsampled (seeded,
/// without replacement) to the smaller size.
double sliced_wd(const SampleSet& x, const SampleSet& y, int n_proj = 128, std::uint64_t seed = 0);

/// k-nearest-neighbour estimate of KL(q || p), q sampled by `x`, p by `y`.
double kl_knn(const SampleSet& x, const SampleSet& y, int k = 1);

/// Pearson correlations, entries (i, j) with i < j filled; the rest is zero.
Eigen::MatrixXd corr_pairs(const SampleSet& x);

}  // namespace ksivi
