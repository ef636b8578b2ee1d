#include "ksivi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ksivi/error.hpp"
#include "ksivi/rng.hpp"

namespace ksivi {

void SampleSet::validate() const {
  if (points.cols() < 2) throw DimensionError("sample set '" + label + "' needs at least 2 samples");
  if (!points.allFinite()) throw DimensionError("sample set '" + label + "' has non-finite entries");
}

namespace {

void check_pair(const SampleSet& x, const SampleSet& y, Eigen::Index min_size = 2) {
  if (min_size < 2) {
    if (x.size() < 1 || y.size() < 1) throw DimensionError("empty sample set");
    if (!x.points.allFinite() || !y.points.allFinite()) throw DimensionError("sample set has non-finite entries");
  } else {
    x.validate();
    y.validate();
  }
  require_dims(x.dim() == y.dim(), "sample sets differ in dimension (" + std::to_string(x.dim()) + " vs " +
                                       std::to_string(y.dim()) + ")");
}

struct KernelSums {
  double within_x = 0.0, within_x_diag = 0.0;
  double within_y = 0.0, within_y_diag = 0.0;
  double cross = 0.0;
};

// Sum of the radial part of k over all pairs (a_i, b_j), optionally only
// i < j when a is b. Anchor terms of an anchored kernel cancel in MMD.
double block_kernel_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& kernel, bool upper) {
  constexpr Eigen::Index kBlock = 512;
  double total = 0.0;
  for (Eigen::Index i0 = 0; i0 < a.cols(); i0 += kBlock) {
    const Eigen::Index ni = std::min(kBlock, a.cols() - i0);
    for (Eigen::Index j0 = upper ? i0 : 0; j0 < b.cols(); j0 += kBlock) {
      const Eigen::Index nj = std::min(kBlock, b.cols() - j0);
      const Eigen::MatrixXd sq = pairwise_sq_dists(a.middleCols(i0, ni), b.middleCols(j0, nj));
      for (Eigen::Index j = 0; j < nj; ++j)
        for (Eigen::Index i = 0; i < ni; ++i)
          if (!upper || i0 + i < j0 + j) total += kernel_profile(kernel, sq(i, j)).value;
    }
  }
  return total;
}

KernelSums kernel_sums(const SampleSet& x, const SampleSet& y, const KernelSpec& kernel) {
  KernelSums s;
  const double k0 = kernel_diagonal(kernel);
  s.within_x = 2.0 * block_kernel_sum(x.points, x.points, kernel, true);
  s.within_x_diag = k0 * static_cast<double>(x.size());
  s.within_y = 2.0 * block_kernel_sum(y.points, y.points, kernel, true);
  s.within_y_diag = k0 * static_cast<double>(y.size());
  s.cross = block_kernel_sum(x.points, y.points, kernel, false);
  return s;
}

}  // namespace

double mmd2_ustat(const SampleSet& x, const SampleSet& y, const KernelSpec& kernel) {
  check_pair(x, y);
  const auto s = kernel_sums(x, y, kernel);
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  return s.within_x / (n * (n - 1.0)) + s.within_y / (m * (m - 1.0)) - 2.0 * s.cross / (n * m);
}

double mmd2_vstat(const SampleSet& x, const SampleSet& y, const KernelSpec& kernel) {
  check_pair(x, y, 1);
  const auto s = kernel_sums(x, y, kernel);
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  return (s.within_x + s.within_x_diag) / (n * n) + (s.within_y + s.within_y_diag) / (m * m) -
         2.0 * s.cross / (n * m);
}

double sliced_wd(const SampleSet& x, const SampleSet& y, int n_proj, std::uint64_t seed) {
  check_pair(x, y);
  if (n_proj < 1) throw ConfigError("sliced_wd needs at least one projection");
  Rng rng(seed);
  const Eigen::Index n = std::min(x.size(), y.size());
  auto subsample = [&](const Eigen::MatrixXd& p) -> Eigen::MatrixXd {
    if (p.cols() == n) return p;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p.cols()));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Eigen::MatrixXd out(p.rows(), n);
    for (Eigen::Index j = 0; j < n; ++j) out.col(j) = p.col(idx[static_cast<std::size_t>(j)]);
    return out;
  };
  const Eigen::MatrixXd a = subsample(x.points);
  const Eigen::MatrixXd b = subsample(y.points);

  Eigen::MatrixXd dirs = normal_matrix(x.dim(), n_proj, rng);
  dirs.colwise().normalize();
  const Eigen::MatrixXd pa = dirs.transpose() * a;  // n_proj x n
  const Eigen::MatrixXd pb = dirs.transpose() * b;
  double total = 0.0;
  std::vector<double> ua(static_cast<std::size_t>(n)), ub(static_cast<std::size_t>(n));
  for (int p = 0; p < n_proj; ++p) {
    for (Eigen::Index j = 0; j < n; ++j) {
      ua[static_cast<std::size_t>(j)] = pa(p, j);
      ub[static_cast<std::size_t>(j)] = pb(p, j);
    }
    std::sort(ua.begin(), ua.end());
    std::sort(ub.begin(), ub.end());
    double sq = 0.0;
    for (std::size_t j = 0; j < ua.size(); ++j) sq += (ua[j] - ub[j]) * (ua[j] - ub[j]);
    total += std::sqrt(sq / static_cast<double>(n));
  }
  return total / n_proj;
}

namespace {

// Squared distance from `q` to its k-th nearest column of `pool`, skipping
// column `skip` (or none when skip < 0).
double kth_sq_dist(const Eigen::MatrixXd& pool, const Eigen::Ref<const Eigen::VectorXd>& q, int k, Eigen::Index skip,
                   std::vector<double>& scratch) {
  scratch.clear();
  for (Eigen::Index j = 0; j < pool.cols(); ++j)
    if (j != skip) scratch.push_back((pool.col(j) - q).squaredNorm());
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
  return scratch[static_cast<std::size_t>(k - 1)];
}

}  // namespace

double kl_knn(const SampleSet& x, const SampleSet& y, int k) {
  check_pair(x, y);
  if (k < 1) throw ConfigError("kl_knn needs k >= 1");
  const Eigen::Index n = x.size();
  const Eigen::Index m = y.size();
  if (n <= k || m <= k) throw DimensionError("kl_knn needs more than k samples in each set");
  constexpr double kClamp = 1e-12;
  const double d = static_cast<double>(x.dim());
  std::vector<double> scratch;
  scratch.reserve(static_cast<std::size_t>(std::max(n, m)));
  double acc = 0.0;
  Eigen::Index clamped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double rho = std::sqrt(kth_sq_dist(x.points, x.points.col(i), k, i, scratch));
    double nu = std::sqrt(kth_sq_dist(y.points, x.points.col(i), k, -1, scratch));
    if (rho < kClamp) {
      rho = kClamp;
      ++clamped;
    }
    nu = std::max(nu, kClamp);
    acc += std::log(nu / rho);
  }
  if (static_cast<double>(clamped) > 0.01 * static_cast<double>(n))
    throw DegenerateSamples("kl_knn: " + std::to_string(clamped) + " of " + std::to_string(n) +
                            " within-set neighbour distances are duplicates");
  return d / static_cast<double>(n) * acc + std::log(static_cast<double>(m) / static_cast<double>(n - 1));
}

Eigen::MatrixXd corr_pairs(const SampleSet& x) {
  if (x.size() < 3) throw DimensionError("corr_pairs needs at least 3 samples");
  const Eigen::MatrixXd centred = x.points.colwise() - x.points.rowwise().mean();
  const Eigen::MatrixXd cov = centred * centred.transpose();
  const Eigen::VectorXd var = cov.diagonal();
  for (Eigen::Index i = 0; i < var.size(); ++i)
    if (!(var[i] > 0.0)) throw DimensionError("corr_pairs: coordinate " + std::to_string(i) + " has zero variance");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.dim(), x.dim());
  for (Eigen::Index i = 0; i < x.dim(); ++i)
    for (Eigen::Index j = i + 1; j < x.dim(); ++j)
      out(i, j) = std::clamp(cov(i, j) / std::sqrt(var[i] * var[j]), -1.0, 1.0);
  return out;
}

}  // namespace ksivi
