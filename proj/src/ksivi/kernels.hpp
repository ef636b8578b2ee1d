#pragma once

#include <string>

#include <Eigen/Core>

namespace ksivi {

enum class KernelFamily { rbf, imq, riesz };

struct KernelSpec {
  KernelFamily family = KernelFamily::rbf;
  double bandwidth = 1.0;   // rbf: exp(-r^2 / (2 h^2))
  double imq_c = 1.0;       // imq: (c^2 + r^2)^(-1/2)
  double riesz_eps = 1e-8;  // riesz: -sqrt(r^2 + eps^2)
  // riesz only: add rho(x) + rho(y), rho(u) = sqrt(|u|^2 + eps^2), which makes
  // the kernel positive definite without changing its MMD.
  bool riesz_anchored = false;

  void validate() const;
  bool uses_bandwidth() const { return family == KernelFamily::rbf; }
  bool anchored() const { return family == KernelFamily::riesz && riesz_anchored; }
};

/// How the rbf bandwidth is chosen each iteration.
enum class BandwidthRule {
  fixed,           // keep KernelSpec::bandwidth
  median,          // h = median pairwise distance
  median_sq_log_n,  // h^2 = med(r^2) / log(N), alternative reading of the heuristic
  median_svgd       // h^2 = med(r^2) / (2 log(N + 1)), as in the SVGD reference code
};

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);
std::string to_string(BandwidthRule r);
BandwidthRule bandwidth_rule_from_string(const std::string& s);

/// Kernel value and radial derivative factor g so that grad_x k(x, y) = -(x - y) * g.
struct KernelProfile {
  double value;
  double grad_factor;
};

KernelProfile kernel_profile(const KernelSpec& spec, double sq_dist);

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

Eigen::VectorXd kernel_grad1(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& y);

/// Radial part of k(x, x), the same for every x.
double kernel_diagonal(const KernelSpec& spec);

/// Per-point anchor term of an anchored kernel (0 otherwise), for the columns of x.
Eigen::VectorXd kernel_anchor(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x);
/// Gradient of the anchor term, column-wise.
Eigen::MatrixXd kernel_anchor_grad(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Squared Euclidean distances between the columns of `a` and the columns of `b`.
Eigen::MatrixXd pairwise_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b);

/// Median of all pairwise distances between the columns of `samples`,
/// clamped below at 1e-8.
double median_bandwidth(const Eigen::Ref<const Eigen::MatrixXd>& samples);

/// Bandwidth chosen by `rule` from `samples` (columns); `fallback` for BandwidthRule::fixed.
double select_bandwidth(BandwidthRule rule, const Eigen::Ref<const Eigen::MatrixXd>& samples, double fallback);

}  // namespace ksivi
