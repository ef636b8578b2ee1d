#include "ksivi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ksivi/error.hpp"

namespace ksivi {

namespace {
constexpr double kMinBandwidth = 1e-8;
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0)) throw ConfigError("kernel bandwidth must be positive");
  if (!(imq_c > 0.0)) throw ConfigError("imq offset c must be positive");
  if (!(riesz_eps > 0.0)) throw ConfigError("riesz smoothing eps must be positive");
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::rbf: return "rbf";
    case KernelFamily::imq: return "imq";
    case KernelFamily::riesz: return "riesz";
  }
  return "?";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "rbf" || s == "gaussian") return KernelFamily::rbf;
  if (s == "imq") return KernelFamily::imq;
  if (s == "riesz") return KernelFamily::riesz;
  throw ConfigError("unknown kernel family '" + s + "'");
}

std::string to_string(BandwidthRule r) {
  switch (r) {
    case BandwidthRule::fixed: return "fixed";
    case BandwidthRule::median: return "median";
    case BandwidthRule::median_sq_log_n: return "median_sq_log_n";
    case BandwidthRule::median_svgd: return "median_svgd";
  }
  return "?";
}

BandwidthRule bandwidth_rule_from_string(const std::string& s) {
  if (s == "fixed") return BandwidthRule::fixed;
  if (s == "median") return BandwidthRule::median;
  if (s == "median_sq_log_n") return BandwidthRule::median_sq_log_n;
  if (s == "median_svgd") return BandwidthRule::median_svgd;
  throw ConfigError("unknown bandwidth rule '" + s + "'");
}

KernelProfile kernel_profile(const KernelSpec& spec, double sq_dist) {
  switch (spec.family) {
    case KernelFamily::rbf: {
      const double h2 = spec.bandwidth * spec.bandwidth;
      const double k = std::exp(-sq_dist / (2.0 * h2));
      return {k, k / h2};
    }
    case KernelFamily::imq: {
      const double base = spec.imq_c * spec.imq_c + sq_dist;
      const double inv_sqrt = 1.0 / std::sqrt(base);
      return {inv_sqrt, inv_sqrt / base};
    }
    case KernelFamily::riesz: {
      const double root = std::sqrt(sq_dist + spec.riesz_eps * spec.riesz_eps);
      return {-root, 1.0 / root};
    }
  }
  return {0.0, 0.0};
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_dims(x.size() == y.size(), "kernel arguments differ in dimension");
  const double radial = kernel_profile(spec, (x - y).squaredNorm()).value;
  if (!spec.anchored()) return radial;
  return radial + kernel_anchor(spec, x)[0] + kernel_anchor(spec, y)[0];
}

Eigen::VectorXd kernel_grad1(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_dims(x.size() == y.size(), "kernel arguments differ in dimension");
  const Eigen::VectorXd diff = x - y;
  Eigen::VectorXd g = -diff * kernel_profile(spec, diff.squaredNorm()).grad_factor;
  if (spec.anchored()) g += kernel_anchor_grad(spec, x).col(0);
  return g;
}

double kernel_diagonal(const KernelSpec& spec) { return kernel_profile(spec, 0.0).value; }

Eigen::VectorXd kernel_anchor(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (!spec.anchored()) return Eigen::VectorXd::Zero(x.cols());
  const double e2 = spec.riesz_eps * spec.riesz_eps;
  return (x.colwise().squaredNorm().array() + e2).sqrt().transpose();
}

Eigen::MatrixXd kernel_anchor_grad(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (!spec.anchored()) return Eigen::MatrixXd::Zero(x.rows(), x.cols());
  const Eigen::VectorXd a = kernel_anchor(spec, x);
  return x.array().rowwise() / a.transpose().array();
}

Eigen::MatrixXd pairwise_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b) {
  require_dims(a.rows() == b.rows(), "pairwise distance operands differ in dimension");
  Eigen::MatrixXd out(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < a.cols(); ++i) out(i, j) = (a.col(i) - b.col(j)).squaredNorm();
  return out;
}

namespace {

std::vector<double> upper_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  const Eigen::Index n = samples.cols();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((samples.col(i) - samples.col(j)).squaredNorm());
  return d;
}

// Median with the even-count convention (mean of the two middle order
// statistics), applied after `transform`.
template <typename F>
double median_of(std::vector<double>& v, F transform) {
  const std::size_t m = v.size();
  const std::size_t hi = m / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(hi), v.end());
  const double upper = transform(v[hi]);
  if (m % 2 == 1) return upper;
  const double lower = transform(*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(hi)));
  return 0.5 * (lower + upper);
}

}  // namespace

double median_bandwidth(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  if (samples.cols() < 2) throw DimensionError("median bandwidth needs at least 2 samples");
  auto d = upper_sq_dists(samples);
  const double med = median_of(d, [](double r2) { return std::sqrt(r2); });
  return std::max(med, kMinBandwidth);
}

double select_bandwidth(BandwidthRule rule, const Eigen::Ref<const Eigen::MatrixXd>& samples, double fallback) {
  switch (rule) {
    case BandwidthRule::fixed: return fallback;
    case BandwidthRule::median: return median_bandwidth(samples);
    case BandwidthRule::median_sq_log_n:
    case BandwidthRule::median_svgd: {
      if (samples.cols() < 2) throw DimensionError("median bandwidth needs at least 2 samples");
      auto d = upper_sq_dists(samples);
      const double med2 = median_of(d, [](double r2) { return r2; });
      const double n = static_cast<double>(samples.cols());
      const double h = rule == BandwidthRule::median_svgd ? std::sqrt(0.5 * med2 / std::log(n + 1.0))
                                                          : std::sqrt(med2 / std::log(n));
      return std::max(h, kMinBandwidth);
    }
  }
  return fallback;
}

}  // namespace ksivi
