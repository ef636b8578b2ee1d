#include "ksivi/estimators.hpp"

#include <algorithm>

#include "ksivi/error.hpp"

namespace ksivi {

std::string to_string(EstimatorKind k) { return k == EstimatorKind::vanilla ? "vanilla" : "ustat"; }

EstimatorKind estimator_kind_from_string(const std::string& s) {
  if (s == "vanilla") return EstimatorKind::vanilla;
  if (s == "ustat" || s == "u-stat") return EstimatorKind::ustat;
  throw ConfigError("unknown estimator '" + s + "'");
}

std::string to_string(RegKind k) { return k == RegKind::diagonal ? "diagonal" : "entropic"; }

RegKind reg_kind_from_string(const std::string& s) {
  if (s == "diagonal") return RegKind::diagonal;
  if (s == "entropic") return RegKind::entropic;
  throw ConfigError("unknown regularizer '" + s + "'");
}

namespace {

struct KernelMatrices {
  Eigen::MatrixXd value;        // k(a_i, b_j)
  Eigen::MatrixXd grad_factor;  // grad_a k = -(a_i - b_j) * grad_factor
};

KernelMatrices kernel_matrices(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::MatrixXd>& b) {
  const Eigen::MatrixXd sq = pairwise_sq_dists(a, b);
  KernelMatrices km{Eigen::MatrixXd(sq.rows(), sq.cols()), Eigen::MatrixXd(sq.rows(), sq.cols())};
  for (Eigen::Index j = 0; j < sq.cols(); ++j)
    for (Eigen::Index i = 0; i < sq.rows(); ++i) {
      const auto p = kernel_profile(kernel, sq(i, j));
      km.value(i, j) = p.value;
      km.grad_factor(i, j) = p.grad_factor;
    }
  if (kernel.anchored()) {
    km.value.colwise() += kernel_anchor(kernel, a);
    km.value.rowwise() += kernel_anchor(kernel, b).transpose();
  }
  return km;
}

// Anchor part of d/dx_i sum_j k(x_i, y_j) w_ij, given the row sums of w.
void add_anchor_grad(const KernelSpec& kernel, const Eigen::MatrixXd& x, const Eigen::VectorXd& row_sums,
                     Eigen::MatrixXd& dx) {
  if (!kernel.anchored()) return;
  dx += (kernel_anchor_grad(kernel, x).array().rowwise() * row_sums.transpose().array()).matrix();
}

void check_batch(const SIVParams& params, const TargetModel& target, const SampleBatch& b) {
  require_dims(target.dim() == params.dim(), "target and variational dimensions differ");
  require_dims(b.x.rows() == params.dim() && b.tape.batch() == b.size() &&
                   static_cast<int>(b.tape.pre.size()) == params.net.arch.n_layers(),
               "sample batch does not match parameters");
}

// Routes d objective / dx and d objective / df of one batch into the flat
// gradient, through x = mu(z) + sigma * xi and f = beta s_p(x) + xi / sigma.
void backprop_batch(const SIVParams& params, const TargetModel& target, const SampleBatch& batch, double beta_temp,
                    const Eigen::MatrixXd& dx, const Eigen::MatrixXd& df, Eigen::VectorXd& grad) {
  const Eigen::VectorXd sigma = params.sigma();
  Eigen::MatrixXd gx = dx;
  if (beta_temp != 0.0) gx += beta_temp * target.hvp_batch(batch.x, df);
  const Eigen::Index n_net = params.net.n_params();
  grad.head(n_net) += net_vjp(params.net, batch.tape, gx);
  // d x / d rho = sigma * xi ; d (xi / sigma) / d rho = -xi / sigma
  const Eigen::VectorXd via_x = gx.cwiseProduct(batch.xi).rowwise().sum();
  const Eigen::VectorXd via_f = df.cwiseProduct(batch.xi).rowwise().sum();
  grad.tail(sigma.size()).array() += via_x.array() * sigma.array() - via_f.array() / sigma.array();
}

// Adds the penalty for one batch, weighted by 1 / count, to the objective
// and to d objective / dx, d objective / df.
void add_penalty(const Regularizer& reg, const KernelSpec& kernel, const TargetModel& target,
                 const SampleBatch& batch, const Eigen::MatrixXd& f, double beta_temp, double count,
                 double& objective, Eigen::MatrixXd& dx, Eigen::MatrixXd& df) {
  if (!(reg.lambda > 0.0)) return;
  if (reg.kind == RegKind::diagonal) {
    // k(x_i, x_i) = k0 + 2 anchor(x_i)
    const Eigen::VectorXd kii = (kernel_diagonal(kernel) + 2.0 * kernel_anchor(kernel, batch.x).array()).matrix();
    const Eigen::VectorXd fsq = f.colwise().squaredNorm().transpose();
    objective += reg.lambda * kii.dot(fsq) / count;
    df += (2.0 * reg.lambda / count) * (f.array().rowwise() * kii.transpose().array()).matrix();
    add_anchor_grad(kernel, batch.x, (2.0 * reg.lambda / count) * fsq, dx);
  } else {
    objective -= reg.lambda * beta_temp * target.log_density_batch(batch.x).sum() / count;
    dx -= (reg.lambda * beta_temp / count) * target.score_batch(batch.x);
  }
}

}  // namespace

namespace {

constexpr Eigen::Index kBlock = 512;

// sum_{i in [i0, i1), j} k(a_i, b_j) <f_i, g_j>, optionally skipping i == j.
double pair_sum(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& a,
                const Eigen::Ref<const Eigen::MatrixXd>& fa, const Eigen::Ref<const Eigen::MatrixXd>& b,
                const Eigen::Ref<const Eigen::MatrixXd>& fb, bool skip_diagonal) {
  double total = 0.0;
  for (Eigen::Index i0 = 0; i0 < a.cols(); i0 += kBlock) {
    const Eigen::Index ni = std::min(kBlock, a.cols() - i0);
    for (Eigen::Index j0 = 0; j0 < b.cols(); j0 += kBlock) {
      const Eigen::Index nj = std::min(kBlock, b.cols() - j0);
      const Eigen::MatrixXd sq = pairwise_sq_dists(a.middleCols(i0, ni), b.middleCols(j0, nj));
      const Eigen::MatrixXd inner = fa.middleCols(i0, ni).transpose() * fb.middleCols(j0, nj);
      const Eigen::VectorXd anchor_a = kernel_anchor(kernel, a.middleCols(i0, ni));
      const Eigen::VectorXd anchor_b = kernel_anchor(kernel, b.middleCols(j0, nj));
      double block = 0.0;
      for (Eigen::Index j = 0; j < nj; ++j)
        for (Eigen::Index i = 0; i < ni; ++i) {
          if (skip_diagonal && i0 + i == j0 + j) continue;
          block += (kernel_profile(kernel, sq(i, j)).value + anchor_a[i] + anchor_b[j]) * inner(i, j);
        }
      total += block;
    }
  }
  return total;
}

}  // namespace

double ksd2_vanilla(const Eigen::Ref<const Eigen::MatrixXd>& x1, const Eigen::Ref<const Eigen::MatrixXd>& f1,
                    const Eigen::Ref<const Eigen::MatrixXd>& x2, const Eigen::Ref<const Eigen::MatrixXd>& f2,
                    const KernelSpec& kernel) {
  require_dims(x1.cols() == f1.cols() && x2.cols() == f2.cols() && x1.rows() == x2.rows() &&
                   f1.rows() == f2.rows(),
               "batch shapes differ");
  if (x1.cols() < 1 || x2.cols() < 1) throw DimensionError("vanilla estimator needs non-empty batches");
  return pair_sum(kernel, x1, f1, x2, f2, false) / (static_cast<double>(x1.cols()) * static_cast<double>(x2.cols()));
}

double ksd2_ustat(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& f,
                  const KernelSpec& kernel) {
  require_dims(x.cols() == f.cols(), "batch shapes differ");
  const Eigen::Index n = x.cols();
  if (n < 2) throw DimensionError("U-statistic estimator needs N >= 2");
  return pair_sum(kernel, x, f, x, f, true) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double ksd2_estimate(const SIVParams& params, const TargetModel& target, const KernelSpec& kernel,
                     const SampleBatch& first, const SampleBatch* second, EstimatorKind kind, double beta_temp) {
  const Eigen::MatrixXd f1 = f_vectors(first, params, target, beta_temp);
  if (kind == EstimatorKind::ustat) return ksd2_ustat(first.x, f1, kernel);
  if (!second) throw DimensionError("vanilla estimator needs two batches");
  const Eigen::MatrixXd f2 = f_vectors(*second, params, target, beta_temp);
  return ksd2_vanilla(first.x, f1, second->x, f2, kernel);
}

KsdGradient grad_vanilla(const SIVParams& params, const TargetModel& target, const KernelSpec& kernel,
                         const SampleBatch& batch1, const SampleBatch& batch2, double beta_temp,
                         const Regularizer& reg) {
  check_batch(params, target, batch1);
  check_batch(params, target, batch2);
  const double n1 = static_cast<double>(batch1.size());
  const double n2 = static_cast<double>(batch2.size());
  const Eigen::MatrixXd f1 = f_vectors(batch1, params, target, beta_temp);
  const Eigen::MatrixXd f2 = f_vectors(batch2, params, target, beta_temp);
  const auto km = kernel_matrices(kernel, batch1.x, batch2.x);
  const Eigen::MatrixXd inner = f1.transpose() * f2;

  KsdGradient out;
  out.value = km.value.cwiseProduct(inner).sum() / (n1 * n2);

  const Eigen::MatrixXd m = inner.cwiseProduct(km.grad_factor) / (n1 * n2);
  const Eigen::MatrixXd dk = km.value / (n1 * n2);

  Eigen::MatrixXd dx1 = batch2.x * m.transpose();
  dx1 -= (batch1.x.array().rowwise() * m.rowwise().sum().transpose().array()).matrix();
  Eigen::MatrixXd dx2 = batch1.x * m;
  dx2 -= (batch2.x.array().rowwise() * m.colwise().sum().array()).matrix();
  Eigen::MatrixXd df1 = f2 * dk.transpose();
  Eigen::MatrixXd df2 = f1 * dk;
  add_anchor_grad(kernel, batch1.x, inner.rowwise().sum() / (n1 * n2), dx1);
  add_anchor_grad(kernel, batch2.x, inner.colwise().sum().transpose() / (n1 * n2), dx2);

  out.objective = out.value;
  add_penalty(reg, kernel, target, batch1, f1, beta_temp, n1 + n2, out.objective, dx1, df1);
  add_penalty(reg, kernel, target, batch2, f2, beta_temp, n1 + n2, out.objective, dx2, df2);

  out.grad = Eigen::VectorXd::Zero(params.n_params());
  backprop_batch(params, target, batch1, beta_temp, dx1, df1, out.grad);
  backprop_batch(params, target, batch2, beta_temp, dx2, df2, out.grad);
  return out;
}

KsdGradient grad_ustat(const SIVParams& params, const TargetModel& target, const KernelSpec& kernel,
                       const SampleBatch& batch, double beta_temp, const Regularizer& reg) {
  check_batch(params, target, batch);
  const Eigen::Index n = batch.size();
  if (n < 2) throw DimensionError("U-statistic estimator needs N >= 2");
  const double norm = static_cast<double>(n * (n - 1));
  const Eigen::MatrixXd f = f_vectors(batch, params, target, beta_temp);
  auto km = kernel_matrices(kernel, batch.x, batch.x);
  km.value.diagonal().setZero();
  km.grad_factor.diagonal().setZero();
  Eigen::MatrixXd inner = f.transpose() * f;
  inner.diagonal().setZero();

  KsdGradient out;
  out.value = km.value.cwiseProduct(inner).sum() / norm;

  // Symmetric pair weights: each unordered pair contributes through both ends.
  const Eigen::MatrixXd m = inner.cwiseProduct(km.grad_factor) * (2.0 / norm);
  Eigen::MatrixXd dx = batch.x * m;
  dx -= (batch.x.array().rowwise() * m.rowwise().sum().transpose().array()).matrix();
  Eigen::MatrixXd df = f * km.value * (2.0 / norm);
  add_anchor_grad(kernel, batch.x, inner.rowwise().sum() * (2.0 / norm), dx);

  out.objective = out.value;
  add_penalty(reg, kernel, target, batch, f, beta_temp, static_cast<double>(n), out.objective, dx, df);

  out.grad = Eigen::VectorXd::Zero(params.n_params());
  backprop_batch(params, target, batch, beta_temp, dx, df, out.grad);
  return out;
}

}  // namespace ksivi
