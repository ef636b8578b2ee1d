#pragma once

#include <string>

#include <Eigen/Core>

#include "ksivi/kernels.hpp"
#include "ksivi/targets.hpp"
#include "ksivi/variational.hpp"

namespace ksivi {

enum class EstimatorKind { vanilla, ustat };

/// Penalty added to the squared-KSD objective.
///   diagonal: lambda * k(x, x) * mean ||f||^2
///   entropic: -lambda * beta * mean log p(x)
enum class RegKind { diagonal, entropic };

std::string to_string(RegKind k);
RegKind reg_kind_from_string(const std::string& s);

struct Regularizer {
  double lambda = 0.0;
  RegKind kind = RegKind::diagonal;

  Regularizer(double lambda_ = 0.0, RegKind kind_ = RegKind::diagonal) : lambda(lambda_), kind(kind_) {}
};

std::string to_string(EstimatorKind k);
EstimatorKind estimator_kind_from_string(const std::string& s);

/// Squared-KSD Monte Carlo estimate from precomputed f vectors and samples
/// (columns). Two independent batches: the full N1 x N2 average.
double ksd2_vanilla(const Eigen::Ref<const Eigen::MatrixXd>& x1, const Eigen::Ref<const Eigen::MatrixXd>& f1,
                    const Eigen::Ref<const Eigen::MatrixXd>& x2, const Eigen::Ref<const Eigen::MatrixXd>& f2,
                    const KernelSpec& kernel);

/// Off-diagonal average within one batch; needs N >= 2.
double ksd2_ustat(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& f,
                  const KernelSpec& kernel);

/// Value estimate under `kind`. `second` is ignored for the U-statistic.
double ksd2_estimate(const SIVParams& params, const TargetModel& target, const KernelSpec& kernel,
                     const SampleBatch& first, const SampleBatch* second, EstimatorKind kind, double beta_temp);

/// Estimate and its exact gradient over [net params, rho].
struct KsdGradient {
  double value = 0.0;       // squared-KSD estimate
  double objective = 0.0;   // value plus the penalty when lambda > 0
  Eigen::VectorXd grad;     // gradient of `objective`
};

KsdGradient grad_vanilla(const SIVParams& params, const TargetModel& target, const KernelSpec& kernel,
                         const SampleBatch& batch1, const SampleBatch& batch2, double beta_temp,
                         const Regularizer& reg = {});

KsdGradient grad_ustat(const SIVParams& params, const TargetModel& target, const KernelSpec& kernel,
                       const SampleBatch& batch, double beta_temp, const Regularizer& reg = {});

}  // namespace ksivi
