#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace ksivi {

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(Eigen::Index n_params = 0)
      : first_moment(Eigen::VectorXd::Zero(n_params)), second_moment(Eigen::VectorXd::Zero(n_params)) {}
};

/// One bias-corrected Adam update of `params` in place. When `clip_norm` > 0
/// and the gradient norm exceeds it, the gradient is rescaled to that norm.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               double learning_rate, double clip_norm = 0.0);

}  // namespace ksivi
