#include "ksivi/adam.hpp"

#include <cmath>

#include "ksivi/error.hpp"

namespace ksivi {

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               double learning_rate, double clip_norm) {
  require_dims(params.size() == grad.size() && state.first_moment.size() == grad.size() &&
                   state.second_moment.size() == grad.size(),
               "adam state, parameter and gradient lengths differ");
  Eigen::VectorXd g = grad;
  if (clip_norm > 0.0) {
    const double norm = g.norm();
    if (norm > clip_norm) g *= clip_norm / norm;
  }
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * g;
  state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * g.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= learning_rate * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

}  // namespace ksivi
