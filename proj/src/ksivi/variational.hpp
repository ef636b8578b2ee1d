#pragma once

#include <Eigen/Core>

#include "ksivi/diffnet.hpp"
#include "ksivi/rng.hpp"
#include "ksivi/targets.hpp"

namespace ksivi {

/// Variational parameters: mean network plus log-scales, sigma = exp(rho).
struct SIVParams {
  NetParams net;
  Eigen::VectorXd rho;

  int mixing_dim() const { return net.arch.input_dim(); }
  int dim() const { return net.arch.output_dim(); }
  Eigen::VectorXd sigma() const { return rho.array().exp(); }
  Eigen::Index n_params() const { return net.n_params() + rho.size(); }

  /// [net flat, rho]
  Eigen::VectorXd flatten() const;
  void assign_flat(const Eigen::Ref<const Eigen::VectorXd>& flat);
  void validate() const;
};

SIVParams siv_init(const NetArch& arch, double initial_sigma, std::uint64_t seed, NetInit init = NetInit::he_normal);

/// A batch of reparameterized draws x = mu(z) + sigma * xi, stored column-wise.
struct SampleBatch {
  Eigen::MatrixXd z;   // d_z x N
  Eigen::MatrixXd xi;  // d x N
  Eigen::MatrixXd mu;  // d x N
  Eigen::MatrixXd x;   // d x N
  NetTape tape;

  Eigen::Index size() const { return x.cols(); }
};

SampleBatch siv_sample_batch(const SIVParams& params, Eigen::Index n, Rng& rng);

/// Rebuilds a batch from fixed (z, xi) under `params` (common random numbers).
SampleBatch siv_batch_from_noise(const SIVParams& params, const Eigen::Ref<const Eigen::MatrixXd>& z,
                                 const Eigen::Ref<const Eigen::MatrixXd>& xi);

/// Draws only x (no tapes), for evaluation samples.
Eigen::MatrixXd siv_draw(const SIVParams& params, Eigen::Index n, Rng& rng);

/// grad_x log q(x | z) = -xi / sigma, column-wise.
Eigen::MatrixXd conditional_score(const SampleBatch& batch, const SIVParams& params);

/// beta * s_p(x) + xi / sigma, column-wise.
Eigen::MatrixXd f_vectors(const SampleBatch& batch, const SIVParams& params, const TargetModel& target,
                          double beta_temp);

}  // namespace ksivi
