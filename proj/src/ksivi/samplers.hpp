#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ksivi/targets.hpp"

namespace ksivi {

struct SamplerConfig {
  int n_particles = 1000;
  std::int64_t n_steps = 10000;
  double step_size = 1e-4;
  std::int64_t burn_in = 0;
  int thin = 0;  // > 0: pool every `thin`-th post-burn-in state
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct SamplerResult {
  Eigen::MatrixXd particles;  // d x n_particles, final states
  Eigen::MatrixXd pooled;     // d x (pooled draws), empty unless thin > 0
  double acceptance_rate = 1.0;
  std::int64_t steps = 0;
};

/// Per-particle seeds; particle i draws from its own stream.
std::vector<std::uint64_t> particle_seeds(std::uint64_t seed, int n_particles);

/// Unadjusted Langevin: x <- x + (eps/2) s_p(x) + sqrt(eps) eta.
SamplerResult sgld_run(const TargetModel& target, const SamplerConfig& config,
                       const std::optional<Eigen::MatrixXd>& init = std::nullopt,
                       const std::vector<std::uint64_t>& seeds = {});

/// Langevin proposal with a Metropolis-Hastings correction.
SamplerResult mala_run(const TargetModel& target, const SamplerConfig& config,
                       const std::optional<Eigen::MatrixXd>& init = std::nullopt,
                       const std::vector<std::uint64_t>& seeds = {});

/// One unadjusted Langevin step from x with injected noise `eta`.
Eigen::VectorXd langevin_step(const TargetModel& target, const VecRef& x, const VecRef& eta, double step_size);

/// log of the MALA acceptance ratio for moving x -> proposal.
double mala_log_accept(const TargetModel& target, const VecRef& x, const VecRef& proposal, double step_size);

}  // namespace ksivi
