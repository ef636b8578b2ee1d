#include "ksivi/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ksivi/adam.hpp"
#include "ksivi/error.hpp"

namespace ksivi {

double anneal_beta(std::int64_t iteration, const AnnealSchedule& schedule) {
  if (!schedule.enabled) return 1.0;
  if (schedule.ramp_iterations <= 0 || iteration >= schedule.ramp_iterations) return 1.0;
  const double frac = static_cast<double>(std::max<std::int64_t>(iteration, 0)) /
                      static_cast<double>(schedule.ramp_iterations);
  return std::min(1.0, schedule.beta0 + (1.0 - schedule.beta0) * frac);
}

void TrainConfig::validate() const {
  std::string errors;
  auto check = [&](bool ok, const char* msg) {
    if (!ok) errors += errors.empty() ? msg : std::string("\n  ") + msg;
  };
  check(iterations >= 0, "train.iterations must be >= 0");
  check(batch_size >= 2, "train.batch_size must be >= 2");
  check(learning_rate > 0.0, "train.learning_rate must be positive");
  check(!anneal.enabled || (anneal.beta0 > 0.0 && anneal.beta0 <= 1.0), "train.anneal_beta0 must lie in (0, 1]");
  check(reg_lambda >= 0.0, "train.reg_lambda must be >= 0");
  check(clip_norm >= 0.0, "train.clip_norm must be >= 0");
  check(trace_every >= 1, "train.trace_every must be >= 1");
  check(diagnostic_every >= 0 && diagnostic_probes >= 1, "train.diagnostic_every: invalid diagnostic cadence");
  if (!errors.empty()) throw ConfigError(errors);
  kernel.validate();
}

SmoothnessSummary smoothness_diagnostic(const SIVParams& params, int n_probes, Rng& rng) {
  if (n_probes < 1) throw ConfigError("smoothness diagnostic needs at least one probe");
  const Eigen::MatrixXd z = normal_matrix(params.mixing_dim(), n_probes, rng);
  SmoothnessSummary s;
  s.n_probes = n_probes;
  s.min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_probes; ++i) {
    const double g = net_jacobian_frobenius(params.net, z.col(i));
    s.mean += g / n_probes;
    s.max = std::max(s.max, g);
    s.min = std::min(s.min, g);
  }
  return s;
}

TrainingDiverged::TrainingDiverged(std::int64_t iteration, SIVParams snapshot, const std::string& what)
    : NumericError(what), iteration_(iteration), snapshot_(std::move(snapshot)) {}

TrainResult train(const TrainConfig& config, const TargetModel& target, SIVParams init,
                  const ProgressCallback& progress) {
  config.validate();
  init.validate();
  require_dims(target.dim() == init.dim(), "target dimension " + std::to_string(target.dim()) +
                                               " != variational output width " + std::to_string(init.dim()));
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto chunk_start = start;

  TrainResult result;
  result.params = std::move(init);
  Eigen::VectorXd flat = result.params.flatten();
  AdamState adam(flat.size());
  Rng rng = make_stream(config.seed, 0);
  Rng diag_rng = make_stream(config.seed, 1);
  KernelSpec kernel = config.kernel;

  for (std::int64_t t = 0; t < config.iterations; ++t) {
    const double beta = anneal_beta(t, config.anneal);
    SampleBatch b1 = siv_sample_batch(result.params, config.batch_size, rng);
    SampleBatch b2;
    if (config.estimator == EstimatorKind::vanilla) b2 = siv_sample_batch(result.params, config.batch_size, rng);

    if (kernel.uses_bandwidth() && config.bandwidth_rule != BandwidthRule::fixed) {
      if (config.estimator == EstimatorKind::vanilla) {
        Eigen::MatrixXd both(b1.x.rows(), b1.size() + b2.size());
        both << b1.x, b2.x;
        kernel.bandwidth = select_bandwidth(config.bandwidth_rule, both, config.kernel.bandwidth);
      } else {
        kernel.bandwidth = select_bandwidth(config.bandwidth_rule, b1.x, config.kernel.bandwidth);
      }
    }

    const Regularizer reg(config.reg_lambda, config.reg_kind);
    const KsdGradient g = config.estimator == EstimatorKind::vanilla
                              ? grad_vanilla(result.params, target, kernel, b1, b2, beta, reg)
                              : grad_ustat(result.params, target, kernel, b1, beta, reg);
    const double grad_norm = g.grad.norm();
    if (!std::isfinite(g.objective) || !std::isfinite(grad_norm)) {
      throw TrainingDiverged(t, result.params,
                             "non-finite " + std::string(std::isfinite(g.objective) ? "gradient" : "loss") +
                                 " at iteration " + std::to_string(t));
    }

    if (t % config.trace_every == 0) {
      TraceRecord rec{t, g.value, kernel.uses_bandwidth() ? kernel.bandwidth : 0.0, beta, grad_norm, 0.0};
      if (config.record_wallclock)
        rec.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      result.trace.push_back(rec);
      if (progress) progress(rec);
    }
    if (config.diagnostic_every > 0 && t % config.diagnostic_every == 0) {
      auto s = smoothness_diagnostic(result.params, config.diagnostic_probes, diag_rng);
      s.iteration = t;
      result.diagnostics.push_back(s);
    }

    adam_step(adam, flat, g.grad, config.learning_rate, config.clip_norm);
    result.params.assign_flat(flat);

    if ((t + 1) % 10000 == 0) {
      const auto now = Clock::now();
      result.seconds_per_10k.push_back(std::chrono::duration<double>(now - chunk_start).count());
      chunk_start = now;
    }
  }
  result.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace ksivi
