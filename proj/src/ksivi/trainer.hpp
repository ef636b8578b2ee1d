#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ksivi/error.hpp"
#include "ksivi/estimators.hpp"
#include "ksivi/kernels.hpp"
#include "ksivi/targets.hpp"
#include "ksivi/variational.hpp"

namespace ksivi {

/// Linear ramp of the inverse temperature from `beta0` to 1 over
/// `ramp_iterations`; disabled means a constant 1.
struct AnnealSchedule {
  bool enabled = false;
  double beta0 = 0.2;
  std::int64_t ramp_iterations = 0;
};

double anneal_beta(std::int64_t iteration, const AnnealSchedule& schedule);

struct TrainConfig {
  std::int64_t iterations = 1000;
  int batch_size = 100;
  double learning_rate = 1e-3;
  EstimatorKind estimator = EstimatorKind::vanilla;
  KernelSpec kernel;
  BandwidthRule bandwidth_rule = BandwidthRule::median;
  AnnealSchedule anneal;
  double reg_lambda = 0.0;
  RegKind reg_kind = RegKind::diagonal;
  double clip_norm = 0.0;  // 0 = off
  std::uint64_t seed = 0;
  int trace_every = 1;
  int diagnostic_every = 0;  // 0 = off
  int diagnostic_probes = 16;
  bool record_wallclock = false;

  void validate() const;
};

struct TraceRecord {
  std::int64_t iteration;
  double ksd2;
  double bandwidth;
  double beta_temp;
  double grad_norm;
  double wallclock_ms;
};

using LossTrace = std::vector<TraceRecord>;

struct SmoothnessSummary {
  std::int64_t iteration = 0;
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  int n_probes = 0;
};

/// Statistics of the mean network's parameter-Jacobian norm over z ~ N(0, I).
SmoothnessSummary smoothness_diagnostic(const SIVParams& params, int n_probes, Rng& rng);

struct TrainResult {
  SIVParams params;
  LossTrace trace;
  std::vector<SmoothnessSummary> diagnostics;
  std::vector<double> seconds_per_10k;  // one entry per completed 10,000 iterations
  double total_seconds = 0.0;
};

/// Thrown when the loss or gradient stops being finite.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(std::int64_t iteration, SIVParams snapshot, const std::string& what);
  std::int64_t iteration() const { return iteration_; }
  const SIVParams& snapshot() const { return snapshot_; }

 private:
  std::int64_t iteration_;
  SIVParams snapshot_;
};

using ProgressCallback = std::function<void(const TraceRecord&)>;

TrainResult train(const TrainConfig& config, const TargetModel& target, SIVParams init,
                  const ProgressCallback& progress = {});

}  // namespace ksivi
