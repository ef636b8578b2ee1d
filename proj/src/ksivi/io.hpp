#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "ksivi/diffnet.hpp"
#include "ksivi/metrics.hpp"
#include "ksivi/trainer.hpp"
#include "ksivi/variational.hpp"

namespace ksivi {

/// Sample CSV: one sample per row, comma separated, 17 significant digits,
/// no header. `points` is d x n.
void write_samples_csv(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& points);
SampleSet read_samples_csv(const std::filesystem::path& path);

/// iteration,ksd2,bandwidth,beta_temp,grad_norm,wallclock_ms
void write_trace_csv(const std::filesystem::path& path, const LossTrace& trace);
LossTrace read_trace_csv(const std::filesystem::path& path);

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<SmoothnessSummary>& diags);

/// Checkpoint: one line of JSON header, then the flat parameters as
/// little-endian float64 (network in NetParams flat order, then rho).
void save_checkpoint(const std::filesystem::path& path, const SIVParams& params);
SIVParams load_checkpoint(const std::filesystem::path& path);

/// Same layout with an empty rho block.
void save_net(const std::filesystem::path& path, const NetParams& net);
NetParams load_net(const std::filesystem::path& path);

}  // namespace ksivi
