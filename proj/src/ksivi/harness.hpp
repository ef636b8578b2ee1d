#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ksivi/config.hpp"
#include "ksivi/metrics.hpp"

namespace ksivi {

std::string build_id();

struct TrainRunSummary {
  std::filesystem::path output_dir;
  std::int64_t iterations = 0;
  double final_ksd2 = 0.0;
  double total_seconds = 0.0;
  std::vector<double> seconds_per_10k;
};

/// Trains, then writes checkpoint.bin, trace.csv, samples.csv,
/// diagnostics.csv (when enabled), timing.json and manifest.json.
TrainRunSummary run_train(const ExperimentConfig& cfg);

/// Runs the configured Langevin sampler; writes ground_truth.csv,
/// ground_truth.json and manifest.json.
std::filesystem::path run_ground_truth(const ExperimentConfig& cfg);

/// Metric record for samples `a` (approximation) against `b` (reference).
nlohmann::json evaluate_samples(const SampleSet& a, const SampleSet& b, const EvaluateSpec& spec);
nlohmann::json evaluate_files(const std::filesystem::path& a, const std::filesystem::path& b, const EvaluateSpec& spec);

/// Jacobian-norm summary of a checkpoint's mean network. `zero_probes` uses
/// z = 0 for every probe instead of z ~ N(0, I).
nlohmann::json diagnose_checkpoint(const std::filesystem::path& checkpoint, int n_probes, std::uint64_t seed,
                                   bool zero_probes = false);

}  // namespace ksivi
