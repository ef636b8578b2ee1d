#include "ksivi/harness.hpp"

#include <chrono>
#include <fstream>

#include "ksivi/error.hpp"
#include "ksivi/io.hpp"
#include "ksivi/rng.hpp"
#include "ksivi/samplers.hpp"

#ifndef KSIVI_BUILD_ID
#define KSIVI_BUILD_ID "unknown"
#endif

namespace ksivi {

using nlohmann::json;
namespace fs = std::filesystem;

std::string build_id() { return KSIVI_BUILD_ID; }

namespace {

json config_json(const ExperimentConfig& cfg) {
  json j = json::object();
  const KeyValueDoc doc = cfg.to_doc();
  for (const auto& [k, v] : doc.values()) j[k] = v;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

fs::path prepare_output(const ExperimentConfig& cfg) {
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  write_text(out / "config.resolved.toml", cfg.to_doc().dump());
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

TrainRunSummary run_train(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path out = prepare_output(cfg);
  const TargetPtr target = build_target(cfg.target, cfg.base_dir);
  SIVParams init = siv_init(cfg.arch, cfg.initial_sigma, cfg.init_seed, cfg.init);

  TrainResult result;
  try {
    result = train(cfg.train, *target, std::move(init));
  } catch (const TrainingDiverged& e) {
    save_checkpoint(out / "diverged_checkpoint.bin", e.snapshot());
    write_json(out / "failure.json", {{"iteration", e.iteration()}, {"error", e.what()}});
    throw;
  }

  save_checkpoint(out / "checkpoint.bin", result.params);
  write_trace_csv(out / "trace.csv", result.trace);
  if (!result.diagnostics.empty()) write_diagnostics_csv(out / "diagnostics.csv", result.diagnostics);
  Rng eval_rng = make_stream(cfg.train.seed, 2);
  write_samples_csv(out / "samples.csv", siv_draw(result.params, cfg.eval_samples, eval_rng));

  TrainRunSummary summary;
  summary.output_dir = out;
  summary.iterations = cfg.train.iterations;
  summary.final_ksd2 = result.trace.empty() ? 0.0 : result.trace.back().ksd2;
  summary.total_seconds = result.total_seconds;
  summary.seconds_per_10k = result.seconds_per_10k;

  write_json(out / "timing.json",
             {{"total_seconds", result.total_seconds}, {"seconds_per_10k_iterations", result.seconds_per_10k}});
  write_json(out / "manifest.json", {{"command", "train"},
                                     {"build_id", build_id()},
                                     {"seed", cfg.seed},
                                     {"train_seed", cfg.train.seed},
                                     {"init_seed", cfg.init_seed},
                                     {"threads", cfg.threads},
                                     {"reproducible", cfg.reproducible},
                                     {"finished_utc", utc_now()},
                                     {"wallclock_seconds", result.total_seconds},
                                     {"iterations", cfg.train.iterations},
                                     {"batch_size", cfg.train.batch_size},
                                     {"eval_samples", cfg.eval_samples},
                                     {"artifacts", {"checkpoint.bin", "trace.csv", "samples.csv", "timing.json"}},
                                     {"config", config_json(cfg)}});
  return summary;
}

fs::path run_ground_truth(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path out = prepare_output(cfg);
  const TargetPtr target = build_target(cfg.target, cfg.base_dir);
  SamplerConfig sc = cfg.sampler.config;
  if (cfg.reproducible) sc.threads = 1;
  const auto start = std::chrono::steady_clock::now();
  const SamplerResult r = cfg.sampler.method == "mala" ? mala_run(*target, sc) : sgld_run(*target, sc);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path samples = out / "ground_truth.csv";
  write_samples_csv(samples, r.particles);
  write_json(out / "ground_truth.json", {{"method", cfg.sampler.method},
                                         {"n_particles", sc.n_particles},
                                         {"n_steps", sc.n_steps},
                                         {"step_size", sc.step_size},
                                         {"acceptance_rate", r.acceptance_rate}});
  write_json(out / "manifest.json", {{"command", "sample-ground-truth"},
                                     {"build_id", build_id()},
                                     {"seed", cfg.sampler.config.seed},
                                     {"threads", sc.threads},
                                     {"reproducible", cfg.reproducible},
                                     {"finished_utc", utc_now()},
                                     {"wallclock_seconds", seconds},
                                     {"artifacts", {"ground_truth.csv", "ground_truth.json"}},
                                     {"config", config_json(cfg)}});
  return samples;
}

json evaluate_samples(const SampleSet& a, const SampleSet& b, const EvaluateSpec& spec) {
  a.validate();
  b.validate();
  require_dims(a.dim() == b.dim(), "sample files differ in dimension (" + std::to_string(a.dim()) + " vs " +
                                       std::to_string(b.dim()) + ")");
  json rec = {{"a", {{"label", a.label}, {"n", a.size()}, {"dim", a.dim()}}},
              {"b", {{"label", b.label}, {"n", b.size()}, {"dim", b.dim()}}},
              {"seed", spec.seed},
              {"metrics", json::object()}};
  for (const auto& m : spec.metrics) {
    if (m == "sliced_wd") {
      rec["metrics"]["sliced_wd"] = {{"value", sliced_wd(a, b, spec.n_proj, spec.seed)},
                                     {"order", 2},
                                     {"n_proj", spec.n_proj},
                                     {"seed", spec.seed},
                                     {"n_used", std::min(a.size(), b.size())}};
    } else if (m == "mmd") {
      KernelSpec k = spec.mmd_kernel;
      k.family = KernelFamily::rbf;
      if (spec.mmd_bandwidth > 0.0) {
        k.bandwidth = spec.mmd_bandwidth;
      } else {
        const Eigen::Index n = std::min<Eigen::Index>(b.size(), 1000);
        k.bandwidth = median_bandwidth(b.points.leftCols(n));
      }
      rec["metrics"]["mmd"] = {{"mmd2_ustat", mmd2_ustat(a, b, k)},
                               {"kernel", "rbf"},
                               {"bandwidth", k.bandwidth}};
    } else if (m == "kl_knn") {
      // Same-distribution calibration: split the reference set in half.
      const Eigen::Index half = b.size() / 2;
      SampleSet b1{b.points.leftCols(half), b.label + "[0:n/2]"};
      SampleSet b2{b.points.rightCols(b.size() - half), b.label + "[n/2:n]"};
      rec["metrics"]["kl_knn"] = {{"value", kl_knn(a, b, spec.knn_k)},
                                  {"k", spec.knn_k},
                                  {"noise_floor", std::abs(kl_knn(b1, b2, spec.knn_k))},
                                  {"noise_floor_n", half}};
    } else if (m == "corr") {
      const Eigen::MatrixXd ca = corr_pairs(a);
      const Eigen::MatrixXd cb = corr_pairs(b);
      const Eigen::Index d = a.dim();
      const double pairs = static_cast<double>(d * (d - 1) / 2);
      const double diff = (ca - cb).cwiseAbs().sum();
      rec["metrics"]["corr"] = {{"mean_abs_diff", pairs > 0 ? diff / pairs : 0.0},
                                {"max_abs_diff", (ca - cb).cwiseAbs().maxCoeff()},
                                {"n_pairs", d * (d - 1) / 2}};
    } else {
      throw ConfigError("evaluate.metrics: unknown metric '" + m + "'");
    }
  }
  return rec;
}

json evaluate_files(const fs::path& a, const fs::path& b, const EvaluateSpec& spec) {
  SampleSet sa = read_samples_csv(a);
  SampleSet sb = read_samples_csv(b);
  sa.label = a.string();
  sb.label = b.string();
  return evaluate_samples(sa, sb, spec);
}

json diagnose_checkpoint(const fs::path& checkpoint, int n_probes, std::uint64_t seed, bool zero_probes) {
  const SIVParams p = load_checkpoint(checkpoint);
  SmoothnessSummary s;
  if (zero_probes) {
    if (n_probes < 1) throw ConfigError("diagnose needs at least one probe");
    const double g = net_jacobian_frobenius(p.net, Eigen::VectorXd::Zero(p.mixing_dim()));
    s = {0, g, g, g, n_probes};
  } else {
    Rng rng(seed);
    s = smoothness_diagnostic(p, n_probes, rng);
  }
  return {{"checkpoint", checkpoint.string()},
          {"widths", p.net.arch.widths},
          {"n_probes", s.n_probes},
          {"probe_seed", seed},
          {"zero_probes", zero_probes},
          {"jacobian_norm_mean", s.mean},
          {"jacobian_norm_max", s.max},
          {"jacobian_norm_min", s.min},
          {"sigma_min", p.sigma().minCoeff()},
          {"sigma_max", p.sigma().maxCoeff()}};
}

}  // namespace ksivi
