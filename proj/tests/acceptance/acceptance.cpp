#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ksivi/config.hpp"
#include "ksivi/estimators.hpp"
#include "ksivi/harness.hpp"
#include "ksivi/io.hpp"
#include "ksivi/metrics.hpp"
#include "ksivi/samplers.hpp"
#include "ksivi/trainer.hpp"

using namespace ksivi;
namespace fs = std::filesystem;

namespace {

fs::path g_work = "acceptance_work";

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Moments {
  double mean = 0.0, var = 0.0, se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= n - 1.0;
  m.se = std::sqrt(m.var / n);
  return m;
}

// Trapezoid rule for E_{u,u' ~ N(0,1)} g(a + b u, a + b u') on [-L, L]^2.
double gauss2_quadrature(const std::function<double(double, double)>& g, double a, double b, int n = 4001,
                         double half_width = 10.0) {
  const double du = 2.0 * half_width / (n - 1);
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    const double u = -half_width + i * du;
    x[i] = a + b * u;
    w[i] = du * std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI) * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += w[j] * g(x[i], x[j]);
    total += w[i] * row;
  }
  return total;
}

SIVParams gaussian_match(const NetArch& arch, const Eigen::VectorXd& mean, const Eigen::VectorXd& sd) {
  SIVParams p = siv_init(arch, 1.0, 3);
  p.net.weights.back().setZero();
  p.net.biases.back() = mean;
  p.rho = sd.array().log();
  return p;
}

ExperimentConfig preset_with(const std::string& name, const std::map<std::string, std::string>& overrides,
                             const fs::path& out) {
  KeyValueDoc d = preset_doc(name);
  for (const auto& [k, v] : overrides) d.set(k, v);
  d.set("output_dir", "\"" + out.string() + "\"");
  ExperimentConfig c = config_from_doc(d);
  c.validate();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SampleSet as_set(Eigen::MatrixXd m, std::string label) { return SampleSet{std::move(m), std::move(label)}; }

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome out;
  const BananaTarget target;
  const SIVParams p0 = siv_init(NetArch{{3, 8, 2}}, 0.5, 11);
  const Eigen::Index n = 40;
  Rng rng(5);
  const Eigen::MatrixXd z1 = normal_matrix(3, n, rng), xi1 = normal_matrix(2, n, rng);
  const Eigen::MatrixXd z2 = normal_matrix(3, n, rng), xi2 = normal_matrix(2, n, rng);
  KernelSpec k;
  k.bandwidth = median_bandwidth(siv_batch_from_noise(p0, z1, xi1).x);

  for (EstimatorKind kind : {EstimatorKind::vanilla, EstimatorKind::ustat}) {
    auto value = [&](const Eigen::VectorXd& flat) {
      SIVParams p = p0;
      p.assign_flat(flat);
      const SampleBatch b1 = siv_batch_from_noise(p, z1, xi1);
      const SampleBatch b2 = siv_batch_from_noise(p, z2, xi2);
      return ksd2_estimate(p, target, k, b1, &b2, kind, 1.0);
    };
    const SampleBatch b1 = siv_batch_from_noise(p0, z1, xi1);
    const SampleBatch b2 = siv_batch_from_noise(p0, z2, xi2);
    const KsdGradient g = kind == EstimatorKind::vanilla ? grad_vanilla(p0, target, k, b1, b2, 1.0)
                                                         : grad_ustat(p0, target, k, b1, 1.0);
    const Eigen::VectorXd flat = p0.flatten();
    const double h = 1e-4;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      auto at = [&](double s) {
        Eigen::VectorXd t = flat;
        t[i] += s * h;
        return value(t);
      };
      const double fd = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
      const double denom = std::max({std::abs(fd), std::abs(g.grad[i]), 1e-12});
      worst = std::max(worst, std::abs(fd - g.grad[i]) / denom);
    }
    out.check(std::abs(g.value - value(flat)) <= 1e-12 * std::max(1.0, std::abs(g.value)),
              to_string(kind) + ": value from the gradient call equals the value estimate");
    out.check(worst <= 1e-4, to_string(kind) + ": worst per-coordinate relative error " + fmt(worst) + " over " +
                                 std::to_string(flat.size()) + " coordinates (<= 1e-4)");
  }
  return out;
}

Outcome criterion2() {
  Outcome out;
  Eigen::VectorXd mean(2), sd(2);
  mean << 1.0, -2.0;
  sd << 0.5, 2.0;
  const auto target = GaussianMixtureTarget::diagonal_gaussian(mean, sd);
  const SIVParams p = gaussian_match(NetArch{{3, 16, 2}}, mean, sd);
  Rng rng(21);
  const SampleBatch b1 = siv_sample_batch(p, 100, rng), b2 = siv_sample_batch(p, 100, rng);
  KernelSpec k;
  k.bandwidth = median_bandwidth(b1.x);
  for (EstimatorKind kind : {EstimatorKind::vanilla, EstimatorKind::ustat}) {
    const KsdGradient g =
        kind == EstimatorKind::vanilla ? grad_vanilla(p, target, k, b1, b2, 1.0) : grad_ustat(p, target, k, b1, 1.0);
    const double net_norm = g.grad.head(p.net.n_params()).norm();
    out.check(std::abs(g.value) <= 1e-8, to_string(kind) + ": |ksd2| = " + fmt(std::abs(g.value)) + " (<= 1e-8)");
    out.check(net_norm <= 1e-7, to_string(kind) + ": net gradient norm " + fmt(net_norm) + " (<= 1e-7)");
  }
  return out;
}

Outcome criterion3() {
  Outcome out;
  // (a) vanilla and U-statistic estimates share a mean.
  const BananaTarget target;
  const SIVParams p = siv_init(NetArch{{3, 8, 2}}, 0.5, 11);
  KernelSpec k;
  k.bandwidth = 1.5;
  const int seeds = 400;
  const Eigen::Index n = 64;
  const Eigen::Index np = p.n_params();
  std::vector<double> vv, uv;
  Eigen::MatrixXd vg(np, seeds), ug(np, seeds);
  for (int s = 0; s < seeds; ++s) {
    Rng r1 = make_stream(1000 + s, 0), r2 = make_stream(1000 + s, 1);
    const SampleBatch a = siv_sample_batch(p, n, r1), b = siv_sample_batch(p, n, r1);
    const SampleBatch c = siv_sample_batch(p, 2 * n, r2);
    const KsdGradient gv = grad_vanilla(p, target, k, a, b, 1.0);
    const KsdGradient gu = grad_ustat(p, target, k, c, 1.0);
    vv.push_back(gv.value);
    uv.push_back(gu.value);
    vg.col(s) = gv.grad;
    ug.col(s) = gu.grad;
  }
  const Moments mv = moments(vv), mu = moments(uv);
  const double zval = std::abs(mv.mean - mu.mean) / std::hypot(mv.se, mu.se);
  out.check(zval <= 4.0, "value means " + fmt(mv.mean) + " vs " + fmt(mu.mean) + ", z = " + fmt(zval) + " (<= 4)");
  double worst_z = 0.0;
  for (Eigen::Index i = 0; i < np; ++i) {
    std::vector<double> gi(seeds), hi(seeds);
    for (int s = 0; s < seeds; ++s) {
      gi[s] = vg(i, s);
      hi[s] = ug(i, s);
    }
    const Moments x = moments(gi), y = moments(hi);
    worst_z = std::max(worst_z, std::abs(x.mean - y.mean) / std::hypot(x.se, y.se));
  }
  out.check(worst_z <= 4.0, "gradient means, worst z over " + std::to_string(np) + " coordinates = " + fmt(worst_z) +
                                " (<= 4)");

  // (b) U-statistic at N = 10^4 against quadrature: p = N(0, 1), q = N(0.5, 0.8^2), rbf h = 1.
  const double qm = 0.5, qs = 0.8;
  Eigen::VectorXd mean(1), sd(1);
  mean << 0.0;
  sd << 1.0;
  const auto normal = GaussianMixtureTarget::diagonal_gaussian(mean, sd);
  Eigen::VectorXd qmean(1), qsd(1);
  qmean << qm;
  qsd << qs;
  const SIVParams q = gaussian_match(NetArch{{1, 4, 1}}, qmean, qsd);
  KernelSpec unit;
  unit.bandwidth = 1.0;
  auto delta = [&](double x) { return -x + (x - qm) / (qs * qs); };
  const double oracle = gauss2_quadrature(
      [&](double x, double y) { return std::exp(-0.5 * (x - y) * (x - y)) * delta(x) * delta(y); }, qm, qs);
  std::vector<double> reps;
  for (int r = 0; r < 12; ++r) {
    Rng rng = make_stream(77, r);
    const SampleBatch b = siv_sample_batch(q, 10000, rng);
    reps.push_back(ksd2_ustat(b.x, f_vectors(b, q, normal, 1.0), unit));
  }
  const Moments m = moments(reps);
  const double sd1 = std::sqrt(m.var);
  out.check(std::abs(reps[0] - oracle) <= 3 * sd1, "N=1e4 U-statistic " + fmt(reps[0]) + " vs quadrature " +
                                                       fmt(oracle) + ", |diff| / SE = " +
                                                       fmt(std::abs(reps[0] - oracle) / sd1) + " (<= 3)");
  out.check(std::abs(m.mean - oracle) <= 3 * m.se, "mean of 12 replicates " + fmt(m.mean) +
                                                       ", |diff| / SE = " + fmt(std::abs(m.mean - oracle) / m.se));
  return out;
}

Outcome criterion4() {
  Outcome out;
  Eigen::VectorXd mean(1), sd(1);
  mean << 0.0;
  sd << 1.0;
  const auto normal = GaussianMixtureTarget::diagonal_gaussian(mean, sd);
  Eigen::VectorXd qmean(1), qsd(1);
  qmean << 0.5;
  qsd << 0.8;
  const SIVParams q = gaussian_match(NetArch{{1, 4, 1}}, qmean, qsd);
  KernelSpec k;
  k.bandwidth = 1.0;
  const int reps = 2000;
  for (EstimatorKind kind : {EstimatorKind::vanilla, EstimatorKind::ustat}) {
    auto variance_at = [&](Eigen::Index n) {
      std::vector<double> v;
      for (int r = 0; r < reps; ++r) {
        Rng rng = make_stream(500 + n, r);
        const SampleBatch a = siv_sample_batch(q, n, rng), b = siv_sample_batch(q, n, rng);
        v.push_back(ksd2_estimate(q, normal, k, a, &b, kind, 1.0));
      }
      return moments(v).var;
    };
    const double v1 = variance_at(100), v4 = variance_at(400);
    const double ratio = v1 / v4;
    out.check(ratio >= 2.5 && ratio <= 6.0, to_string(kind) + ": var(N=100) / var(N=400) = " + fmt(v1) + " / " +
                                                 fmt(v4) + " = " + fmt(ratio) + " (in [2.5, 6])");
  }
  return out;
}

Eigen::MatrixXd model_draws(const fs::path& checkpoint, Eigen::Index n, std::uint64_t seed) {
  const SIVParams p = load_checkpoint(checkpoint);
  Rng rng(seed);
  return siv_draw(p, n, rng);
}

Outcome criterion5() {
  Outcome out;
  {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig c = preset_with("toy-banana", {}, g_work / "c5_banana");
    const TrainRunSummary s = run_train(c);
    const TargetPtr target = build_target(c.target);
    const Eigen::Index n = 5000;
    const SampleSet q = as_set(model_draws(s.output_dir / "checkpoint.bin", n, 901), "ksivi");
    const SampleSet p = as_set(target->sample(n, 902), "exact");
    const double kl = kl_knn(q, p);
    double floor = 0.0;
    for (int r = 0; r < 5; ++r)
      floor += std::abs(kl_knn(as_set(target->sample(n, 910 + 2 * r), "a"), as_set(target->sample(n, 911 + 2 * r), "b")));
    floor /= 5;
    out.check(kl <= floor + 0.05, "banana kNN-KL " + fmt(kl) + " vs noise floor " + fmt(floor) + " + 0.05 (" +
                                      std::to_string(c.train.iterations) + " iterations, " + fmt(seconds_since(t0)) +
                                      " s)");
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig c = preset_with("toy-multimodal", {}, g_work / "c5_multimodal");
    const TrainRunSummary s = run_train(c);
    const Eigen::MatrixXd x = model_draws(s.output_dir / "checkpoint.bin", 100000, 903);
    const double left = static_cast<double>((x.row(0).array() < 0.0).count()) / x.cols();
    const double right = static_cast<double>((x.row(0).array() > 0.0).count()) / x.cols();
    out.check(left >= 0.25 && right >= 0.25, "multimodal basin shares " + fmt(left) + " / " + fmt(right) +
                                                  " of 1e5 draws (each >= 0.25, " + fmt(seconds_since(t0)) + " s)");
  }
  return out;
}

// The [sampler] and [target] sections of a dumped config; all that ground truth depends on.
std::string sampler_sections(const std::string& dump) {
  std::istringstream in(dump);
  std::string line, out;
  bool keep = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') keep = line == "[sampler]" || line == "[target]";
    if (keep) out += line + '\n';
  }
  return out;
}

// Ground truth via the harness; reused across criteria when already present.
SampleSet ground_truth(const ExperimentConfig& c) {
  const fs::path path = fs::path(c.output_dir) / "ground_truth.csv";
  const fs::path stamp = fs::path(c.output_dir) / "config.resolved.toml";
  if (fs::exists(path) && fs::exists(stamp) && sampler_sections(slurp(stamp)) == sampler_sections(c.to_doc().dump()))
    return read_samples_csv(path);
  return read_samples_csv(run_ground_truth(c));
}

Outcome criterion6() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const std::map<std::string, std::string> budget = {{"sampler.n_steps", "100000"}, {"sampler.n_particles", "500"}};
  auto sgld_overrides = budget;
  const ExperimentConfig gt_cfg = preset_with("blr-waveform", sgld_overrides, g_work / "c6_sgld");
  const SampleSet sgld = ground_truth(gt_cfg);
  auto mala_overrides = budget;
  mala_overrides["sampler.method"] = "\"mala\"";
  mala_overrides["sampler.seed"] = "17";
  const ExperimentConfig mala_cfg = preset_with("blr-waveform", mala_overrides, g_work / "c6_mala");
  const SampleSet mala = ground_truth(mala_cfg);
  out.notes.push_back("     ground truth: " + std::to_string(sgld.size()) + " SGLD and " + std::to_string(mala.size()) +
                      " MALA particles, " + std::to_string(gt_cfg.sampler.config.n_steps) + " steps, " +
                      fmt(seconds_since(t0)) + " s");

  const auto t1 = std::chrono::steady_clock::now();
  const ExperimentConfig c = preset_with("blr-waveform", {}, g_work / "c6_ksivi");
  const TrainRunSummary s = run_train(c);
  const SampleSet q = read_samples_csv(s.output_dir / "samples.csv");
  const double swd = sliced_wd(q, sgld);
  out.check(swd <= 0.2, "KSIVI vs SGLD sliced-WD " + fmt(swd) + " (<= 0.2; " + std::to_string(c.train.iterations) +
                            " iterations, " + fmt(seconds_since(t1)) + " s)");
  const double kl = kl_knn(mala, sgld);
  out.check(kl <= 0.1, "MALA vs SGLD kNN-KL " + fmt(kl) + " (<= 0.1)");
  return out;
}

Outcome criterion7() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig gt_cfg = preset_with("cd-dim100", {}, g_work / "c7_sgld");
  const SampleSet truth = ground_truth(gt_cfg);
  out.notes.push_back("     ground truth: " + std::to_string(truth.size()) + " SGLD particles, " +
                      std::to_string(gt_cfg.sampler.config.n_steps) + " steps, " + fmt(seconds_since(t0)) + " s");
  const ExperimentConfig c = preset_with("cd-dim100", {}, g_work / "c7_ksivi");
  const TrainRunSummary s = run_train(c);
  const SampleSet q = read_samples_csv(s.output_dir / "samples.csv");
  const double swd = sliced_wd(q, truth);
  out.check(swd <= 0.05, "KSIVI vs SGLD sliced-WD " + fmt(swd) + " (<= 0.05)");
  const double per10k = s.seconds_per_10k.empty() ? s.total_seconds
                                                  : std::accumulate(s.seconds_per_10k.begin(), s.seconds_per_10k.end(), 0.0) /
                                                        s.seconds_per_10k.size();
  out.check(per10k <= 5 * 90.48, "training time " + fmt(per10k) + " s per 10k iterations (<= 452.4)");
  return out;
}

Outcome criterion8() {
  Outcome out;
  for (int seed = 0; seed < 3; ++seed) {
    std::map<std::string, double> wd;
    for (const std::string kernel : {"riesz", "gaussian"}) {
      const std::string preset = "student-product-w10-" + kernel;
      const ExperimentConfig c =
          preset_with(preset, {{"seed", std::to_string(seed)}}, g_work / ("c8_" + kernel + "_" + std::to_string(seed)));
      const TrainRunSummary s = run_train(c);
      const TargetPtr target = build_target(c.target);
      const SampleSet q = as_set(model_draws(s.output_dir / "checkpoint.bin", 10000, 800 + seed), kernel);
      wd[kernel] = sliced_wd(q, as_set(target->sample(10000, 850 + seed), "exact"));
    }
    out.check(wd["riesz"] <= wd["gaussian"], "seed " + std::to_string(seed) + ": sliced-WD riesz " +
                                                 fmt(wd["riesz"]) + " <= gaussian " + fmt(wd["gaussian"]));
  }
  return out;
}

Outcome criterion9() {
  Outcome out;
  Rng rng(31);
  const Eigen::Index n = 5000;
  {
    const Eigen::MatrixXd x = normal_matrix(1, 20000, rng);
    const Eigen::MatrixXd y = (normal_matrix(1, 20000, rng).array() + 1.0).matrix();
    const double kl = kl_knn(as_set(x, "p"), as_set(y, "q"));
    out.check(std::abs(kl - 0.5) <= 0.1, "kNN-KL N(0,1) || N(1,1) = " + fmt(kl) + " (0.5 +- 0.1)");
  }
  {
    const SampleSet x = as_set(normal_matrix(3, n, rng), "x");
    out.check(sliced_wd(x, x) == 0.0, "sliced-WD(X, X) = " + fmt(sliced_wd(x, x)));
  }
  {
    KernelSpec k;
    k.bandwidth = 1.0;
    const double kxx = gauss2_quadrature([](double a, double b) { return std::exp(-0.5 * (a - b) * (a - b)); }, 0.0, 1.0);
    // E k(x, y) for x ~ N(0,1), y ~ N(1,1) equals E k(x, y' + 1) with both standard.
    const double kxy =
        gauss2_quadrature([](double a, double b) { return std::exp(-0.5 * (a - b - 1.0) * (a - b - 1.0)); }, 0.0, 1.0);
    const double oracle = 2 * kxx - 2 * kxy;
    std::vector<double> reps;
    for (int r = 0; r < 10; ++r) {
      const Eigen::MatrixXd x = normal_matrix(1, n, rng);
      const Eigen::MatrixXd y = (normal_matrix(1, n, rng).array() + 1.0).matrix();
      reps.push_back(mmd2_ustat(as_set(x, "x"), as_set(y, "y"), k));
    }
    const double sd = std::sqrt(moments(reps).var);
    out.check(std::abs(reps[0] - oracle) <= 3 * sd, "MMD^2 " + fmt(reps[0]) + " vs quadrature " + fmt(oracle) +
                                                        ", |diff| / SE = " + fmt(std::abs(reps[0] - oracle) / sd));
  }
  {
    double worst = 0.0;
    for (double rho : {0.8, -0.5, 0.3, 0.0}) {
      Eigen::MatrixXd x = normal_matrix(2, 20000, rng);
      x.row(1) = rho * x.row(0) + std::sqrt(1 - rho * rho) * x.row(1);
      worst = std::max(worst, std::abs(corr_pairs(as_set(x, "x"))(0, 1) - rho));
    }
    out.check(worst <= 0.02, "corr_pairs worst |error| " + fmt(worst) + " (<= 0.02)");
  }
  return out;
}

Outcome criterion10() {
  Outcome out;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(5), sd = Eigen::VectorXd::Ones(5);
  const auto target = GaussianMixtureTarget::diagonal_gaussian(mean, sd);
  SamplerConfig mc;
  mc.n_particles = 200;
  mc.n_steps = 5500;
  mc.burn_in = 500;
  mc.thin = 10;
  mc.step_size = 1.2;
  mc.seed = 3;
  const SamplerResult r = mala_run(target, mc);
  const Eigen::MatrixXd& pool = r.pooled;
  const Eigen::VectorXd m = pool.rowwise().mean();
  const Eigen::VectorXd var = (pool.colwise() - m).array().square().rowwise().sum() / (pool.cols() - 1.0);
  out.check(var.minCoeff() >= 0.97 && var.maxCoeff() <= 1.03,
            "MALA per-coordinate variance in [" + fmt(var.minCoeff()) + ", " + fmt(var.maxCoeff()) + "] from " +
                std::to_string(pool.cols()) + " pooled draws (within [0.97, 1.03])");
  out.check(r.acceptance_rate > 0.4 && r.acceptance_rate < 0.8,
            "MALA acceptance " + fmt(r.acceptance_rate) + " at step " + fmt(mc.step_size) + " (in (0.4, 0.8))");

  Rng rng(8);
  bool exact = true;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = normal_matrix(5, 1, rng).col(0) * 3.0;
    const double eps = 0.01 * (i + 1);
    const Eigen::VectorXd step = langevin_step(target, x, Eigen::VectorXd::Zero(5), eps);
    exact = exact && (step.array() == (x + 0.5 * eps * target.score(x)).array()).all();
  }
  const BananaTarget banana;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = normal_matrix(2, 1, rng).col(0);
    const Eigen::VectorXd step = langevin_step(banana, x, Eigen::VectorXd::Zero(2), 0.05);
    exact = exact && (step.array() == (x + 0.025 * banana.score(x)).array()).all();
  }
  out.check(exact, "drift-only Langevin step equals x + (eps / 2) s(x) bitwise");

  SamplerConfig sc;
  sc.n_particles = 64;
  sc.n_steps = 2000;
  sc.step_size = 0.01;
  sc.seed = 99;
  const SamplerResult s1 = sgld_run(banana, sc), s2 = sgld_run(banana, sc);
  SamplerConfig sc4 = sc;
  sc4.threads = 4;
  const SamplerResult s4 = sgld_run(banana, sc4);
  out.check(s1.particles == s2.particles && s1.particles == s4.particles,
            "SGLD: identical seeds give bitwise-identical particles (1 and 4 threads)");
  SamplerConfig mc2 = mc;
  mc2.n_steps = 600;
  mc2.thin = 0;
  const SamplerResult m1 = mala_run(target, mc2), m2 = mala_run(target, mc2);
  mc2.threads = 3;
  const SamplerResult m3 = mala_run(target, mc2);
  out.check(m1.particles == m2.particles && m1.particles == m3.particles && m1.acceptance_rate == m3.acceptance_rate,
            "MALA: identical seeds give bitwise-identical particles (1 and 3 threads)");
  return out;
}

Outcome criterion11() {
  Outcome out;
  for (const std::string& name : preset_names()) {
    const std::map<std::string, std::string> o = {{"train.iterations", "300"}, {"threads", "1"},
                                                  {"reproducible", "true"}};
    const ExperimentConfig a = preset_with(name, o, g_work / "c11" / name / "a");
    const ExperimentConfig b = preset_with(name, o, g_work / "c11" / name / "b");
    run_train(a);
    run_train(b);
    bool same = true;
    for (const char* f : {"trace.csv", "samples.csv", "checkpoint.bin"})
      same = same && slurp(fs::path(a.output_dir) / f) == slurp(fs::path(b.output_dir) / f);
    out.check(same, name + ": trace, samples and checkpoint identical across reruns");
  }
  for (const std::string name : {"toy-banana", "blr-waveform", "cd-dim50"}) {
    const std::map<std::string, std::string> o = {{"sampler.n_steps", "200"}, {"sampler.n_particles", "50"},
                                                  {"threads", "1"}, {"reproducible", "true"}};
    const auto a = run_ground_truth(preset_with(name, o, g_work / "c11" / name / "gt_a"));
    const auto b = run_ground_truth(preset_with(name, o, g_work / "c11" / name / "gt_b"));
    out.check(slurp(a) == slurp(b), name + ": ground-truth samples identical across reruns");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  std::string work = g_work.string();
  app.add_option("-c,--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 11));
  app.add_option("-w,--work", work, "Scratch directory for training runs");
  CLI11_PARSE(app, argc, argv);
  g_work = work;
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"gradient exactness", criterion1},
      {"exact stationarity", criterion2},
      {"estimator unbiasedness and equivalence", criterion3},
      {"variance scaling", criterion4},
      {"toy convergence", criterion5},
      {"bayesian logistic regression", criterion6},
      {"conditioned diffusion", criterion7},
      {"heavy-tail kernel ordering", criterion8},
      {"metric suite", criterion9},
      {"sampler suite", criterion10},
      {"reproducibility", criterion11},
  };
  const std::vector<double> limits = {10, 1, 120, 120, 1800, 7200, 14400, 3600, 300, 600, 0};
  if (selected.empty())
    for (int i = 1; i <= 11; ++i) selected.push_back(i);

  bool all_pass = true;
  for (int id : selected) {
    const auto& [title, fn] = all[id - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (limits[id - 1] > 0) o.check(secs <= limits[id - 1], "runtime " + fmt(secs) + " s (<= " + fmt(limits[id - 1]) + ")");
    for (const auto& n : o.notes) std::cout << "  " << n << '\n';
    std::cout << "criterion " << id << " (" << title << "): " << (o.pass ? "PASS" : "FAIL") << '\n' << std::flush;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
