#include "ksivi/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "ksivi/error.hpp"
#include "ksivi/rng.hpp"

namespace ksivi {

void SamplerConfig::validate() const {
  if (n_particles < 1) throw ConfigError("sampler.n_particles must be >= 1");
  if (n_steps < 1) throw ConfigError("sampler.n_steps must be >= 1");
  if (!(step_size > 0.0)) throw ConfigError("sampler.step_size must be positive");
  if (burn_in < 0 || burn_in >= n_steps) throw ConfigError("sampler.burn_in must lie in [0, n_steps)");
  if (thin < 0) throw ConfigError("sampler.thin must be >= 0");
  if (threads < 1) throw ConfigError("sampler.threads must be >= 1");
}

std::vector<std::uint64_t> particle_seeds(std::uint64_t seed, int n_particles) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_particles));
  for (int i = 0; i < n_particles; ++i) seeds[static_cast<std::size_t>(i)] = mix_seed(seed, static_cast<std::uint64_t>(i));
  return seeds;
}

Eigen::VectorXd langevin_step(const TargetModel& target, const VecRef& x, const VecRef& eta, double step_size) {
  return x + 0.5 * step_size * target.score(x) + std::sqrt(step_size) * eta;
}

double mala_log_accept(const TargetModel& target, const VecRef& x, const VecRef& proposal, double step_size) {
  const Eigen::VectorXd fwd = proposal - x - 0.5 * step_size * target.score(x);
  const Eigen::VectorXd bwd = x - proposal - 0.5 * step_size * target.score(proposal);
  return target.log_density(proposal) - target.log_density(x) +
         (fwd.squaredNorm() - bwd.squaredNorm()) / (2.0 * step_size);
}

namespace {

enum class Scheme { sgld, mala };

struct ChunkOutput {
  Eigen::MatrixXd particles;
  std::vector<Eigen::MatrixXd> pooled;  // one d x chunk matrix per pooled step
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;
  std::string error;
};

void check_finite(const Eigen::MatrixXd& x, Eigen::Index first_particle, std::int64_t step, ChunkOutput& out) {
  if (x.allFinite()) return;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (!x.col(j).allFinite()) {
      out.error = "particle " + std::to_string(first_particle + j) + " became non-finite at step " +
                  std::to_string(step);
      return;
    }
}

// Runs particles [first, first + n) as one batch. Each particle only ever
// draws from its own stream, so results do not depend on chunking.
ChunkOutput run_chunk(Scheme scheme, const TargetModel& target, const SamplerConfig& cfg, Eigen::MatrixXd x,
                      std::vector<Rng> streams, Eigen::Index first) {
  ChunkOutput out;
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  const double eps = cfg.step_size;
  const double root = std::sqrt(eps);
  // One distribution per stream: normal_distribution caches half of each pair.
  std::vector<std::normal_distribution<double>> normal(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd noise(d, n);

  Eigen::MatrixXd score = target.score_batch(x);
  Eigen::VectorXd logp;
  if (scheme == Scheme::mala) logp = target.log_density_batch(x);

  for (std::int64_t step = 0; step < cfg.n_steps; ++step) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < d; ++i)
        noise(i, j) = normal[static_cast<std::size_t>(j)](streams[static_cast<std::size_t>(j)]);

    if (scheme == Scheme::sgld) {
      x += 0.5 * eps * score + root * noise;
      check_finite(x, first, step, out);
      if (!out.error.empty()) return out;
      score = target.score_batch(x);
    } else {
      Eigen::MatrixXd prop = x + 0.5 * eps * score + root * noise;
      check_finite(prop, first, step, out);
      if (!out.error.empty()) return out;
      const Eigen::MatrixXd prop_score = target.score_batch(prop);
      const Eigen::VectorXd prop_logp = target.log_density_batch(prop);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double fwd = (prop.col(j) - x.col(j) - 0.5 * eps * score.col(j)).squaredNorm();
        const double bwd = (x.col(j) - prop.col(j) - 0.5 * eps * prop_score.col(j)).squaredNorm();
        const double log_alpha = prop_logp[j] - logp[j] + (fwd - bwd) / (2.0 * eps);
        const double u = unif(streams[static_cast<std::size_t>(j)]);
        ++out.proposed;
        if (std::log(u) < log_alpha) {
          ++out.accepted;
          x.col(j) = prop.col(j);
          score.col(j) = prop_score.col(j);
          logp[j] = prop_logp[j];
        }
      }
    }
    if (cfg.thin > 0 && step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0) out.pooled.push_back(x);
  }
  out.particles = std::move(x);
  return out;
}

SamplerResult run(Scheme scheme, const TargetModel& target, const SamplerConfig& config,
                  const std::optional<Eigen::MatrixXd>& init, const std::vector<std::uint64_t>& seeds_in) {
  config.validate();
  const int d = target.dim();
  const int n = config.n_particles;
  std::vector<std::uint64_t> seeds = seeds_in.empty() ? particle_seeds(config.seed, n) : seeds_in;
  if (static_cast<int>(seeds.size()) != n) throw ConfigError("need one seed per particle");

  std::vector<Rng> streams;
  streams.reserve(seeds.size());
  for (auto s : seeds) streams.emplace_back(s);

  Eigen::MatrixXd x0(d, n);
  if (init) {
    require_dims(init->rows() == d && init->cols() == n, "initial particle matrix has the wrong shape");
    x0 = *init;
  } else {
    for (int j = 0; j < n; ++j) {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int i = 0; i < d; ++i) x0(i, j) = normal(streams[static_cast<std::size_t>(j)]);
    }
  }

  const int n_threads = std::min(config.threads, n);
  std::vector<ChunkOutput> outputs(static_cast<std::size_t>(n_threads));
  std::vector<Eigen::Index> starts(static_cast<std::size_t>(n_threads) + 1);
  for (int c = 0; c <= n_threads; ++c) starts[static_cast<std::size_t>(c)] = static_cast<Eigen::Index>(n) * c / n_threads;

  auto work = [&](int c) {
    const Eigen::Index a = starts[static_cast<std::size_t>(c)];
    const Eigen::Index b = starts[static_cast<std::size_t>(c) + 1];
    std::vector<Rng> chunk_streams(streams.begin() + a, streams.begin() + b);
    outputs[static_cast<std::size_t>(c)] =
        run_chunk(scheme, target, config, x0.middleCols(a, b - a), std::move(chunk_streams), a);
  };
  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int c = 0; c < n_threads; ++c) pool.emplace_back(work, c);
    for (auto& t : pool) t.join();
  }

  SamplerResult result;
  result.steps = config.n_steps;
  result.particles.resize(d, n);
  std::int64_t accepted = 0, proposed = 0;
  for (int c = 0; c < n_threads; ++c) {
    auto& o = outputs[static_cast<std::size_t>(c)];
    if (!o.error.empty()) throw NumericError((scheme == Scheme::sgld ? "sgld: " : "mala: ") + o.error);
    const Eigen::Index a = starts[static_cast<std::size_t>(c)];
    result.particles.middleCols(a, o.particles.cols()) = o.particles;
    accepted += o.accepted;
    proposed += o.proposed;
  }
  if (config.thin > 0) {
    const std::size_t n_pooled = outputs.front().pooled.size();
    result.pooled.resize(d, static_cast<Eigen::Index>(n_pooled) * n);
    for (std::size_t s = 0; s < n_pooled; ++s)
      for (int c = 0; c < n_threads; ++c) {
        const auto& m = outputs[static_cast<std::size_t>(c)].pooled[s];
        result.pooled.middleCols(static_cast<Eigen::Index>(s) * n + starts[static_cast<std::size_t>(c)], m.cols()) = m;
      }
  }
  result.acceptance_rate = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 1.0;
  return result;
}

}  // namespace

SamplerResult sgld_run(const TargetModel& target, const SamplerConfig& config, const std::optional<Eigen::MatrixXd>& init,
                       const std::vector<std::uint64_t>& seeds) {
  return run(Scheme::sgld, target, config, init, seeds);
}

SamplerResult mala_run(const TargetModel& target, const SamplerConfig& config, const std::optional<Eigen::MatrixXd>& init,
                       const std::vector<std::uint64_t>& seeds) {
  return run(Scheme::mala, target, config, init, seeds);
}

}  // namespace ksivi
