#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ksivi/error.hpp"
#include "ksivi/samplers.hpp"
#include "support.hpp"

using namespace ksivi;

namespace {

GaussianMixtureTarget std_normal(int d) {
  return GaussianMixtureTarget::diagonal_gaussian(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}

}  // namespace

TEST_CASE("sampler config validation") {
  SamplerConfig c;
  c.step_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SamplerConfig{};
  c.burn_in = c.n_steps;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SamplerConfig{};
  c.n_particles = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("langevin step without noise is the drift") {
  const BananaTarget banana;
  const Eigen::Vector2d x(0.4, 0.2);
  const Eigen::VectorXd expect = x + 0.5 * 0.01 * banana.score(x);
  CHECK(langevin_step(banana, x, Eigen::Vector2d::Zero(), 0.01) == expect);
}

TEST_CASE("mala acceptance of a stationary proposal") {
  const BananaTarget banana;
  const Eigen::Vector2d x(0.4, 0.2);
  CHECK(mala_log_accept(banana, x, x, 0.1) == 0.0);
  // gaussian target: log ratio matches the closed form
  const auto g = std_normal(1);
  const double a = 0.3, b = -0.8, eps = 0.5;
  const double fwd = b - a * (1 - eps / 2), bwd = a - b * (1 - eps / 2);
  const double expect = -0.5 * b * b + 0.5 * a * a + (fwd * fwd - bwd * bwd) / (2 * eps);
  CHECK(mala_log_accept(g, Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b), eps) ==
        doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("sgld is deterministic and thread-invariant") {
  const BananaTarget banana;
  SamplerConfig c;
  c.n_particles = 37;
  c.n_steps = 200;
  c.step_size = 1e-3;
  c.seed = 9;
  const auto a = sgld_run(banana, c);
  const auto b = sgld_run(banana, c);
  CHECK(a.particles == b.particles);
  c.threads = 4;
  CHECK(sgld_run(banana, c).particles == a.particles);
  c.seed = 10;
  CHECK(sgld_run(banana, c).particles != a.particles);
}

TEST_CASE("permuting particle seeds permutes particles") {
  const auto g = std_normal(3);
  SamplerConfig c;
  c.n_particles = 10;
  c.n_steps = 50;
  c.step_size = 0.05;
  std::vector<std::uint64_t> seeds = particle_seeds(4, 10);
  std::vector<std::uint64_t> rev(seeds.rbegin(), seeds.rend());
  for (bool mala : {false, true}) {
    const auto a = mala ? mala_run(g, c, std::nullopt, seeds) : sgld_run(g, c, std::nullopt, seeds);
    const auto b = mala ? mala_run(g, c, std::nullopt, rev) : sgld_run(g, c, std::nullopt, rev);
    for (int j = 0; j < 10; ++j) CHECK(a.particles.col(j) == b.particles.col(9 - j));
  }
}

TEST_CASE("sgld stationary variance on a standard normal") {
  const auto g = std_normal(5);
  SamplerConfig c;
  c.n_particles = 500;
  c.n_steps = 50000;
  c.step_size = 0.01;
  c.seed = 1;
  c.threads = 4;
  c.burn_in = 1000;
  c.thin = 100;
  const auto r = sgld_run(g, c);
  REQUIRE(r.pooled.cols() == 490 * 500);
  for (int i = 0; i < 5; ++i) {
    const Eigen::ArrayXd row = r.pooled.row(i).array();
    const double var = (row - row.mean()).square().sum() / (row.size() - 1);
    CHECK(var >= 0.95);
    CHECK(var <= 1.10);
  }
}

TEST_CASE("mala on a 1-d gaussian passes a KS test") {
  const auto g = std_normal(1);
  SamplerConfig c;
  c.n_particles = 100;
  c.n_steps = 1100;
  c.burn_in = 100;
  c.thin = 10;
  c.step_size = 1.0;
  c.seed = 3;
  const auto r = mala_run(g, c);
  REQUIRE(r.pooled.cols() == 100 * 100);
  std::vector<double> xs(r.pooled.data(), r.pooled.data() + r.pooled.size());
  CHECK(testsupport::ks_statistic(xs, testsupport::normal_cdf) < testsupport::ks_crit_1pct(xs.size()));
  CHECK(r.acceptance_rate > 0.5);
  CHECK(r.acceptance_rate < 1.0);
}

TEST_CASE("divergence names the particle and step") {
  const BananaTarget banana;
  SamplerConfig c;
  c.n_particles = 3;
  c.n_steps = 100;
  c.step_size = 10.0;
  try {
    sgld_run(banana, c);
    FAIL("expected divergence");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("particle") != std::string::npos);
    CHECK(msg.find("step") != std::string::npos);
  }
}

TEST_CASE("explicit initial particles") {
  const auto g = std_normal(2);
  SamplerConfig c;
  c.n_particles = 4;
  c.n_steps = 1;
  c.step_size = 1e-12;
  const Eigen::MatrixXd init = Eigen::MatrixXd::Constant(2, 4, 3.0);
  CHECK((sgld_run(g, c, init).particles - init).cwiseAbs().maxCoeff() < 1e-5);
  CHECK_THROWS_AS(sgld_run(g, c, Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}
