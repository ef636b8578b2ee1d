#include "ksivi/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "ksivi/error.hpp"
#include "ksivi/rng.hpp"

namespace ksivi {

// ---------------------------------------------------------------------------
// TargetModel defaults

void TargetModel::check_point(const VecRef& x) const {
  require_dims(x.size() == dim(), name() + ": point has dimension " + std::to_string(x.size()) + ", expected " +
                                      std::to_string(dim()));
}

Eigen::VectorXd TargetModel::log_density_batch(const MatRef& x) const {
  Eigen::VectorXd out(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out[j] = log_density(x.col(j));
  return out;
}

Eigen::MatrixXd TargetModel::score_batch(const MatRef& x) const {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = score(x.col(j));
  return out;
}

Eigen::MatrixXd TargetModel::hvp_batch(const MatRef& x, const MatRef& v) const {
  require_dims(x.rows() == v.rows() && x.cols() == v.cols(), "hvp batch shapes differ");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = hvp(x.col(j), v.col(j));
  return out;
}

Eigen::MatrixXd TargetModel::sample(Eigen::Index, std::uint64_t) const {
  throw std::logic_error(name() + " has no exact sampler");
}

// ---------------------------------------------------------------------------
// Banana

Eigen::Matrix2d BananaTarget::default_cov() {
  Eigen::Matrix2d c;
  c << 1.0, 0.9, 0.9, 1.0;
  return c;
}

BananaTarget::BananaTarget(const Eigen::Matrix2d& cov) : cov_(cov) {
  Eigen::LLT<Eigen::Matrix2d> llt(cov_);
  if (llt.info() != Eigen::Success) throw ConfigError("banana covariance is not positive definite");
  chol_ = llt.matrixL();
  precision_ = cov_.inverse();
}

namespace {
Eigen::Vector2d banana_latent(const VecRef& x) { return {x[0], x[1] - x[0] * x[0] - 1.0}; }
}  // namespace

double BananaTarget::log_density(const VecRef& x) const {
  check_point(x);
  const Eigen::Vector2d v = banana_latent(x);
  return -0.5 * v.dot(precision_ * v);
}

Eigen::VectorXd BananaTarget::score(const VecRef& x) const {
  check_point(x);
  const Eigen::Vector2d pv = precision_ * banana_latent(x);
  // J = [[1, 0], [-2 x1, 1]]; score = -J^T P v
  return Eigen::Vector2d(-(pv[0] - 2.0 * x[0] * pv[1]), -pv[1]);
}

Eigen::VectorXd BananaTarget::hvp(const VecRef& x, const VecRef& v) const {
  check_point(x);
  const Eigen::Vector2d pv = precision_ * banana_latent(x);
  Eigen::Matrix2d jac;
  jac << 1.0, 0.0, -2.0 * x[0], 1.0;
  Eigen::Vector2d out = -(jac.transpose() * (precision_ * (jac * v)));
  out[0] += 2.0 * pv[1] * v[0];
  return out;
}

Eigen::MatrixXd BananaTarget::sample(Eigen::Index n, std::uint64_t seed) const {
  Rng rng(seed);
  const Eigen::MatrixXd v = chol_ * normal_matrix(2, n, rng);
  Eigen::MatrixXd x(2, n);
  x.row(0) = v.row(0);
  x.row(1) = v.row(0).array().square() + v.row(1).array() + 1.0;
  return x;
}

// ---------------------------------------------------------------------------
// Gaussian mixture

GaussianMixtureTarget::GaussianMixtureTarget(std::vector<GaussianComponent> components, std::string name)
    : components_(std::move(components)), name_(std::move(name)) {
  if (components_.empty()) throw ConfigError("mixture needs at least one component");
  dim_ = static_cast<int>(components_.front().mean.size());
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw ConfigError("mixture weights must be positive");
    if (c.mean.size() != dim_ || c.cov.rows() != dim_ || c.cov.cols() != dim_)
      throw DimensionError("mixture component shapes disagree");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
  for (const auto& c : components_) {
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    if (llt.info() != Eigen::Success) throw ConfigError("mixture covariance is not positive definite");
    Cached cache;
    cache.chol = llt.matrixL();
    cache.precision = llt.solve(Eigen::MatrixXd::Identity(dim_, dim_));
    cache.log_norm = std::log(c.weight) - cache.chol.diagonal().array().log().sum();
    cached_.push_back(std::move(cache));
  }
}

GaussianMixtureTarget GaussianMixtureTarget::multimodal() {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  return GaussianMixtureTarget({{0.5, Eigen::Vector2d(-2.0, 0.0), id}, {0.5, Eigen::Vector2d(2.0, 0.0), id}},
                               "multimodal");
}

GaussianMixtureTarget GaussianMixtureTarget::xshaped() {
  Eigen::MatrixXd c1(2, 2), c2(2, 2);
  c1 << 2.0, 1.8, 1.8, 2.0;
  c2 << 2.0, -1.8, -1.8, 2.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  return GaussianMixtureTarget({{0.5, zero, c1}, {0.5, zero, c2}}, "xshaped");
}

GaussianMixtureTarget GaussianMixtureTarget::diagonal_gaussian(const Eigen::VectorXd& mean,
                                                               const Eigen::VectorXd& stddev) {
  require_dims(mean.size() == stddev.size(), "gaussian mean/stddev lengths differ");
  return GaussianMixtureTarget({{1.0, mean, stddev.array().square().matrix().asDiagonal()}}, "gaussian");
}

void GaussianMixtureTarget::responsibilities(const VecRef& x, Eigen::VectorXd& resp,
                                             std::vector<Eigen::VectorXd>& pulls) const {
  const std::size_t m = components_.size();
  resp.resize(static_cast<Eigen::Index>(m));
  pulls.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    pulls[i] = cached_[i].precision * (components_[i].mean - x);
    resp[static_cast<Eigen::Index>(i)] = cached_[i].log_norm - 0.5 * (components_[i].mean - x).dot(pulls[i]);
  }
  const double top = resp.maxCoeff();
  resp = (resp.array() - top).exp();
  resp /= resp.sum();
}

double GaussianMixtureTarget::log_density(const VecRef& x) const {
  check_point(x);
  Eigen::VectorXd logs(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const Eigen::VectorXd diff = components_[i].mean - x;
    logs[static_cast<Eigen::Index>(i)] = cached_[i].log_norm - 0.5 * diff.dot(cached_[i].precision * diff);
  }
  const double top = logs.maxCoeff();
  return top + std::log((logs.array() - top).exp().sum());
}

Eigen::VectorXd GaussianMixtureTarget::score(const VecRef& x) const {
  check_point(x);
  Eigen::VectorXd resp;
  std::vector<Eigen::VectorXd> pulls;
  responsibilities(x, resp, pulls);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  for (std::size_t i = 0; i < pulls.size(); ++i) s += resp[static_cast<Eigen::Index>(i)] * pulls[i];
  return s;
}

Eigen::VectorXd GaussianMixtureTarget::hvp(const VecRef& x, const VecRef& v) const {
  check_point(x);
  Eigen::VectorXd resp;
  std::vector<Eigen::VectorXd> pulls;
  responsibilities(x, resp, pulls);
  // H = sum_m r_m (g_m g_m^T - P_m) - s s^T
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (std::size_t i = 0; i < pulls.size(); ++i) {
    const double r = resp[static_cast<Eigen::Index>(i)];
    s += r * pulls[i];
    out += r * (pulls[i] * pulls[i].dot(v) - cached_[i].precision * v);
  }
  out -= s * s.dot(v);
  return out;
}

Eigen::MatrixXd GaussianMixtureTarget::sample(Eigen::Index n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> weights;
  for (const auto& c : components_) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  Eigen::MatrixXd out(dim_, n);
  Eigen::MatrixXd eta(dim_, 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t m = pick(rng);
    fill_normal(eta, rng);
    out.col(j) = components_[m].mean + cached_[m].chol * eta.col(0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Student-t product

StudentTProductTarget::StudentTProductTarget(Eigen::VectorXd nu, Eigen::VectorXd scale)
    : nu_(std::move(nu)), scale_(std::move(scale)) {
  require_dims(nu_.size() == scale_.size() && nu_.size() > 0, "student-t nu/scale lengths differ");
  if ((nu_.array() <= 0.0).any() || (scale_.array() <= 0.0).any())
    throw ConfigError("student-t nu and scale must be positive");
}

double StudentTProductTarget::log_density(const VecRef& x) const {
  check_point(x);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double u = x[i] / scale_[i];
    lp -= 0.5 * (nu_[i] + 1.0) * std::log1p(u * u / nu_[i]);
  }
  return lp;
}

Eigen::VectorXd StudentTProductTarget::score(const VecRef& x) const {
  check_point(x);
  Eigen::VectorXd s(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = nu_[i] * scale_[i] * scale_[i];
    s[i] = -(nu_[i] + 1.0) * x[i] / (a + x[i] * x[i]);
  }
  return s;
}

Eigen::VectorXd StudentTProductTarget::hvp(const VecRef& x, const VecRef& v) const {
  check_point(x);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = nu_[i] * scale_[i] * scale_[i];
    const double q = a + x[i] * x[i];
    out[i] = -(nu_[i] + 1.0) * (a - x[i] * x[i]) / (q * q) * v[i];
  }
  return out;
}

Eigen::MatrixXd StudentTProductTarget::sample(Eigen::Index n, std::uint64_t seed) const {
  Rng rng(seed);
  Eigen::MatrixXd out(nu_.size(), n);
  std::vector<std::student_t_distribution<double>> dists;
  for (Eigen::Index i = 0; i < nu_.size(); ++i) dists.emplace_back(nu_[i]);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < nu_.size(); ++i) out(i, j) = scale_[i] * dists[static_cast<std::size_t>(i)](rng);
  return out;
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

LogisticRegressionTarget::LogisticRegressionTarget(Eigen::MatrixXd covariates, Eigen::VectorXd labels,
                                                   double prior_precision)
    : covariates_(std::move(covariates)), labels_(std::move(labels)), alpha_(prior_precision) {
  if (covariates_.rows() == 0) throw ConfigError("logistic regression dataset is empty");
  require_dims(covariates_.rows() == labels_.size(), "covariate rows and labels differ in count");
  for (Eigen::Index i = 0; i < labels_.size(); ++i)
    if (labels_[i] != 0.0 && labels_[i] != 1.0) throw ConfigError("labels must be 0 or 1");
  if (!(alpha_ > 0.0)) throw ConfigError("prior precision must be positive");
}

double LogisticRegressionTarget::log_density(const VecRef& beta) const {
  check_point(beta);
  const Eigen::VectorXd t = covariates_ * beta;
  double lp = -0.5 * alpha_ * beta.squaredNorm();
  for (Eigen::Index i = 0; i < t.size(); ++i) lp += labels_[i] * t[i] - softplus(t[i]);
  return lp;
}

Eigen::VectorXd LogisticRegressionTarget::score(const VecRef& beta) const {
  check_point(beta);
  return score_batch(beta).col(0);
}

Eigen::VectorXd LogisticRegressionTarget::hvp(const VecRef& beta, const VecRef& v) const {
  check_point(beta);
  return hvp_batch(beta, v).col(0);
}

Eigen::VectorXd LogisticRegressionTarget::log_density_batch(const MatRef& beta) const {
  require_dims(beta.rows() == dim(), "blr batch dimension mismatch");
  const Eigen::MatrixXd t = covariates_ * beta;
  Eigen::VectorXd out = -0.5 * alpha_ * beta.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    for (Eigen::Index i = 0; i < t.rows(); ++i) out[j] += labels_[i] * t(i, j) - softplus(t(i, j));
  return out;
}

Eigen::MatrixXd LogisticRegressionTarget::score_batch(const MatRef& beta) const {
  require_dims(beta.rows() == dim(), "blr batch dimension mismatch");
  Eigen::MatrixXd resid = covariates_ * beta;
  for (Eigen::Index j = 0; j < resid.cols(); ++j)
    for (Eigen::Index i = 0; i < resid.rows(); ++i) resid(i, j) = labels_[i] - sigmoid(resid(i, j));
  Eigen::MatrixXd out = covariates_.transpose() * resid;
  out -= alpha_ * beta;
  return out;
}

Eigen::MatrixXd LogisticRegressionTarget::hvp_batch(const MatRef& beta, const MatRef& v) const {
  require_dims(beta.rows() == dim() && v.rows() == dim() && beta.cols() == v.cols(), "blr hvp shapes");
  const Eigen::MatrixXd t = covariates_ * beta;
  Eigen::MatrixXd xv = covariates_ * v;
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      const double s = sigmoid(t(i, j));
      xv(i, j) *= s * (1.0 - s);
    }
  Eigen::MatrixXd out = -(covariates_.transpose() * xv);
  out -= alpha_ * v;
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return pos == s.size();
}

}  // namespace

LogisticRegressionTarget load_blr_dataset(const std::filesystem::path& path, int n_features, double prior_precision) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && parse_double(cells[i], values[i]);
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (static_cast<int>(values.size()) != n_features + 1)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(n_features + 1) +
                    " columns, found " + std::to_string(values.size()));
    const double label = values.back();
    if (label != 0.0 && label != 1.0)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw IoError("dataset " + path.string() + " has no rows");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd cov(n, n_features + 1);
  Eigen::VectorXd labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, 0) = 1.0;
    for (int j = 0; j < n_features; ++j) cov(i, j + 1) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    labels[i] = rows[static_cast<std::size_t>(i)].back();
  }
  return LogisticRegressionTarget(std::move(cov), std::move(labels), prior_precision);
}

LogisticRegressionTarget make_waveform_target(int n_rows, std::uint64_t seed, double prior_precision) {
  if (n_rows < 2) throw ConfigError("waveform dataset needs at least 2 rows");
  constexpr int kFeatures = 21;
  auto wave = [](int centre, int i) { return std::max(6.0 - std::abs(i - centre), 0.0); };
  const int centres[3] = {11, 15, 7};
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  Rng rng(seed);
  std::uniform_int_distribution<int> cls(0, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd feats(n_rows, kFeatures);
  Eigen::VectorXd labels(n_rows);
  for (int r = 0; r < n_rows; ++r) {
    const int c = cls(rng);
    const double u = unif(rng);
    for (int i = 1; i <= kFeatures; ++i)
      feats(r, i - 1) = u * wave(centres[pairs[c][0]], i) + (1.0 - u) * wave(centres[pairs[c][1]], i) + noise(rng);
    labels[r] = c == 0 ? 1.0 : 0.0;
  }
  const Eigen::RowVectorXd mean = feats.colwise().mean();
  feats.rowwise() -= mean;
  const Eigen::RowVectorXd sd = (feats.colwise().squaredNorm() / (n_rows - 1)).cwiseSqrt();
  feats.array().rowwise() /= sd.array();
  Eigen::MatrixXd cov(n_rows, kFeatures + 1);
  cov.col(0).setOnes();
  cov.rightCols(kFeatures) = feats;
  return LogisticRegressionTarget(std::move(cov), std::move(labels), prior_precision);
}

void write_waveform_dataset(const std::filesystem::path& path, int n_rows, std::uint64_t seed) {
  const auto target = make_waveform_target(n_rows, seed);
  const auto& cov = target.covariates();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (int i = 1; i < cov.cols(); ++i) out << "x" << i << ",";
  out << "y\n";
  for (Eigen::Index r = 0; r < cov.rows(); ++r) {
    for (Eigen::Index i = 1; i < cov.cols(); ++i) out << cov(r, i) << ",";
    out << static_cast<int>(target.labels()[r]) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Conditioned diffusion

namespace {

void validate_setup(const DiffusionSetup& s) {
  if (!(s.dt > 0.0) || s.n_steps < 1 || s.obs_every < 1 || !(s.obs_sigma > 0.0))
    throw ConfigError("invalid conditioned diffusion setup");
}

double drift_step(const DiffusionSetup& s, double x) { return x + s.drift * x * (1.0 - x * x) * s.dt; }

}  // namespace

SimulatedDiffusion generate_cd_observations(const DiffusionSetup& setup, std::uint64_t seed, double brownian_scale,
                                            double noise_scale) {
  validate_setup(setup);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SimulatedDiffusion sim;
  sim.path.resize(setup.n_steps);
  double x = 0.0;
  const double sqrt_dt = std::sqrt(setup.dt);
  for (int k = 0; k < setup.n_steps; ++k) {
    x = drift_step(setup, x) + brownian_scale * sqrt_dt * normal(rng);
    sim.path[k] = x;
  }
  for (int step = setup.obs_every; step <= setup.n_steps; step += setup.obs_every) {
    sim.observations.steps.push_back(step);
    sim.observations.values.push_back(sim.path[step - 1] + noise_scale * setup.obs_sigma * normal(rng));
  }
  return sim;
}

void write_cd_observations(const std::filesystem::path& path, const DiffusionObservations& obs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17) << "step,value\n";
  for (std::size_t i = 0; i < obs.steps.size(); ++i) out << obs.steps[i] << "," << obs.values[i] << "\n";
}

DiffusionObservations read_cd_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open observations " + path.string());
  DiffusionObservations obs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    double step = 0.0, value = 0.0;
    if (cells.size() != 2 || !parse_double(cells[0], step) || !parse_double(cells[1], value)) {
      if (line_no == 1) continue;
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected step,value");
    }
    obs.steps.push_back(static_cast<int>(step));
    obs.values.push_back(value);
  }
  return obs;
}

ConditionedDiffusionTarget::ConditionedDiffusionTarget(DiffusionSetup setup, DiffusionObservations obs)
    : setup_(setup), obs_(std::move(obs)) {
  validate_setup(setup_);
  if (obs_.steps.size() != obs_.values.size()) throw ConfigError("observation steps and values differ in count");
  obs_precision_ = Eigen::VectorXd::Zero(setup_.n_steps);
  obs_values_ = Eigen::VectorXd::Zero(setup_.n_steps);
  for (std::size_t i = 0; i < obs_.steps.size(); ++i) {
    const int step = obs_.steps[i];
    if (step < 1 || step > setup_.n_steps)
      throw DimensionError("observation step " + std::to_string(step) + " outside 1.." +
                           std::to_string(setup_.n_steps));
    obs_precision_[step - 1] += 1.0 / (setup_.obs_sigma * setup_.obs_sigma);
    obs_values_[step - 1] = obs_.values[i];
  }
}

// x holds x_1..x_n; x_0 = 0. Residual r_k = x_{k+1} - a(x_k), k = 0..n-1.
double ConditionedDiffusionTarget::log_density(const VecRef& x) const {
  check_point(x);
  const int n = setup_.n_steps;
  double lp = 0.0;
  double prev = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = x[k] - drift_step(setup_, prev);
    lp -= r * r / (2.0 * setup_.dt);
    prev = x[k];
  }
  lp -= 0.5 * (obs_precision_.array() * (obs_values_ - x).array().square()).sum();
  return lp;
}

Eigen::VectorXd ConditionedDiffusionTarget::score(const VecRef& x) const {
  check_point(x);
  const int n = setup_.n_steps;
  const double c = setup_.drift * setup_.dt;
  Eigen::VectorXd s = obs_precision_.cwiseProduct(obs_values_ - x);
  double prev = 0.0;
  for (int k = 0; k < n; ++k) {
    // r_k couples x_k (entry k-1, through a) and x_{k+1} (entry k).
    const double r = x[k] - drift_step(setup_, prev);
    s[k] -= r / setup_.dt;
    if (k > 0) s[k - 1] += r * (1.0 + c * (1.0 - 3.0 * prev * prev)) / setup_.dt;
    prev = x[k];
  }
  return s;
}

Eigen::VectorXd ConditionedDiffusionTarget::hvp(const VecRef& x, const VecRef& v) const {
  check_point(x);
  require_dims(v.size() == x.size(), "hvp direction dimension mismatch");
  const int n = setup_.n_steps;
  const double c = setup_.drift * setup_.dt;
  const double inv_dt = 1.0 / setup_.dt;
  Eigen::VectorXd out = -obs_precision_.cwiseProduct(v);
  double prev = 0.0;
  for (int k = 0; k < n; ++k) {
    out[k] -= v[k] * inv_dt;
    if (k > 0) {
      const double r = x[k] - drift_step(setup_, prev);
      const double da = 1.0 + c * (1.0 - 3.0 * prev * prev);
      const double dda = -6.0 * c * prev;
      // d^2/dx_{k}^2 of -r^2/(2dt) with respect to the lagged entry.
      out[k - 1] += (-da * da + r * dda) * inv_dt * v[k - 1];
      out[k - 1] += da * inv_dt * v[k];
      out[k] += da * inv_dt * v[k - 1];
    }
    prev = x[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tempered

TemperedTarget::TemperedTarget(TargetPtr base, double beta) : base_(std::move(base)), beta_(beta) {
  if (!base_) throw ConfigError("tempered target needs a base");
  if (!(beta_ > 0.0 && beta_ <= 1.0)) throw ConfigError("inverse temperature must lie in (0, 1]");
}

double TemperedTarget::log_density(const VecRef& x) const {
  if (beta_ == 1.0) return base_->log_density(x);
  return beta_ * base_->log_density(x);
}

Eigen::VectorXd TemperedTarget::score(const VecRef& x) const {
  if (beta_ == 1.0) return base_->score(x);
  return beta_ * base_->score(x);
}

Eigen::VectorXd TemperedTarget::hvp(const VecRef& x, const VecRef& v) const {
  if (beta_ == 1.0) return base_->hvp(x, v);
  return beta_ * base_->hvp(x, v);
}

Eigen::MatrixXd TemperedTarget::score_batch(const MatRef& x) const {
  if (beta_ == 1.0) return base_->score_batch(x);
  return beta_ * base_->score_batch(x);
}

Eigen::MatrixXd TemperedTarget::hvp_batch(const MatRef& x, const MatRef& v) const {
  if (beta_ == 1.0) return base_->hvp_batch(x, v);
  return beta_ * base_->hvp_batch(x, v);
}

}  // namespace ksivi
