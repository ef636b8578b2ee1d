#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ksivi {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;
using MatRef = Eigen::Ref<const Eigen::MatrixXd>;

/// Unnormalized target posterior. Batched entry points take samples as columns.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;

  virtual double log_density(const VecRef& x) const = 0;
  virtual Eigen::VectorXd score(const VecRef& x) const = 0;
  /// Hessian of log p at x applied to v.
  virtual Eigen::VectorXd hvp(const VecRef& x, const VecRef& v) const = 0;

  virtual Eigen::VectorXd log_density_batch(const MatRef& x) const;
  virtual Eigen::MatrixXd score_batch(const MatRef& x) const;
  virtual Eigen::MatrixXd hvp_batch(const MatRef& x, const MatRef& v) const;

  virtual bool has_exact_sampler() const { return false; }
  /// n exact draws as columns (d x n). Throws when no exact sampler exists.
  virtual Eigen::MatrixXd sample(Eigen::Index n, std::uint64_t seed) const;

 protected:
  void check_point(const VecRef& x) const;
};

using TargetPtr = std::shared_ptr<const TargetModel>;

/// x = (v1, v1^2 + v2 + 1), v ~ N(0, cov).
class BananaTarget final : public TargetModel {
 public:
  explicit BananaTarget(const Eigen::Matrix2d& cov = default_cov());
  static Eigen::Matrix2d default_cov();

  int dim() const override { return 2; }
  std::string name() const override { return "banana"; }
  double log_density(const VecRef& x) const override;
  Eigen::VectorXd score(const VecRef& x) const override;
  Eigen::VectorXd hvp(const VecRef& x, const VecRef& v) const override;
  bool has_exact_sampler() const override { return true; }
  Eigen::MatrixXd sample(Eigen::Index n, std::uint64_t seed) const override;

 private:
  Eigen::Matrix2d cov_;
  Eigen::Matrix2d precision_;
  Eigen::Matrix2d chol_;
};

struct GaussianComponent {
  double weight;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

class GaussianMixtureTarget final : public TargetModel {
 public:
  GaussianMixtureTarget(std::vector<GaussianComponent> components, std::string name = "gmm");

  /// 1/2 N([-2, 0], I) + 1/2 N([2, 0], I)
  static GaussianMixtureTarget multimodal();
  /// 1/2 N(0, [[2, 1.8], [1.8, 2]]) + 1/2 N(0, [[2, -1.8], [-1.8, 2]])
  static GaussianMixtureTarget xshaped();
  static GaussianMixtureTarget diagonal_gaussian(const Eigen::VectorXd& mean, const Eigen::VectorXd& stddev);

  int dim() const override { return dim_; }
  std::string name() const override { return name_; }
  double log_density(const VecRef& x) const override;
  Eigen::VectorXd score(const VecRef& x) const override;
  Eigen::VectorXd hvp(const VecRef& x, const VecRef& v) const override;
  bool has_exact_sampler() const override { return true; }
  Eigen::MatrixXd sample(Eigen::Index n, std::uint64_t seed) const override;

  const std::vector<GaussianComponent>& components() const { return components_; }

 private:
  struct Cached {
    Eigen::MatrixXd precision;
    Eigen::MatrixXd chol;
    double log_norm;  // log w - 0.5 log det cov
  };
  // Responsibilities and per-component pulls precision * (mean - x).
  void responsibilities(const VecRef& x, Eigen::VectorXd& resp, std::vector<Eigen::VectorXd>& pulls) const;

  std::vector<GaussianComponent> components_;
  std::vector<Cached> cached_;
  int dim_;
  std::string name_;
};

/// Product of independent scaled Student-t marginals, x_i / w_i ~ t(nu_i).
class StudentTProductTarget final : public TargetModel {
 public:
  StudentTProductTarget(Eigen::VectorXd nu, Eigen::VectorXd scale);

  int dim() const override { return static_cast<int>(nu_.size()); }
  std::string name() const override { return "student_product"; }
  double log_density(const VecRef& x) const override;
  Eigen::VectorXd score(const VecRef& x) const override;
  Eigen::VectorXd hvp(const VecRef& x, const VecRef& v) const override;
  bool has_exact_sampler() const override { return true; }
  Eigen::MatrixXd sample(Eigen::Index n, std::uint64_t seed) const override;

 private:
  Eigen::VectorXd nu_;
  Eigen::VectorXd scale_;
};

/// Bayesian logistic regression with a N(0, alpha^{-1} I) prior. Covariate
/// rows carry a leading intercept 1.
class LogisticRegressionTarget final : public TargetModel {
 public:
  LogisticRegressionTarget(Eigen::MatrixXd covariates, Eigen::VectorXd labels, double prior_precision = 0.01);

  int dim() const override { return static_cast<int>(covariates_.cols()); }
  std::string name() const override { return "blr"; }
  double log_density(const VecRef& beta) const override;
  Eigen::VectorXd score(const VecRef& beta) const override;
  Eigen::VectorXd hvp(const VecRef& beta, const VecRef& v) const override;
  Eigen::VectorXd log_density_batch(const MatRef& beta) const override;
  Eigen::MatrixXd score_batch(const MatRef& beta) const override;
  Eigen::MatrixXd hvp_batch(const MatRef& beta, const MatRef& v) const override;

  Eigen::Index n_rows() const { return covariates_.rows(); }
  int n_features() const { return dim() - 1; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  double prior_precision() const { return alpha_; }

 private:
  Eigen::MatrixXd covariates_;  // rows x (features + 1)
  Eigen::VectorXd labels_;
  double alpha_;
};

/// CSV with `n_features` numeric columns followed by a 0/1 label; optional header.
LogisticRegressionTarget load_blr_dataset(const std::filesystem::path& path, int n_features = 21,
                                          double prior_precision = 0.01);

/// Breiman's waveform generator (three noisy convex mixtures of triangular
/// waves, 21 features). Features are standardized to zero mean and unit
/// variance; label 1 marks class 0.
LogisticRegressionTarget make_waveform_target(int n_rows, std::uint64_t seed, double prior_precision = 0.01);

/// Writes make_waveform_target's data in the loader's CSV format.
void write_waveform_dataset(const std::filesystem::path& path, int n_rows, std::uint64_t seed);

struct DiffusionSetup {
  double dt = 0.01;
  int n_steps = 100;
  double drift = 10.0;  // dx = drift * x (1 - x^2) dt + dw
  int obs_every = 5;
  double obs_sigma = 0.1;
};

/// Observations at 1-based step indices obs_every, 2 * obs_every, ...
struct DiffusionObservations {
  std::vector<int> steps;
  std::vector<double> values;
};

struct SimulatedDiffusion {
  Eigen::VectorXd path;  // x at steps 1..n_steps (x_0 = 0 excluded)
  DiffusionObservations observations;
};

/// One Euler-Maruyama path from x_0 = 0 and its noisy observations.
/// `brownian_scale` / `noise_scale` multiply the injected increments.
SimulatedDiffusion generate_cd_observations(const DiffusionSetup& setup, std::uint64_t seed,
                                            double brownian_scale = 1.0, double noise_scale = 1.0);

void write_cd_observations(const std::filesystem::path& path, const DiffusionObservations& obs);
DiffusionObservations read_cd_observations(const std::filesystem::path& path);

/// Posterior over the discretized double-well path given noisy observations.
class ConditionedDiffusionTarget final : public TargetModel {
 public:
  ConditionedDiffusionTarget(DiffusionSetup setup, DiffusionObservations obs);

  int dim() const override { return setup_.n_steps; }
  std::string name() const override { return "conditioned_diffusion"; }
  double log_density(const VecRef& x) const override;
  Eigen::VectorXd score(const VecRef& x) const override;
  Eigen::VectorXd hvp(const VecRef& x, const VecRef& v) const override;

  const DiffusionSetup& setup() const { return setup_; }
  const DiffusionObservations& observations() const { return obs_; }

 private:
  DiffusionSetup setup_;
  DiffusionObservations obs_;
  Eigen::VectorXd obs_precision_;  // 1/sigma^2 at observed coordinates, else 0
  Eigen::VectorXd obs_values_;     // y at observed coordinates, else 0
};

/// beta * log p. beta = 1 forwards to the base unchanged.
class TemperedTarget final : public TargetModel {
 public:
  TemperedTarget(TargetPtr base, double beta);

  int dim() const override { return base_->dim(); }
  std::string name() const override { return "tempered_" + base_->name(); }
  double log_density(const VecRef& x) const override;
  Eigen::VectorXd score(const VecRef& x) const override;
  Eigen::VectorXd hvp(const VecRef& x, const VecRef& v) const override;
  Eigen::MatrixXd score_batch(const MatRef& x) const override;
  Eigen::MatrixXd hvp_batch(const MatRef& x, const MatRef& v) const override;
  double beta() const { return beta_; }

 private:
  TargetPtr base_;
  double beta_;
};

}  // namespace ksivi
