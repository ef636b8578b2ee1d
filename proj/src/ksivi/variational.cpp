#include "ksivi/variational.hpp"

#include <cmath>
#include <string>

#include "ksivi/error.hpp"

namespace ksivi {

Eigen::VectorXd SIVParams::flatten() const {
  Eigen::VectorXd flat(n_params());
  flat.head(net.n_params()) = net.flatten();
  flat.tail(rho.size()) = rho;
  return flat;
}

void SIVParams::assign_flat(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  require_dims(flat.size() == n_params(), "flat variational parameter length mismatch");
  net.assign_flat(flat.head(net.n_params()));
  rho = flat.tail(rho.size());
}

void SIVParams::validate() const {
  net.arch.validate();
  require_dims(rho.size() == dim(), "rho has length " + std::to_string(rho.size()) + ", network output width is " +
                                        std::to_string(dim()));
}

SIVParams siv_init(const NetArch& arch, double initial_sigma, std::uint64_t seed, NetInit init) {
  if (!(initial_sigma > 0.0)) throw ConfigError("initial sigma must be positive");
  SIVParams p{net_init(arch, seed, init), Eigen::VectorXd::Constant(arch.output_dim(), std::log(initial_sigma))};
  return p;
}

SampleBatch siv_batch_from_noise(const SIVParams& params, const Eigen::Ref<const Eigen::MatrixXd>& z,
                                 const Eigen::Ref<const Eigen::MatrixXd>& xi) {
  require_dims(z.cols() == xi.cols() && xi.rows() == params.dim(), "noise shapes do not match parameters");
  SampleBatch b;
  b.z = z;
  b.xi = xi;
  b.mu = net_forward(params.net, b.z, &b.tape);
  b.x = b.mu + (xi.array().colwise() * params.sigma().array()).matrix();
  return b;
}

SampleBatch siv_sample_batch(const SIVParams& params, Eigen::Index n, Rng& rng) {
  if (n < 1) throw DimensionError("batch size must be >= 1");
  Eigen::MatrixXd z = normal_matrix(params.mixing_dim(), n, rng);
  Eigen::MatrixXd xi = normal_matrix(params.dim(), n, rng);
  return siv_batch_from_noise(params, z, xi);
}

Eigen::MatrixXd siv_draw(const SIVParams& params, Eigen::Index n, Rng& rng) {
  return siv_sample_batch(params, n, rng).x;
}

Eigen::MatrixXd conditional_score(const SampleBatch& batch, const SIVParams& params) {
  return -(batch.xi.array().colwise() / params.sigma().array()).matrix();
}

Eigen::MatrixXd f_vectors(const SampleBatch& batch, const SIVParams& params, const TargetModel& target,
                          double beta_temp) {
  require_dims(target.dim() == params.dim(), "target and variational dimensions differ");
  Eigen::MatrixXd f = (batch.xi.array().colwise() / params.sigma().array()).matrix();
  if (beta_temp != 0.0) f += beta_temp * target.score_batch(batch.x);
  return f;
}

}  // namespace ksivi
