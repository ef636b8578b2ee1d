#include "ksivi/diffnet.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ksivi/error.hpp"
#include "ksivi/rng.hpp"

namespace ksivi {

Eigen::Index NetArch::n_params() const {
  Eigen::Index total = 0;
  for (int l = 0; l < n_layers(); ++l)
    total += static_cast<Eigen::Index>(widths[l + 1]) * (widths[l] + 1);
  return total;
}

void NetArch::validate() const {
  if (widths.size() < 2) throw DimensionError("network needs at least an input and an output width");
  for (int w : widths)
    if (w < 1) throw DimensionError("network widths must be >= 1, got " + std::to_string(w));
}

NetParams NetParams::zeros(const NetArch& arch) {
  arch.validate();
  NetParams p;
  p.arch = arch;
  for (int l = 0; l < arch.n_layers(); ++l) {
    p.weights.push_back(Eigen::MatrixXd::Zero(arch.widths[l + 1], arch.widths[l]));
    p.biases.push_back(Eigen::VectorXd::Zero(arch.widths[l + 1]));
  }
  return p;
}

NetParams NetParams::from_flat(const NetArch& arch, const Eigen::Ref<const Eigen::VectorXd>& flat) {
  NetParams p = zeros(arch);
  p.assign_flat(flat);
  return p;
}

Eigen::VectorXd NetParams::flatten() const {
  Eigen::VectorXd flat(n_params());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat[k++] = w(r, c);
    flat.segment(k, biases[l].size()) = biases[l];
    k += biases[l].size();
  }
  return flat;
}

void NetParams::assign_flat(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  require_dims(flat.size() == n_params(),
               "flat parameter length " + std::to_string(flat.size()) + " != " + std::to_string(n_params()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
    biases[l] = flat.segment(k, biases[l].size());
    k += biases[l].size();
  }
}

std::string to_string(NetInit init) { return init == NetInit::uniform ? "uniform" : "he_normal"; }

NetInit net_init_from_string(const std::string& s) {
  if (s == "he_normal") return NetInit::he_normal;
  if (s == "uniform") return NetInit::uniform;
  throw ConfigError("unknown network init '" + s + "' (he_normal, uniform)");
}

NetParams net_init(const NetArch& arch, std::uint64_t seed, NetInit init) {
  NetParams p = NetParams::zeros(arch);
  Rng rng(seed);
  for (int l = 0; l < arch.n_layers(); ++l) {
    auto& w = p.weights[l];
    const double fan_in = static_cast<double>(w.cols());
    if (init == NetInit::he_normal) {
      std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = normal(rng);
    } else {
      const double bound = 1.0 / std::sqrt(fan_in);
      std::uniform_real_distribution<double> unif(-bound, bound);
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = unif(rng);
      for (Eigen::Index r = 0; r < w.rows(); ++r) p.biases[l][r] = unif(rng);
    }
  }
  return p;
}

Eigen::MatrixXd net_forward(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& z, NetTape* tape) {
  require_dims(z.rows() == params.arch.input_dim(),
               "net input has " + std::to_string(z.rows()) + " rows, expected " +
                   std::to_string(params.arch.input_dim()));
  const int n_layers = params.arch.n_layers();
  if (tape) {
    tape->input = z;
    tape->pre.resize(n_layers);
  }
  Eigen::MatrixXd act = z;
  for (int l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd pre = params.weights[l] * act;
    pre.colwise() += params.biases[l];
    if (l + 1 < n_layers) {
      act = pre.cwiseMax(0.0);
    } else {
      act = pre;
    }
    if (tape) tape->pre[l] = std::move(pre);
  }
  return act;
}

Eigen::VectorXd net_forward_one(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& z, NetTape* tape) {
  return net_forward(params, Eigen::MatrixXd(z), tape).col(0);
}

Eigen::VectorXd net_vjp(const NetParams& params, const NetTape& tape, const Eigen::Ref<const Eigen::MatrixXd>& upstream) {
  const int n_layers = params.arch.n_layers();
  require_dims(static_cast<int>(tape.pre.size()) == n_layers && tape.input.rows() == params.arch.input_dim(),
               "tape does not match network parameters");
  for (int l = 0; l < n_layers; ++l)
    require_dims(tape.pre[l].rows() == params.arch.widths[l + 1] && tape.pre[l].cols() == tape.batch(),
                 "tape does not match network parameters");
  require_dims(upstream.rows() == params.arch.output_dim() && upstream.cols() == tape.batch(),
               "upstream shape does not match tape");

  std::vector<Eigen::MatrixXd> grad_w(n_layers);
  std::vector<Eigen::VectorXd> grad_b(n_layers);
  Eigen::MatrixXd delta = upstream;
  for (int l = n_layers - 1; l >= 0; --l) {
    if (l + 1 < n_layers) {
      // Rectifier derivative, taken as 0 at exactly 0.
      delta.array() *= (tape.pre[l].array() > 0.0).cast<double>();
    }
    if (l > 0) {
      grad_w[l].noalias() = delta * tape.pre[l - 1].cwiseMax(0.0).transpose();
    } else {
      grad_w[l].noalias() = delta * tape.input.transpose();
    }
    grad_b[l] = delta.rowwise().sum();
    if (l > 0) delta = params.weights[l].transpose() * delta;
  }

  Eigen::VectorXd flat(params.n_params());
  Eigen::Index k = 0;
  for (int l = 0; l < n_layers; ++l) {
    const auto& g = grad_w[l];
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (Eigen::Index c = 0; c < g.cols(); ++c) flat[k++] = g(r, c);
    flat.segment(k, grad_b[l].size()) = grad_b[l];
    k += grad_b[l].size();
  }
  return flat;
}

double net_jacobian_frobenius(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& z) {
  NetTape tape;
  net_forward_one(params, z, &tape);
  const int d = params.arch.output_dim();
  double sq = 0.0;
  Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(d, 1);
  for (int i = 0; i < d; ++i) {
    unit.setZero();
    unit(i, 0) = 1.0;
    sq += net_vjp(params, tape, unit).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace ksivi
