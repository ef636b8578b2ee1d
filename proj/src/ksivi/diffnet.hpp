#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ksivi {

/// Layer widths [d_z, h_1, ..., d]. Hidden layers use the rectifier, the
/// output layer is affine.
struct NetArch {
  std::vector<int> widths;

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int n_layers() const { return static_cast<int>(widths.size()) - 1; }
  Eigen::Index n_params() const;
  void validate() const;

  bool operator==(const NetArch&) const = default;
};

/// Weights and biases of the mean network. Flat indexing is layer-major,
/// weights before biases, weights row-major.
struct NetParams {
  NetArch arch;
  std::vector<Eigen::MatrixXd> weights;  // out x in
  std::vector<Eigen::VectorXd> biases;

  static NetParams zeros(const NetArch& arch);
  static NetParams from_flat(const NetArch& arch, const Eigen::Ref<const Eigen::VectorXd>& flat);

  Eigen::Index n_params() const { return arch.n_params(); }
  Eigen::VectorXd flatten() const;
  void assign_flat(const Eigen::Ref<const Eigen::VectorXd>& flat);
};

/// Pre-activations cached by a forward pass. Columns are batch members.
struct NetTape {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;  // one per layer
  Eigen::Index batch() const { return input.cols(); }
};

// he_normal: N(0, 2/fan_in) weights, zero biases.
// uniform: weights and biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the torch.nn.Linear default.
enum class NetInit { he_normal, uniform };
std::string to_string(NetInit init);
NetInit net_init_from_string(const std::string& s);

NetParams net_init(const NetArch& arch, std::uint64_t seed, NetInit init = NetInit::he_normal);

/// Batched forward pass; columns of `z` are inputs. Returns outputs column-wise.
Eigen::MatrixXd net_forward(const NetParams& params, const Eigen::Ref<const Eigen::MatrixXd>& z,
                            NetTape* tape = nullptr);

Eigen::VectorXd net_forward_one(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& z,
                                NetTape* tape = nullptr);

/// Sum over batch columns of upstream[:, n]^T d mu(z_n) / d params, as a flat
/// vector in NetParams order.
Eigen::VectorXd net_vjp(const NetParams& params, const NetTape& tape,
                        const Eigen::Ref<const Eigen::MatrixXd>& upstream);

/// Frobenius norm of d mu(z) / d params, assembled from d unit-vector VJPs.
double net_jacobian_frobenius(const NetParams& params, const Eigen::Ref<const Eigen::VectorXd>& z);

}  // namespace ksivi
