#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace ksivi {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; maps (seed, stream index) to decorrelated seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix_seed(seed, stream));
}

inline void fill_normal(Eigen::Ref<Eigen::MatrixXd> out, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  // Column-major fill keeps each column's draws contiguous in the stream.
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal(rng);
}

inline Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  fill_normal(m, rng);
  return m;
}

}  // namespace ksivi
