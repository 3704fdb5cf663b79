#pragma once

#include <array>
#include <span>
#include <vector>

#include "qecho/common.hpp"

namespace qecho {

// Uniform ensemble of product states. Each qubit carries a list of
// single-qubit (unnormalized) vectors; a member of the ensemble picks one
// vector per qubit. The represented density matrix is the uniform mixture.
struct ProductEnsemble {
  using Factor = std::vector<Eigen::Vector2cd>;

  std::vector<Factor> factors;

  int num_qubits() const { return static_cast<int>(factors.size()); }
  std::size_t size() const;

  // One member index per qubit, drawn uniformly.
  std::vector<std::size_t> sample(Rng& rng) const;

  // Dense amplitudes of one member (qubit 0 is the least significant bit).
  Eigen::VectorXcd member(std::span<const std::size_t> choice) const;

  // All members, for small n only.
  std::vector<Eigen::VectorXcd> expand() const;

  // Dense 2^n x 2^n density matrix of the uniform mixture.
  Matrix density_matrix() const;

  static ProductEnsemble zero_state(int n);
};

}  // namespace qecho
