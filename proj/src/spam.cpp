#include "qecho/spam.hpp"

#include "qecho/statevec.hpp"

namespace qecho {

std::size_t ProductEnsemble::size() const {
  std::size_t total = 1;
  for (const Factor& f : factors) total *= f.size();
  return total;
}

std::vector<std::size_t> ProductEnsemble::sample(Rng& rng) const {
  std::vector<std::size_t> choice(factors.size(), 0);
  for (std::size_t q = 0; q < factors.size(); ++q) {
    if (factors[q].size() > 1) choice[q] = uniform_index(rng, factors[q].size());
  }
  return choice;
}

Eigen::VectorXcd ProductEnsemble::member(std::span<const std::size_t> choice) const {
  std::vector<Eigen::Vector2cd> v(factors.size());
  for (std::size_t q = 0; q < factors.size(); ++q) v[q] = factors[q][choice[q]];
  return StateVector::product(v).amplitudes();
}

std::vector<Eigen::VectorXcd> ProductEnsemble::expand() const {
  if (num_qubits() > 12) throw ResourceLimit("ensemble expansion limited to 12 qubits");
  std::vector<Eigen::VectorXcd> out;
  std::vector<std::size_t> choice(factors.size(), 0);
  for (;;) {
    out.push_back(member(choice));
    std::size_t q = 0;
    while (q < factors.size() && ++choice[q] == factors[q].size()) choice[q++] = 0;
    if (q == factors.size()) break;
  }
  return out;
}

Matrix ProductEnsemble::density_matrix() const {
  const auto members = expand();
  const Eigen::Index dim = members.front().size();
  Matrix rho = Matrix::Zero(dim, dim);
  for (const auto& v : members) rho += v * v.adjoint();
  return rho / static_cast<double>(members.size());
}

ProductEnsemble ProductEnsemble::zero_state(int n) {
  ProductEnsemble e;
  e.factors.assign(static_cast<std::size_t>(n), Factor{Eigen::Vector2cd(1.0, 0.0)});
  return e;
}

}  // namespace qecho
