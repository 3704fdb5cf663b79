#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "qecho/channels.hpp"
#include "qecho/common.hpp"
#include "qecho/gates.hpp"
#include "qecho/record.hpp"
#include "qecho/spam.hpp"

namespace qecho {

inline constexpr int kMaxStatevectorQubits = 26;

// Dense 2^n amplitudes, qubit 0 = least significant bit. Unnormalized: the
// norm carries fidelity information.
class StateVector {
 public:
  explicit StateVector(int num_qubits);
  static StateVector product(std::span<const Eigen::Vector2cd> factors);

  int num_qubits() const { return n_; }
  std::size_t size() const { return amps_.size(); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }

  void set_product(std::span<const Eigen::Vector2cd> factors);

  // Local matrix index is built with qubits[0] as the most significant bit.
  void apply(const Matrix& m, std::span<const int> qubits);
  void apply(const Matrix2& m, int qubit);
  // Returns 0: dense states never truncate.
  double apply_pair(const Matrix4& m, QubitPair pair);

  bool all_finite() const { return amps_.allFinite(); }

 private:
  int n_;
  Eigen::VectorXcd amps_;
};

StateVector apply_operator(StateVector state, const Matrix& m, std::span<const int> qubits);

// <bra|ket>, accumulated in extended precision.
cplx overlap(const StateVector& bra, const StateVector& ket);

// (init, fin) ensembles. q = 0 gives {|0...0>}; q > 0 gives per-qubit
// {sqrt(1-q)|0> +- sqrt(q)|1>}, whose mixture is (1-q)|0><0| + q|1><1|.
std::pair<ProductEnsemble, ProductEnsemble> default_spam(int n, double q);

// Everything a trajectory needs, precomputed from a NoiseModel: Kraus
// operators in the chosen basis with the 1-qubit gates folded in.
class EchoModel {
 public:
  explicit EchoModel(const NoiseModel& model, KrausBasis basis = KrausBasis::equal_trace);

  const QubitLayout& layout() const { return layout_; }
  const ProductEnsemble& spam_init() const { return spam_init_; }
  const ProductEnsemble& spam_fin() const { return spam_fin_; }

  // One noisy forward gate: K2_m iSWAP ((A_j g_a) (x) (B_l g_b)), with Kraus
  // indices drawn uniformly from rng.
  Matrix4 sample_forward(const GateDraw& draw, Rng& rng) const;
  // Adjoint of one noisy backward-gate Kraus operator:
  //   [((A_j h_a) (x) (B_l h_b)) C_m iSWAP]^dag,  h = sqrt(.)^dag Z.
  Matrix4 sample_backward_adjoint(const GateDraw& draw, Rng& rng) const;

 private:
  QubitLayout layout_;
  ProductEnsemble spam_init_;
  ProductEnsemble spam_fin_;
  // per position: K2 (forward leg) and K2^dag (backward leg)
  std::vector<std::vector<Matrix4>> two_forward_;
  std::vector<std::vector<Matrix4>> two_backward_adj_;
  // per qubit, per dressing: A_j g and (A_j h)^dag
  std::vector<std::array<std::vector<Matrix2>, kNumDressings>> one_forward_;
  std::vector<std::array<std::vector<Matrix2>, kNumDressings>> one_backward_adj_;
};

struct TrajectorySeeds {
  std::uint64_t gates = 0;  // dressing draws
  std::uint64_t kraus = 0;  // SPAM members and Kraus indices
};

inline TrajectorySeeds trajectory_seeds(std::uint64_t master_seed, std::uint64_t index) {
  return {derive_seed(master_seed, index, 0), derive_seed(master_seed, index, 1)};
}

// The echo trajectory, shared by every state backend. State provides
// set_product, apply_pair (returning discarded weight) and a free overlap().
template <class State>
TrajectoryRow echo_trajectory(const EchoModel& model, int d_max, TrajectorySeeds seeds, State& psi,
                              State& phi) {
  Rng gate_rng(seeds.gates);
  Rng kraus_rng(seeds.kraus);
  TrajectoryRow row;
  row.fidelity.assign(static_cast<std::size_t>(d_max) + 1, 0.0);
  row.truncation.assign(static_cast<std::size_t>(d_max) + 1, 0.0);

  auto pick = [](const ProductEnsemble& e, const std::vector<std::size_t>& choice) {
    std::vector<Eigen::Vector2cd> v(choice.size());
    for (std::size_t q = 0; q < choice.size(); ++q) v[q] = e.factors[q][choice[q]];
    return v;
  };
  psi.set_product(pick(model.spam_init(), model.spam_init().sample(kraus_rng)));
  phi.set_product(pick(model.spam_fin(), model.spam_fin().sample(kraus_rng)));
  row.fidelity[0] = std::norm(overlap(phi, psi));

  for (int d = 1; d <= d_max; ++d) {
    double discarded = 0.0;
    for (const GateDraw& draw : sample_layer(model.layout(), d, gate_rng)) {
      const Matrix4 fwd = model.sample_forward(draw, kraus_rng);
      const Matrix4 bwd = model.sample_backward_adjoint(draw, kraus_rng);
      discarded += psi.apply_pair(fwd, draw.qubits);
      discarded += phi.apply_pair(bwd, draw.qubits);
    }
    const double f = std::norm(overlap(phi, psi));
    if (!std::isfinite(f)) {
      throw NumericalFailure("non-finite fidelity at depth " + std::to_string(d));
    }
    row.fidelity[static_cast<std::size_t>(d)] = f;
    row.truncation[static_cast<std::size_t>(d)] = discarded;
  }
  return row;
}

TrajectoryRow run_trajectory(const EchoModel& model, int d_max, TrajectorySeeds seeds);

struct CampaignOptions {
  int d_max = 0;
  std::uint64_t n_traj = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::uint64_t first_trajectory = 0;
  KrausBasis basis = KrausBasis::equal_trace;
};

FidelityRecord run_campaign(const NoiseModel& model, const CampaignOptions& options);

}  // namespace qecho
