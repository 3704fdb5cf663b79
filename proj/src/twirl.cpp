#include "qecho/twirl.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace qecho {

namespace {

// Local 2-qubit space in Kronecker order: global qubit 1 plays qubits.a and
// global qubit 0 plays qubits.b, so the local index is 2 bit(a) + bit(b).
const std::vector<int> kPairQubits = {1, 0};
const std::vector<int> kQubitA = {1};
const std::vector<int> kQubitB = {0};

// Lift a superoperator on k local qubits (qubits[0] most significant) to n
// qubits, acting as the identity on spectators.
Matrix embed_superoperator(const Matrix& s, std::span<const int> qubits, int n) {
  const int k = static_cast<int>(qubits.size());
  const std::size_t d = std::size_t{1} << n;
  const Eigen::Index dl = Eigen::Index{1} << k;
  std::size_t mask = 0;
  for (int q : qubits) mask |= std::size_t{1} << q;
  auto local = [&](std::size_t idx) {
    Eigen::Index l = 0;
    for (int r = 0; r < k; ++r) l |= static_cast<Eigen::Index>((idx >> qubits[static_cast<std::size_t>(r)]) & 1u) << (k - 1 - r);
    return l;
  };
  const auto full = static_cast<Eigen::Index>(d * d);
  Matrix out = Matrix::Zero(full, full);
  for (std::size_t j2 = 0; j2 < d; ++j2)
    for (std::size_t i2 = 0; i2 < d; ++i2)
      for (std::size_t j = 0; j < d; ++j) {
        if ((j & ~mask) != (j2 & ~mask)) continue;
        for (std::size_t i = 0; i < d; ++i) {
          if ((i & ~mask) != (i2 & ~mask)) continue;
          const Eigen::Index row = local(i2) + dl * local(j2);
          const Eigen::Index col = local(i) + dl * local(j);
          out(static_cast<Eigen::Index>(i2 + d * j2), static_cast<Eigen::Index>(i + d * j)) = s(row, col);
        }
      }
  return out;
}

Matrix one_qubit_on(const Matrix& s1, const std::vector<int>& which) { return embed_superoperator(s1, which, 2); }

Matrix kron_unitary(const Matrix2& a, const Matrix2& b) { return Eigen::kroneckerProduct(a, b).eval(); }

void check_position(const NoiseModel& model, int position) {
  if (position < 0 || position >= model.layout.gates_per_period()) {
    throw InvalidArgument("position " + std::to_string(position) + " out of range");
  }
}

// Noise of one gate position in the local pair space, unitary part commuted out.
Matrix position_noise(const NoiseModel& model, int position, Direction direction) {
  const QubitPair pair = model.layout.positions()[static_cast<std::size_t>(position)];
  const Matrix s_iswap = superoperator(Matrix(iswap()));
  const Matrix s_iswap_dag = superoperator(Matrix(iswap().adjoint()));
  if (direction == Direction::forward) {
    Matrix avg_a = Matrix::Zero(4, 4), avg_b = Matrix::Zero(4, 4);
    for (int d = 0; d < kNumDressings; ++d) {
      avg_a += superoperator(model.one_qubit_channel(pair.a, forward_label(static_cast<Dressing>(d))));
      avg_b += superoperator(model.one_qubit_channel(pair.b, forward_label(static_cast<Dressing>(d))));
    }
    avg_a /= kNumDressings;
    avg_b /= kNumDressings;
    const Matrix s2 = superoperator(model.two_qubit_forward[static_cast<std::size_t>(position)]);
    return s2 * s_iswap * one_qubit_on(avg_a, kQubitA) * one_qubit_on(avg_b, kQubitB) * s_iswap_dag;
  }
  const Matrix s2 = superoperator(model.two_qubit_backward[static_cast<std::size_t>(position)]);
  Matrix acc = Matrix::Zero(16, 16);
  for (int da = 0; da < kNumDressings; ++da) {
    for (int db = 0; db < kNumDressings; ++db) {
      const GateLabel la = inverse_label(static_cast<Dressing>(da));
      const GateLabel lb = inverse_label(static_cast<Dressing>(db));
      const Matrix h = kron_unitary(single_qubit_gate(la), single_qubit_gate(lb));
      acc += one_qubit_on(superoperator(model.one_qubit_channel(pair.a, la)), kQubitA) *
             one_qubit_on(superoperator(model.one_qubit_channel(pair.b, lb)), kQubitB) * superoperator(h) * s2 *
             superoperator(Matrix(h.adjoint()));
    }
  }
  return acc / static_cast<double>(kNumDressings * kNumDressings);
}

double ensemble_overlap(const ProductEnsemble& a, const ProductEnsemble& b) {
  double total = 1.0;
  for (std::size_t q = 0; q < a.factors.size(); ++q) {
    Eigen::Matrix2cd ra = Eigen::Matrix2cd::Zero(), rb = Eigen::Matrix2cd::Zero();
    for (const auto& v : a.factors[q]) ra += v * v.adjoint();
    for (const auto& v : b.factors[q]) rb += v * v.adjoint();
    ra /= static_cast<double>(a.factors[q].size());
    rb /= static_cast<double>(b.factors[q].size());
    total *= (ra * rb).trace().real();
  }
  return total;
}

}  // namespace

double composed_gate_fidelity(const NoiseModel& model, int position, Dressing a, Dressing b, Direction direction) {
  check_position(model, position);
  const QubitPair pair = model.layout.positions()[static_cast<std::size_t>(position)];
  const GateDraw draw{1, position, pair, a, b};
  const Matrix u = dressed_iswap(draw);
  std::vector<SuperopFactor> factors;
  if (direction == Direction::forward) {
    const Matrix g = kron_unitary(single_qubit_gate(forward_label(a)), single_qubit_gate(forward_label(b)));
    factors = {{Matrix(u.adjoint()), kPairQubits},
               {g, kPairQubits},
               {model.one_qubit_channel(pair.a, forward_label(a)), kQubitA},
               {model.one_qubit_channel(pair.b, forward_label(b)), kQubitB},
               {Matrix(iswap()), kPairQubits},
               {model.two_qubit_forward[static_cast<std::size_t>(position)], kPairQubits}};
  } else {
    const Matrix h = kron_unitary(single_qubit_gate(inverse_label(a)), single_qubit_gate(inverse_label(b)));
    factors = {{u, kPairQubits},
               {Matrix(iswap()), kPairQubits},
               {model.two_qubit_backward[static_cast<std::size_t>(position)], kPairQubits},
               {h, kPairQubits},
               {model.one_qubit_channel(pair.a, inverse_label(a)), kQubitA},
               {model.one_qubit_channel(pair.b, inverse_label(b)), kQubitB}};
  }
  return superoperator_fidelity(compose_superoperator(factors, 2));
}

DecayPrediction mean_gate_prediction(const NoiseModel& model) {
  model.validate();
  DecayPrediction out;
  out.method = PredictionMethod::mean_gate;
  out.period = model.layout.period();
  const int ng = model.layout.gates_per_period();
  double log_sum = 0.0;
  for (int i = 0; i < ng; ++i) {
    double acc = 0.0;
    for (int da = 0; da < kNumDressings; ++da)
      for (int db = 0; db < kNumDressings; ++db) {
        const auto a = static_cast<Dressing>(da);
        const auto b = static_cast<Dressing>(db);
        acc += composed_gate_fidelity(model, i, a, b, Direction::forward) *
               composed_gate_fidelity(model, i, a, b, Direction::backward);
      }
    const double fi2 = acc / (kNumDressings * kNumDressings);
    // rounding leaves ~1e-30 behind for exactly traceless noise
    if (!(fi2 > 1e-14)) throw NumericalFailure("gate position " + std::to_string(i) + " has zero fidelity");
    out.position_fidelity_sq.push_back(fi2);
    log_sum += std::log(fi2);
  }
  out.lambda = -log_sum / out.period;
  out.mean_gate_fidelity = ng > 0 ? std::exp(log_sum / (2.0 * ng)) : 1.0;
  out.f0_tilde = ensemble_overlap(model.spam_fin, model.spam_init);
  return out;
}

Matrix layer_noise_superoperator(const NoiseModel& model, int t, Direction direction) {
  const int n = model.layout.num_qubits();
  if (n > kMaxTwirlQubits) {
    throw ResourceLimit("layer superoperators are limited to " + std::to_string(kMaxTwirlQubits) + " qubits");
  }
  if (t < 1) throw InvalidArgument("layer index must be >= 1");
  const Eigen::Index d2 = Eigen::Index{1} << (2 * n);
  Matrix total = Matrix::Identity(d2, d2);
  for (int pos : model.layout.layer_positions(t)) {
    const QubitPair pair = model.layout.positions()[static_cast<std::size_t>(pos)];
    const std::vector<int> qubits = {pair.a, pair.b};
    total = embed_superoperator(position_noise(model, pos, direction), qubits, n) * total;
  }
  return total;
}

DecayPrediction twirl_prediction(const NoiseModel& model) {
  model.validate();
  const int n = model.layout.num_qubits();
  if (n > kMaxTwirlQubits) {
    throw ResourceLimit("twirl prediction is limited to " + std::to_string(kMaxTwirlQubits) + " qubits");
  }
  DecayPrediction out;
  out.method = PredictionMethod::twirl;
  const int p = model.layout.period();
  out.period = p;
  const double dim2 = std::ldexp(1.0, 2 * n);

  std::vector<Matrix> fwd, bwd;
  for (int t = 1; t <= p + 1; ++t) {
    fwd.push_back(layer_noise_superoperator(model, t, Direction::forward));
    bwd.push_back(layer_noise_superoperator(model, t, Direction::backward));
  }
  double log_prod = 0.0;
  for (int t = 1; t <= p; ++t) {
    const double f = (bwd[static_cast<std::size_t>(t)] * fwd[static_cast<std::size_t>(t) - 1]).trace().real() / dim2;
    if (!(f > 0.0)) throw NumericalFailure("layer " + std::to_string(t) + " has non-positive echo fidelity");
    out.layer_fidelities.push_back(f);
    log_prod += std::log(f);
  }
  out.lambda = -log_prod / p;

  const Matrix& np = fwd[static_cast<std::size_t>(p) - 1];
  const double tr_np = np.trace().real();
  const double tr_turn = (bwd[static_cast<std::size_t>(p)] * np).trace().real();
  out.turning_point_fidelity = tr_np / dim2;
  if (!(tr_turn > 0.0)) throw NumericalFailure("degenerate turning-point channel");
  const Matrix rho_init = model.spam_init.density_matrix();
  const Matrix rho_fin = model.spam_fin.density_matrix();
  const double spam = (rho_fin * apply_superoperator(bwd.front(), rho_init)).trace().real();
  out.f0_tilde = spam * tr_np / tr_turn;
  return out;
}

}  // namespace qecho
