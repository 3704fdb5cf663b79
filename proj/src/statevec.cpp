#include "qecho/statevec.hpp"

#include <algorithm>
#include <string>

namespace qecho {

namespace {

Matrix4 kron2(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

void check_qubit(int q, int n) {
  if (q < 0 || q >= n) throw InvalidArgument("qubit " + std::to_string(q) + " out of range");
}

}  // namespace

StateVector::StateVector(int num_qubits) : n_(num_qubits) {
  if (num_qubits < 1) throw InvalidArgument("state needs at least one qubit");
  if (num_qubits > kMaxStatevectorQubits) {
    throw ResourceLimit("state vector limited to " + std::to_string(kMaxStatevectorQubits) + " qubits");
  }
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << num_qubits);
  amps_(0) = 1.0;
}

StateVector StateVector::product(std::span<const Eigen::Vector2cd> factors) {
  StateVector s(static_cast<int>(factors.size()));
  s.set_product(factors);
  return s;
}

void StateVector::set_product(std::span<const Eigen::Vector2cd> factors) {
  if (static_cast<int>(factors.size()) != n_) throw InvalidArgument("product state has the wrong qubit count");
  amps_.setZero();
  amps_(0) = 1.0;
  Eigen::Index filled = 1;
  for (int q = 0; q < n_; ++q) {
    const auto& f = factors[static_cast<std::size_t>(q)];
    for (Eigen::Index i = 0; i < filled; ++i) {
      amps_(i + filled) = amps_(i) * f(1);
      amps_(i) *= f(0);
    }
    filled *= 2;
  }
}

void StateVector::apply(const Matrix& m, std::span<const int> qubits) {
  const int k = static_cast<int>(qubits.size());
  if (k < 1 || m.rows() != (Eigen::Index{1} << k) || m.cols() != m.rows()) {
    throw InvalidArgument("operator shape does not match its qubit count");
  }
  std::size_t mask = 0;
  for (int q : qubits) {
    check_qubit(q, n_);
    if (mask & (std::size_t{1} << q)) throw InvalidArgument("repeated qubit index");
    mask |= std::size_t{1} << q;
  }
  const Eigen::Index local = m.rows();
  std::vector<std::size_t> offset(static_cast<std::size_t>(local), 0);
  for (Eigen::Index l = 0; l < local; ++l) {
    for (int r = 0; r < k; ++r) {
      if ((l >> (k - 1 - r)) & 1) offset[static_cast<std::size_t>(l)] |= std::size_t{1} << qubits[static_cast<std::size_t>(r)];
    }
  }
  Eigen::VectorXcd in(local), out(local);
  for (std::size_t base = 0; base < size(); ++base) {
    if (base & mask) continue;
    for (Eigen::Index l = 0; l < local; ++l) in(l) = amps_(static_cast<Eigen::Index>(base | offset[static_cast<std::size_t>(l)]));
    out.noalias() = m * in;
    for (Eigen::Index l = 0; l < local; ++l) amps_(static_cast<Eigen::Index>(base | offset[static_cast<std::size_t>(l)])) = out(l);
  }
}

void StateVector::apply(const Matrix2& m, int qubit) {
  check_qubit(qubit, n_);
  const std::size_t bit = std::size_t{1} << qubit;
  cplx* a = amps_.data();
  for (std::size_t i = 0; i < size(); ++i) {
    if (i & bit) continue;
    const cplx x0 = a[i], x1 = a[i | bit];
    a[i] = m(0, 0) * x0 + m(0, 1) * x1;
    a[i | bit] = m(1, 0) * x0 + m(1, 1) * x1;
  }
}

double StateVector::apply_pair(const Matrix4& m, QubitPair pair) {
  check_qubit(pair.a, n_);
  check_qubit(pair.b, n_);
  if (pair.a == pair.b) throw InvalidArgument("pair needs two distinct qubits");
  const std::size_t ba = std::size_t{1} << pair.a;
  const std::size_t bb = std::size_t{1} << pair.b;
  const std::size_t lo = std::min(ba, bb), hi = std::max(ba, bb);
  cplx m_[16];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m_[4 * r + c] = m(r, c);
  cplx* v = amps_.data();
  const std::size_t quarter = size() / 4;
  for (std::size_t k = 0; k < quarter; ++k) {
    // spread k around the two zero bits
    std::size_t i = k;
    i = ((i & ~(lo - 1)) << 1) | (i & (lo - 1));
    i = ((i & ~(hi - 1)) << 1) | (i & (hi - 1));
    cplx* p0 = v + i;
    cplx* p1 = v + (i | bb);
    cplx* p2 = v + (i | ba);
    cplx* p3 = v + (i | ba | bb);
    const cplx x0 = *p0, x1 = *p1, x2 = *p2, x3 = *p3;
    *p0 = m_[0] * x0 + m_[1] * x1 + m_[2] * x2 + m_[3] * x3;
    *p1 = m_[4] * x0 + m_[5] * x1 + m_[6] * x2 + m_[7] * x3;
    *p2 = m_[8] * x0 + m_[9] * x1 + m_[10] * x2 + m_[11] * x3;
    *p3 = m_[12] * x0 + m_[13] * x1 + m_[14] * x2 + m_[15] * x3;
  }
  return 0.0;
}

StateVector apply_operator(StateVector state, const Matrix& m, std::span<const int> qubits) {
  state.apply(m, qubits);
  return state;
}

cplx overlap(const StateVector& bra, const StateVector& ket) {
  if (bra.size() != ket.size()) throw InvalidArgument("overlap of states with different sizes");
  long double re = 0.0L, im = 0.0L;
  const cplx* x = bra.amplitudes().data();
  const cplx* y = ket.amplitudes().data();
  for (std::size_t i = 0; i < bra.size(); ++i) {
    const cplx t = std::conj(x[i]) * y[i];
    re += t.real();
    im += t.imag();
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

std::pair<ProductEnsemble, ProductEnsemble> default_spam(int n, double q) {
  if (n < 1) throw InvalidArgument("SPAM ensemble needs at least one qubit");
  if (!(q >= 0.0 && q < 0.5)) throw InvalidArgument("SPAM flip probability must lie in [0, 0.5)");
  if (q == 0.0) {
    ProductEnsemble e = ProductEnsemble::zero_state(n);
    return {e, e};
  }
  const double c0 = std::sqrt(1.0 - q), c1 = std::sqrt(q);
  ProductEnsemble e;
  e.factors.assign(static_cast<std::size_t>(n),
                   ProductEnsemble::Factor{Eigen::Vector2cd(c0, c1), Eigen::Vector2cd(c0, -c1)});
  return {e, e};
}

// ---- echo model -------------------------------------------------------------

EchoModel::EchoModel(const NoiseModel& source, KrausBasis basis)
    : layout_(source.layout), spam_init_(source.spam_init), spam_fin_(source.spam_fin) {
  source.validate();
  const NoiseModel model =
      (basis == KrausBasis::equal_trace && source.basis != KrausBasis::equal_trace) ? to_equal_trace(source) : source;

  const Matrix4& sw = iswap();
  const Matrix4 sw_dag = sw.adjoint();
  for (int i = 0; i < layout_.gates_per_period(); ++i) {
    std::vector<Matrix4> fwd, bwd;
    for (const Matrix& k : model.two_qubit_forward[static_cast<std::size_t>(i)].ops()) fwd.push_back(Matrix4(k) * sw);
    for (const Matrix& k : model.two_qubit_backward[static_cast<std::size_t>(i)].ops()) {
      bwd.push_back(sw_dag * Matrix4(k).adjoint());
    }
    two_forward_.push_back(std::move(fwd));
    two_backward_adj_.push_back(std::move(bwd));
  }
  one_forward_.resize(static_cast<std::size_t>(layout_.num_qubits()));
  one_backward_adj_.resize(static_cast<std::size_t>(layout_.num_qubits()));
  for (int q = 0; q < layout_.num_qubits(); ++q) {
    for (int d = 0; d < kNumDressings; ++d) {
      const auto dressing = static_cast<Dressing>(d);
      const Matrix2 g = single_qubit_gate(forward_label(dressing));
      const Matrix2 h = single_qubit_gate(inverse_label(dressing));
      auto& fwd = one_forward_[static_cast<std::size_t>(q)][static_cast<std::size_t>(d)];
      auto& bwd = one_backward_adj_[static_cast<std::size_t>(q)][static_cast<std::size_t>(d)];
      for (const Matrix& k : model.one_qubit_channel(q, forward_label(dressing)).ops()) fwd.push_back(Matrix2(k) * g);
      for (const Matrix& k : model.one_qubit_channel(q, inverse_label(dressing)).ops()) {
        bwd.push_back((Matrix2(k) * h).adjoint());
      }
    }
  }
}

Matrix4 EchoModel::sample_forward(const GateDraw& draw, Rng& rng) const {
  const auto& a = one_forward_[static_cast<std::size_t>(draw.qubits.a)][static_cast<std::size_t>(draw.dressing_a)];
  const auto& b = one_forward_[static_cast<std::size_t>(draw.qubits.b)][static_cast<std::size_t>(draw.dressing_b)];
  const auto& two = two_forward_[static_cast<std::size_t>(draw.position)];
  const std::size_t j = uniform_index(rng, a.size());
  const std::size_t l = uniform_index(rng, b.size());
  const std::size_t m = uniform_index(rng, two.size());
  return two[m] * kron2(a[j], b[l]);
}

Matrix4 EchoModel::sample_backward_adjoint(const GateDraw& draw, Rng& rng) const {
  const auto& a = one_backward_adj_[static_cast<std::size_t>(draw.qubits.a)][static_cast<std::size_t>(draw.dressing_a)];
  const auto& b = one_backward_adj_[static_cast<std::size_t>(draw.qubits.b)][static_cast<std::size_t>(draw.dressing_b)];
  const auto& two = two_backward_adj_[static_cast<std::size_t>(draw.position)];
  const std::size_t j = uniform_index(rng, a.size());
  const std::size_t l = uniform_index(rng, b.size());
  const std::size_t m = uniform_index(rng, two.size());
  return two[m] * kron2(a[j], b[l]);
}

TrajectoryRow run_trajectory(const EchoModel& model, int d_max, TrajectorySeeds seeds) {
  if (d_max < 0) throw InvalidArgument("d_max must be nonnegative");
  StateVector psi(model.layout().num_qubits());
  StateVector phi(model.layout().num_qubits());
  return echo_trajectory(model, d_max, seeds, psi, phi);
}

FidelityRecord run_campaign(const NoiseModel& model, const CampaignOptions& options) {
  if (options.d_max < 0) throw InvalidArgument("d_max must be nonnegative");
  if (options.n_traj < 1) throw InvalidArgument("n_traj must be at least 1");
  if (model.layout.num_qubits() > kMaxStatevectorQubits) {
    throw ResourceLimit("state vector limited to " + std::to_string(kMaxStatevectorQubits) + " qubits");
  }
  const EchoModel echo(model, options.basis);
  FidelityRecord record = run_chunked(options.d_max, options.first_trajectory, options.n_traj, options.workers,
                                      [&](std::uint64_t j) {
                                        return run_trajectory(echo, options.d_max,
                                                              trajectory_seeds(options.master_seed, j));
                                      });
  record.master_seed = options.master_seed;
  return record;
}

}  // namespace qecho
