#include "qecho/gates.hpp"

#include <cmath>
#include <string>

namespace qecho {

namespace {

constexpr cplx kI{0.0, 1.0};

Matrix2 pauli_x() { return (Matrix2() << 0, 1, 1, 0).finished(); }
Matrix2 pauli_y() { return (Matrix2() << 0, -kI, kI, 0).finished(); }
Matrix2 pauli_z() { return (Matrix2() << 1, 0, 0, -1).finished(); }

// Principal root of an involutory Hermitian P: eigenvalue 1 -> 1, -1 -> i.
Matrix2 principal_sqrt(const Matrix2& p) {
  return ((1.0 + kI) * Matrix2::Identity() + (1.0 - kI) * p) / 2.0;
}

Matrix2 root_for(int base) {
  switch (base) {
    case 0: return principal_sqrt(pauli_x());
    case 1: return principal_sqrt(pauli_y());
    default: return principal_sqrt((pauli_x() + pauli_y()) / std::sqrt(2.0));
  }
}

constexpr const char* kNames[kNumGateLabels] = {"sqrtX", "sqrtY", "sqrtW",
                                               "sqrtXdagZ", "sqrtYdagZ", "sqrtWdagZ"};

}  // namespace

std::string_view label_name(GateLabel label) { return kNames[static_cast<int>(label)]; }

GateLabel parse_gate_label(std::string_view name) {
  for (int i = 0; i < kNumGateLabels; ++i) {
    if (name == kNames[i]) return static_cast<GateLabel>(i);
  }
  throw InvalidArgument("unknown gate label '" + std::string(name) + "'");
}

Matrix2 single_qubit_gate(GateLabel label) {
  const int v = static_cast<int>(label);
  if (v < 0 || v >= kNumGateLabels) throw InvalidArgument("unknown gate label");
  if (v < 3) return root_for(v);
  return root_for(v - 3).adjoint() * pauli_z();
}

const Matrix4& iswap() {
  static const Matrix4 m = (Matrix4() << 1, 0, 0, 0,
                                         0, 0, -kI, 0,
                                         0, -kI, 0, 0,
                                         0, 0, 0, 1).finished();
  return m;
}

Matrix4 dressed_iswap(const GateDraw& draw) {
  const Matrix2 ga = single_qubit_gate(forward_label(draw.dressing_a));
  const Matrix2 gb = single_qubit_gate(forward_label(draw.dressing_b));
  Matrix4 local;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) local.block<2, 2>(2 * i, 2 * j) = ga(i, j) * gb;
  return iswap() * local;
}

std::array<ElementaryGate, 3> inverse_decomposition(const GateDraw& draw) {
  using Kind = ElementaryGate::Kind;
  return {ElementaryGate{Kind::iswap, GateLabel::sqrt_x, draw.qubits},
          ElementaryGate{Kind::single, inverse_label(draw.dressing_a), {draw.qubits.a, draw.qubits.a}},
          ElementaryGate{Kind::single, inverse_label(draw.dressing_b), {draw.qubits.b, draw.qubits.b}}};
}

Matrix4 sequence_matrix(std::span<const ElementaryGate> gates, QubitPair pair) {
  Matrix4 total = Matrix4::Identity();
  for (const ElementaryGate& g : gates) {
    Matrix4 m;
    if (g.kind == ElementaryGate::Kind::iswap) {
      if (!((g.qubits.a == pair.a && g.qubits.b == pair.b) || (g.qubits.a == pair.b && g.qubits.b == pair.a))) {
        throw InvalidArgument("iSWAP outside the pair");
      }
      m = iswap();  // symmetric under exchange of its qubits
    } else {
      const Matrix2 s = single_qubit_gate(g.label);
      if (g.qubits.a == pair.a) {
        m = Matrix4::Zero();
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = s(i, j) * Matrix2::Identity();
      } else if (g.qubits.a == pair.b) {
        m = Matrix4::Zero();
        m.block<2, 2>(0, 0) = s;
        m.block<2, 2>(2, 2) = s;
      } else {
        throw InvalidArgument("single-qubit gate outside the pair");
      }
    }
    total = m * total;
  }
  return total;
}

std::vector<GateDraw> sample_layer(const QubitLayout& layout, int t, Rng& rng) {
  std::vector<GateDraw> draws;
  const auto positions = layout.layer_positions(t);
  draws.reserve(positions.size());
  for (int pos : positions) {
    GateDraw d;
    d.layer = t;
    d.position = pos;
    d.qubits = layout.positions()[static_cast<std::size_t>(pos)];
    d.dressing_a = static_cast<Dressing>(uniform_index(rng, kNumDressings));
    d.dressing_b = static_cast<Dressing>(uniform_index(rng, kNumDressings));
    draws.push_back(d);
  }
  return draws;
}

}  // namespace qecho
