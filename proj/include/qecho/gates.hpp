#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "qecho/common.hpp"
#include "qecho/geometry.hpp"

namespace qecho {

// The three dressings drawn before each iSWAP.
enum class Dressing : std::uint8_t { sqrt_x = 0, sqrt_y = 1, sqrt_w = 2 };
inline constexpr int kNumDressings = 3;

// The six elementary 1-qubit gates; each carries its own noise channel.
enum class GateLabel : std::uint8_t {
  sqrt_x = 0,
  sqrt_y = 1,
  sqrt_w = 2,
  sqrt_x_dag_z = 3,
  sqrt_y_dag_z = 4,
  sqrt_w_dag_z = 5,
};
inline constexpr int kNumGateLabels = 6;

constexpr GateLabel forward_label(Dressing d) { return static_cast<GateLabel>(static_cast<int>(d)); }
constexpr GateLabel inverse_label(Dressing d) { return static_cast<GateLabel>(static_cast<int>(d) + 3); }

std::string_view label_name(GateLabel label);
GateLabel parse_gate_label(std::string_view name);

// Principal square root of X, Y or W = (X+Y)/sqrt(2) (eigenphases 0 and pi/2),
// or its adjoint followed by Z for the dagger-Z labels.
Matrix2 single_qubit_gate(GateLabel label);

const Matrix4& iswap();

struct GateDraw {
  int layer = 1;
  int position = 0;
  QubitPair qubits;
  Dressing dressing_a = Dressing::sqrt_x;
  Dressing dressing_b = Dressing::sqrt_x;
};

// Two-qubit matrices use the Kronecker convention: the local index is
// 2 * bit(qubits.a) + bit(qubits.b), so A (x) B acts with A on qubits.a.
Matrix4 dressed_iswap(const GateDraw& draw);

struct ElementaryGate {
  enum class Kind : std::uint8_t { iswap, single };
  Kind kind = Kind::iswap;
  GateLabel label = GateLabel::sqrt_x;
  QubitPair qubits;  // for single-qubit gates only qubits.a is used
};

// [iSWAP on the pair, sqrt(.)^dag Z on a, sqrt(.)^dag Z on b], in application order.
std::array<ElementaryGate, 3> inverse_decomposition(const GateDraw& draw);

// Ordered product (last applied leftmost) of gates acting within draw's pair.
Matrix4 sequence_matrix(std::span<const ElementaryGate> gates, QubitPair pair);

std::vector<GateDraw> sample_layer(const QubitLayout& layout, int t, Rng& rng);

}  // namespace qecho
