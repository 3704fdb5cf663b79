#pragma once

#include <map>
#include <span>
#include <variant>
#include <vector>

#include "json.hpp"

#include "qecho/common.hpp"
#include "qecho/gates.hpp"
#include "qecho/geometry.hpp"
#include "qecho/spam.hpp"

namespace qecho {

// Noise map in uniform-weight Kraus form:
//   Phi(rho) = (1/n_k) sum_k K_k rho K_k^dag,  with (1/n_k) sum_k K_k^dag K_k = I.
class KrausChannel {
 public:
  KrausChannel() = default;
  explicit KrausChannel(std::vector<Matrix> ops);

  static KrausChannel identity(int dim);
  static KrausChannel unitary(const Matrix& u);
  // Pauli-twirled depolarizing channel on dim = 2^m with entanglement fidelity f.
  static KrausChannel depolarizing(int dim, double fidelity);

  int dim() const { return dim_; }
  std::size_t size() const { return ops_.size(); }
  const std::vector<Matrix>& ops() const { return ops_; }
  const Matrix& op(std::size_t k) const { return ops_[k]; }

  // Max-abs deviation of (1/n_k) sum K^dag K from the identity.
  double completeness_error() const;

 private:
  int dim_ = 0;
  std::vector<Matrix> ops_;
};

Matrix haar_unitary(int dim, Rng& rng);

// Haar random m*dim x dim semi-unitary sliced into m operators (rescaled by sqrt(m)).
KrausChannel random_channel_m(int dim, int m, Rng& rng);

// dim^-2 sum_{m=1}^{dim^2} N_m as one concatenated uniform-weight list.
KrausChannel random_mixed_channel(int dim, Rng& rng);

// Scale of the Hermitian generator relative to (G + G^dag)/2, G complex
// standard Gaussian. The default sqrt(2) gives H = (G + G^dag)/sqrt(2), whose
// entries are standard complex Gaussians (GUE with unit off-diagonal variance).
inline constexpr double kDefaultGeneratorScale = 1.4142135623730951;

// exp(i sqrt(p/(dim-1)) H) via the Hermitian eigendecomposition of H.
Matrix coherent_unitary(int dim, double p, Rng& rng, double generator_scale = kDefaultGeneratorScale);

struct NoiseChannelOptions {
  bool coherent = true;
  bool incoherent = true;
  double generator_scale = kDefaultGeneratorScale;
};

// U_{p''/2} [ (1 - p'/2) rho + (p'/2) N_rand(rho) ] U_{p''/2}^dag with
// p', p'' uniform on [p/sqrt(2), sqrt(2) p]. Requires 0 <= p <= 0.1.
KrausChannel noise_channel(int dim, double p, Rng& rng, const NoiseChannelOptions& options = {});

// (1/n_k) sum_k |tr K_k|^2 / dim^2.
double entanglement_fidelity(const KrausChannel& channel);

// Thrown when every Kraus operator is traceless.
class NoRotationTarget : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// Unitary remix of the Kraus list so every operator has trace dim*sqrt(f)
// (real, nonnegative). Householder reflection of the trace vector onto the
// uniform direction followed by a global phase.
KrausChannel equal_trace_basis(const KrausChannel& channel);

// ---- superoperators -------------------------------------------------------
//
// Column-stacking vectorization on an n-qubit space (dimension D = 2^n,
// qubit 0 = least significant bit): vec(rho)[i + D j] = rho(i, j), so the
// superoperator of rho -> K rho K^dag is conj(K) (x) K.

inline constexpr int kMaxSuperoperatorDim = 16;

// Lift a local operator to the full n-qubit space. The local index of m is
// built with qubits[0] as the most significant bit.
Matrix embed_operator(const Matrix& m, std::span<const int> qubits, int num_qubits);

Matrix superoperator(const KrausChannel& channel);
Matrix superoperator(const Matrix& unitary);

struct SuperopFactor {
  std::variant<Matrix, KrausChannel> op;
  std::vector<int> qubits;
};

// Product of the factors' superoperators in application order (first
// factor acts first). Requires 2^num_qubits <= kMaxSuperoperatorDim.
Matrix compose_superoperator(std::span<const SuperopFactor> factors, int num_qubits);

// tr(S) / D^2 for a superoperator on a D-dimensional space.
double superoperator_fidelity(const Matrix& superop);

Matrix apply_superoperator(const Matrix& superop, const Matrix& rho);

// ---- noise model ----------------------------------------------------------

enum class KrausBasis { generated, equal_trace };

struct NoiseModel {
  QubitLayout layout;
  // Channel following the iSWAP at each position, on the forward and on the
  // backward leg. build_noise_model uses the same channel for both.
  std::vector<KrausChannel> two_qubit_forward;
  std::vector<KrausChannel> two_qubit_backward;
  // one_qubit[q][label] follows the 1-qubit gate `label` on qubit q.
  std::vector<std::array<KrausChannel, kNumGateLabels>> one_qubit;
  ProductEnsemble spam_init;
  ProductEnsemble spam_fin;
  double p2 = 0.0;
  double p1 = 0.0;
  std::uint64_t seed = 0;
  KrausBasis basis = KrausBasis::generated;

  const KrausChannel& one_qubit_channel(int qubit, GateLabel label) const {
    return one_qubit[static_cast<std::size_t>(qubit)][static_cast<std::size_t>(label)];
  }

  // Throws InvalidArgument when the model does not cover the layout.
  void validate() const;
};

struct NoiseModelOptions {
  NoiseChannelOptions channel;
  double spam_q = 0.0;
};

// One fresh noise_channel(4, p2) per position and one noise_channel(2, p2/10)
// per (qubit, label); deterministic in (layout, p2, seed).
NoiseModel build_noise_model(const QubitLayout& layout, double p2, std::uint64_t seed,
                             const NoiseModelOptions& options = {});

// Same 2-qubit channel at every position and on both legs, same 1-qubit
// channel for every (qubit, label). Gate-independent by construction.
NoiseModel uniform_noise_model(const QubitLayout& layout, const KrausChannel& two_qubit,
                               const KrausChannel& one_qubit);

// Rotates every channel to the equal-trace basis. Channels with no rotation
// target keep their generated basis.
NoiseModel to_equal_trace(const NoiseModel& model);

nlohmann::json layout_to_json(const QubitLayout& layout);
QubitLayout layout_from_json(const nlohmann::json& j);
nlohmann::json noise_model_to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const nlohmann::json& j);

}  // namespace qecho
