#include "qecho/channels.hpp"
#include "qecho/statevec.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace qecho {

namespace {

Matrix complex_gaussian(int rows, int cols, Rng& rng) {
  // E|z|^2 = 1
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = cplx(normal(rng), normal(rng));
  return g;
}

bool is_power_of_two(int d) { return d >= 1 && (d & (d - 1)) == 0; }

}  // namespace

KrausChannel::KrausChannel(std::vector<Matrix> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw InvalidArgument("channel needs at least one Kraus operator");
  dim_ = static_cast<int>(ops_.front().rows());
  for (const Matrix& k : ops_) {
    if (k.rows() != dim_ || k.cols() != dim_) throw InvalidArgument("Kraus operators must share one square shape");
  }
}

KrausChannel KrausChannel::identity(int dim) { return KrausChannel({Matrix::Identity(dim, dim)}); }

KrausChannel KrausChannel::unitary(const Matrix& u) { return KrausChannel({u}); }

KrausChannel KrausChannel::depolarizing(int dim, double fidelity) {
  if (!is_power_of_two(dim) || dim > 4) throw InvalidArgument("depolarizing channel needs dim 1, 2 or 4");
  if (fidelity < 0.0 || fidelity > 1.0) throw InvalidArgument("fidelity must lie in [0, 1]");
  const std::array<Matrix2, 4> paulis = {
      Matrix2::Identity(), (Matrix2() << 0, 1, 1, 0).finished(),
      (Matrix2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(), (Matrix2() << 1, 0, 0, -1).finished()};
  std::vector<Matrix> strings;
  if (dim == 1) return identity(1);
  if (dim == 2) {
    for (const auto& p : paulis) strings.emplace_back(p);
  } else {
    for (const auto& p : paulis)
      for (const auto& q : paulis) strings.emplace_back(Eigen::kroneckerProduct(p, q).eval());
  }
  const double n = static_cast<double>(strings.size());
  std::vector<Matrix> ops;
  ops.push_back(std::sqrt(n * fidelity) * strings[0]);
  for (std::size_t k = 1; k < strings.size(); ++k) ops.push_back(std::sqrt(n * (1.0 - fidelity) / (n - 1.0)) * strings[k]);
  return KrausChannel(std::move(ops));
}

double KrausChannel::completeness_error() const {
  Matrix acc = Matrix::Zero(dim_, dim_);
  for (const Matrix& k : ops_) acc += k.adjoint() * k;
  acc /= static_cast<double>(ops_.size());
  return (acc - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
}

Matrix haar_unitary(int dim, Rng& rng) {
  if (dim < 1) throw InvalidArgument("unitary dimension must be positive");
  const Matrix g = complex_gaussian(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

KrausChannel random_channel_m(int dim, int m, Rng& rng) {
  if (dim < 1) throw InvalidArgument("channel dimension must be positive");
  if (m < 1 || m > dim * dim) throw InvalidArgument("Kraus count m must lie in [1, dim^2]");
  const Matrix u = haar_unitary(m * dim, rng);
  std::vector<Matrix> ops;
  ops.reserve(static_cast<std::size_t>(m));
  const double scale = std::sqrt(static_cast<double>(m));
  for (int k = 0; k < m; ++k) ops.push_back(scale * u.block(k * dim, 0, dim, dim));
  return KrausChannel(std::move(ops));
}

KrausChannel random_mixed_channel(int dim, Rng& rng) {
  if (dim != 2 && dim != 4) throw InvalidArgument("random mixed channel needs dim 2 or 4");
  const int d2 = dim * dim;
  const double total = d2 * (d2 + 1) / 2.0;
  std::vector<Matrix> ops;
  ops.reserve(static_cast<std::size_t>(total));
  for (int m = 1; m <= d2; ++m) {
    const KrausChannel nm = random_channel_m(dim, m, rng);
    // uniform-weight N_m ops are sqrt(m) E_k; the concatenated list needs sqrt(T / d^2) E_k
    const double rescale = std::sqrt(total / d2 / m);
    for (const Matrix& k : nm.ops()) ops.push_back(rescale * k);
  }
  return KrausChannel(std::move(ops));
}

Matrix coherent_unitary(int dim, double p, Rng& rng, double generator_scale) {
  if (dim < 2) throw InvalidArgument("coherent error needs dim >= 2");
  if (p < 0.0) throw InvalidArgument("infidelity scale must be nonnegative");
  const Matrix g = complex_gaussian(dim, dim, rng);
  if (p == 0.0) return Matrix::Identity(dim, dim);
  const Matrix h = generator_scale * (g + g.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed in coherent_unitary");
  const double eps = std::sqrt(p / (dim - 1));
  Eigen::VectorXcd phases(dim);
  for (int i = 0; i < dim; ++i) phases(i) = std::polar(1.0, eps * eig.eigenvalues()(i));
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

KrausChannel noise_channel(int dim, double p, Rng& rng, const NoiseChannelOptions& options) {
  if (!(p >= 0.0 && p <= 0.1)) throw InvalidArgument("noise scale p must lie in [0, 0.1]");
  if (dim != 2 && dim != 4) throw InvalidArgument("noise channel needs dim 2 or 4");
  if (p == 0.0) return KrausChannel::identity(dim);
  std::uniform_real_distribution<double> spread(p / std::sqrt(2.0), std::sqrt(2.0) * p);
  const double p_incoherent = spread(rng);
  const double p_coherent = spread(rng);

  std::vector<Matrix> mixed;
  if (options.incoherent) mixed = random_mixed_channel(dim, rng).ops();
  const Matrix u = options.coherent ? coherent_unitary(dim, p_coherent / 2.0, rng, options.generator_scale)
                                    : Matrix::Identity(dim, dim);
  if (mixed.empty()) return KrausChannel::unitary(u);

  const double total = static_cast<double>(mixed.size()) + 1.0;
  const double w = p_incoherent / 2.0;
  std::vector<Matrix> ops;
  ops.reserve(mixed.size() + 1);
  ops.push_back(std::sqrt(total * (1.0 - w)) * u);
  const double scale = std::sqrt(total * w / static_cast<double>(mixed.size()));
  for (const Matrix& k : mixed) ops.push_back(scale * (u * k));
  return KrausChannel(std::move(ops));
}

double entanglement_fidelity(const KrausChannel& channel) {
  double acc = 0.0;
  for (const Matrix& k : channel.ops()) acc += std::norm(k.trace());
  const double d = channel.dim();
  return acc / static_cast<double>(channel.size()) / (d * d);
}

KrausChannel equal_trace_basis(const KrausChannel& channel) {
  const std::size_t n = channel.size();
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) v(static_cast<Eigen::Index>(k)) = channel.op(k).trace();
  const double norm_v = v.norm();
  if (!(norm_v > 1e-300)) throw NoRotationTarget("every Kraus operator is traceless");

  // w = e^{i phi} |v| u with u uniform and phi chosen so that w^dag v is real.
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const cplx overlap = v.sum() * inv_sqrt_n;  // u^dag v
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0, 0.0);
  const Eigen::VectorXcd w = Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(n), phase * norm_v * inv_sqrt_n);
  const Eigen::VectorXcd x = v - w;
  const double xx = x.squaredNorm();

  std::vector<Matrix> ops(channel.ops());
  if (xx > 1e-28 * norm_v * norm_v) {
    // K'_k = K_k - 2 x_k (x^dag K) / |x|^2
    Matrix projected = Matrix::Zero(channel.dim(), channel.dim());
    for (std::size_t j = 0; j < n; ++j) projected += std::conj(x(static_cast<Eigen::Index>(j))) * channel.op(j);
    for (std::size_t k = 0; k < n; ++k) ops[k] -= (2.0 * x(static_cast<Eigen::Index>(k)) / xx) * projected;
  }
  const cplx unphase = std::conj(phase);
  for (Matrix& k : ops) k *= unphase;
  return KrausChannel(std::move(ops));
}

Matrix embed_operator(const Matrix& m, std::span<const int> qubits, int num_qubits) {
  const int k = static_cast<int>(qubits.size());
  if (m.rows() != (Eigen::Index{1} << k) || m.cols() != m.rows()) {
    throw InvalidArgument("operator shape does not match its qubit count");
  }
  std::size_t mask = 0;
  for (int q : qubits) {
    if (q < 0 || q >= num_qubits) throw InvalidArgument("qubit index out of range");
    if (mask & (std::size_t{1} << q)) throw InvalidArgument("repeated qubit index");
    mask |= std::size_t{1} << q;
  }
  const std::size_t dim = std::size_t{1} << num_qubits;
  auto local = [&](std::size_t idx) {
    std::size_t l = 0;
    for (int r = 0; r < k; ++r) l |= ((idx >> qubits[static_cast<std::size_t>(r)]) & 1u) << (k - 1 - r);
    return static_cast<Eigen::Index>(l);
  };
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if ((i & ~mask) != (j & ~mask)) continue;
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(local(i), local(j));
    }
  }
  return out;
}

Matrix superoperator(const KrausChannel& channel) {
  const Eigen::Index d = channel.dim();
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const Matrix& k : channel.ops()) s += Eigen::kroneckerProduct(k.conjugate(), k);
  return s / static_cast<double>(channel.size());
}

Matrix superoperator(const Matrix& unitary) { return Eigen::kroneckerProduct(unitary.conjugate(), unitary); }

Matrix compose_superoperator(std::span<const SuperopFactor> factors, int num_qubits) {
  if (num_qubits < 0 || num_qubits > 30 || (1 << num_qubits) > kMaxSuperoperatorDim) {
    throw ResourceLimit("superoperators are limited to Hilbert dimension " + std::to_string(kMaxSuperoperatorDim));
  }
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  Matrix total = Matrix::Identity(d * d, d * d);
  for (const SuperopFactor& f : factors) {
    Matrix s;
    if (const auto* u = std::get_if<Matrix>(&f.op)) {
      s = superoperator(embed_operator(*u, f.qubits, num_qubits));
    } else {
      const auto& ch = std::get<KrausChannel>(f.op);
      s = Matrix::Zero(d * d, d * d);
      for (const Matrix& k : ch.ops()) s += superoperator(embed_operator(k, f.qubits, num_qubits));
      s /= static_cast<double>(ch.size());
    }
    total = s * total;
  }
  return total;
}

double superoperator_fidelity(const Matrix& superop) {
  return superop.trace().real() / static_cast<double>(superop.rows());
}

Matrix apply_superoperator(const Matrix& superop, const Matrix& rho) {
  const Eigen::Index d = rho.rows();
  const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
  const Eigen::VectorXcd out = superop * v;
  return Eigen::Map<const Matrix>(out.data(), d, d);
}

// ---- noise model ----------------------------------------------------------

void NoiseModel::validate() const {
  const auto ng = static_cast<std::size_t>(layout.gates_per_period());
  if (two_qubit_forward.size() != ng || two_qubit_backward.size() != ng) {
    throw InvalidArgument("noise model needs a 2-qubit channel for every position");
  }
  for (std::size_t i = 0; i < ng; ++i) {
    if (two_qubit_forward[i].dim() != 4 || two_qubit_backward[i].dim() != 4) {
      throw InvalidArgument("2-qubit channels must act on dimension 4");
    }
  }
  if (one_qubit.size() != static_cast<std::size_t>(layout.num_qubits())) {
    throw InvalidArgument("noise model needs 1-qubit channels for every qubit");
  }
  for (const auto& row : one_qubit)
    for (const auto& ch : row)
      if (ch.dim() != 2) throw InvalidArgument("1-qubit channels must act on dimension 2");
  if (spam_init.num_qubits() != layout.num_qubits() || spam_fin.num_qubits() != layout.num_qubits()) {
    throw InvalidArgument("SPAM ensembles do not match the qubit count");
  }
}

NoiseModel build_noise_model(const QubitLayout& layout, double p2, std::uint64_t seed,
                             const NoiseModelOptions& options) {
  if (!(p2 >= 0.0 && p2 <= 0.1)) throw InvalidArgument("p2 must lie in [0, 0.1]");
  Rng rng(seed);
  const double p1 = 0.1 * p2;
  NoiseModel model{layout, {}, {}, {}, {}, {}, p2, p1, seed, KrausBasis::generated};
  for (int i = 0; i < layout.gates_per_period(); ++i) {
    model.two_qubit_forward.push_back(noise_channel(4, p2, rng, options.channel));
  }
  model.two_qubit_backward = model.two_qubit_forward;
  model.one_qubit.resize(static_cast<std::size_t>(layout.num_qubits()));
  for (auto& row : model.one_qubit) {
    for (auto& ch : row) ch = noise_channel(2, p1, rng, options.channel);
  }
  auto [init, fin] = default_spam(layout.num_qubits(), options.spam_q);
  model.spam_init = std::move(init);
  model.spam_fin = std::move(fin);
  return model;
}

NoiseModel uniform_noise_model(const QubitLayout& layout, const KrausChannel& two_qubit,
                               const KrausChannel& one_qubit) {
  NoiseModel model{layout, {}, {}, {}, {}, {}, 0.0, 0.0, 0, KrausBasis::generated};
  model.two_qubit_forward.assign(static_cast<std::size_t>(layout.gates_per_period()), two_qubit);
  model.two_qubit_backward = model.two_qubit_forward;
  std::array<KrausChannel, kNumGateLabels> row;
  row.fill(one_qubit);
  model.one_qubit.assign(static_cast<std::size_t>(layout.num_qubits()), row);
  model.spam_init = ProductEnsemble::zero_state(layout.num_qubits());
  model.spam_fin = model.spam_init;
  model.validate();
  return model;
}

NoiseModel to_equal_trace(const NoiseModel& model) {
  auto rotate = [](const KrausChannel& ch) {
    try {
      return equal_trace_basis(ch);
    } catch (const NoRotationTarget&) {
      return ch;
    }
  };
  NoiseModel out = model;
  for (auto& ch : out.two_qubit_forward) ch = rotate(ch);
  for (auto& ch : out.two_qubit_backward) ch = rotate(ch);
  for (auto& row : out.one_qubit)
    for (auto& ch : row) ch = rotate(ch);
  out.basis = KrausBasis::equal_trace;
  return out;
}

// ---- JSON -----------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != rows) throw InvalidArgument("Kraus operator must be square");
    for (Eigen::Index k = 0; k < rows; ++k) {
      const json& e = row.at(static_cast<std::size_t>(k));
      m(i, k) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

json channel_to_json(const KrausChannel& ch) {
  json ops = json::array();
  for (const Matrix& k : ch.ops()) ops.push_back(matrix_to_json(k));
  return {{"d_H", ch.dim()}, {"kraus", std::move(ops)}};
}

KrausChannel channel_from_json(const json& j) {
  std::vector<Matrix> ops;
  for (const json& k : j.at("kraus")) ops.push_back(matrix_from_json(k));
  KrausChannel ch(std::move(ops));
  if (ch.dim() != j.at("d_H").get<int>()) throw InvalidArgument("channel d_H does not match its operators");
  return ch;
}

json ensemble_to_json(const ProductEnsemble& e) {
  json factors = json::array();
  for (const auto& f : e.factors) {
    json members = json::array();
    for (const auto& v : f) members.push_back({{v(0).real(), v(0).imag()}, {v(1).real(), v(1).imag()}});
    factors.push_back(std::move(members));
  }
  return factors;
}

ProductEnsemble ensemble_from_json(const json& j) {
  ProductEnsemble e;
  for (const json& f : j) {
    ProductEnsemble::Factor factor;
    for (const json& v : f) {
      factor.emplace_back(cplx(v.at(0).at(0).get<double>(), v.at(0).at(1).get<double>()),
                          cplx(v.at(1).at(0).get<double>(), v.at(1).at(1).get<double>()));
    }
    e.factors.push_back(std::move(factor));
  }
  return e;
}

const char* lattice_name(Lattice l) {
  switch (l) {
    case Lattice::chain: return "chain";
    case Lattice::grid: return "grid";
    default: return "custom";
  }
}

}  // namespace

json layout_to_json(const QubitLayout& layout) {
  json layers = json::array();
  for (const auto& layer : layout.layers()) {
    json l = json::array();
    for (const QubitPair& p : layer) l.push_back({p.a, p.b});
    layers.push_back(std::move(l));
  }
  return {{"lattice", lattice_name(layout.lattice())},
          {"n", layout.num_qubits()},
          {"dimension", layout.dimension()},
          {"rows", layout.rows()},
          {"cols", layout.cols()},
          {"layers", std::move(layers)}};
}

QubitLayout layout_from_json(const json& j) {
  const std::string lattice = j.at("lattice").get<std::string>();
  if (lattice == "chain") return build_chain(j.at("n").get<int>());
  if (lattice == "grid") return build_grid(j.at("rows").get<int>(), j.at("cols").get<int>());
  std::vector<std::vector<QubitPair>> layers;
  for (const json& l : j.at("layers")) {
    std::vector<QubitPair> layer;
    for (const json& p : l) layer.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    layers.push_back(std::move(layer));
  }
  return QubitLayout(Lattice::custom, j.at("n").get<int>(), j.value("dimension", 1), j.value("rows", 1),
                     j.value("cols", j.at("n").get<int>()), std::move(layers));
}

json noise_model_to_json(const NoiseModel& model) {
  json fwd = json::array(), bwd = json::array(), one = json::array();
  for (const auto& ch : model.two_qubit_forward) fwd.push_back(channel_to_json(ch));
  for (const auto& ch : model.two_qubit_backward) bwd.push_back(channel_to_json(ch));
  for (const auto& row : model.one_qubit) {
    json r = json::array();
    for (const auto& ch : row) r.push_back(channel_to_json(ch));
    one.push_back(std::move(r));
  }
  return {{"format", "qecho-noise-model"},
          {"version", 1},
          {"p2", model.p2},
          {"p1", model.p1},
          {"seed", model.seed},
          {"basis", model.basis == KrausBasis::generated ? "generated" : "equal_trace"},
          {"layout", layout_to_json(model.layout)},
          {"two_qubit_forward", std::move(fwd)},
          {"two_qubit_backward", std::move(bwd)},
          {"one_qubit", std::move(one)},
          {"spam_init", ensemble_to_json(model.spam_init)},
          {"spam_fin", ensemble_to_json(model.spam_fin)}};
}

NoiseModel noise_model_from_json(const json& j) {
  if (j.at("format").get<std::string>() != "qecho-noise-model" || j.at("version").get<int>() != 1) {
    throw InvalidArgument("unsupported noise model format");
  }
  NoiseModel model{layout_from_json(j.at("layout")), {}, {}, {}, {}, {}, j.at("p2").get<double>(),
                   j.at("p1").get<double>(), j.at("seed").get<std::uint64_t>(),
                   j.at("basis").get<std::string>() == "equal_trace" ? KrausBasis::equal_trace
                                                                      : KrausBasis::generated};
  for (const json& ch : j.at("two_qubit_forward")) model.two_qubit_forward.push_back(channel_from_json(ch));
  for (const json& ch : j.at("two_qubit_backward")) model.two_qubit_backward.push_back(channel_from_json(ch));
  for (const json& row : j.at("one_qubit")) {
    if (row.size() != static_cast<std::size_t>(kNumGateLabels)) throw InvalidArgument("expected six 1-qubit channels");
    std::array<KrausChannel, kNumGateLabels> r;
    for (std::size_t l = 0; l < r.size(); ++l) r[l] = channel_from_json(row.at(l));
    model.one_qubit.push_back(std::move(r));
  }
  model.spam_init = ensemble_from_json(j.at("spam_init"));
  model.spam_fin = ensemble_from_json(j.at("spam_fin"));
  model.validate();
  return model;
}

}  // namespace qecho
