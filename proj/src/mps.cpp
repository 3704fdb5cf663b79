#include "qecho/mps.hpp"

#include <algorithm>
#include <string>

extern "C" void zgesdd_(const char* jobz, const int* m, const int* n, std::complex<double>* a, const int* lda,
                        double* s, std::complex<double>* u, const int* ldu, std::complex<double>* vt, const int* ldvt,
                        std::complex<double>* work, const int* lwork, double* rwork, int* iwork, int* info,
                        std::size_t jobz_len);

namespace qecho {

namespace {

// Singular values below this fraction of the largest one are numerically zero.
constexpr double kRankTolerance = 1e-14;

Matrix thin_q(const Eigen::HouseholderQR<Matrix>& qr, Eigen::Index cols) {
  return qr.householderQ() * Matrix::Identity(qr.rows(), cols);
}

Matrix thin_r(const Eigen::HouseholderQR<Matrix>& qr, Eigen::Index rows) {
  return qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
}

struct ThinSvd {
  Matrix u;
  Eigen::VectorXd s;
  Matrix vt;
};

// LAPACK's divide-and-conquer SVD is several times faster than Eigen's at
// the bond sizes used here; Eigen stays as the fallback.
ThinSvd thin_svd(Matrix a) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  const int k = std::min(m, n);
  ThinSvd out{Matrix(m, k), Eigen::VectorXd(k), Matrix(k, n)};
  thread_local std::vector<cplx> work;
  thread_local std::vector<double> rwork;
  thread_local std::vector<int> iwork;
  const std::size_t big = static_cast<std::size_t>(std::max(m, n));
  rwork.resize(static_cast<std::size_t>(k) * std::max<std::size_t>(5 * k + 7, 2 * big + 2 * k + 1));
  iwork.resize(8 * static_cast<std::size_t>(k));
  int info = 0, lwork = -1;
  cplx query;
  const char job = 'S';
  zgesdd_(&job, &m, &n, a.data(), &m, out.s.data(), out.u.data(), &m, out.vt.data(), &k, &query, &lwork,
          rwork.data(), iwork.data(), &info, 1);
  if (info == 0) {
    lwork = static_cast<int>(query.real());
    work.resize(static_cast<std::size_t>(std::max(1, lwork)));
    Matrix copy = a;
    zgesdd_(&job, &m, &n, copy.data(), &m, out.s.data(), out.u.data(), &m, out.vt.data(), &k, work.data(), &lwork,
            rwork.data(), iwork.data(), &info, 1);
  }
  if (info == 0 && out.u.allFinite() && out.vt.allFinite()) return out;
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalFailure("SVD failed in two-site update");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV().adjoint()};
}

Matrix4 swap_sites(const Matrix4& m) {
  Matrix4 p = Matrix4::Zero();
  p(0, 0) = p(1, 2) = p(2, 1) = p(3, 3) = 1.0;
  return p * m * p;
}

}  // namespace

MpsState::MpsState(int num_sites, int chi) : chi_(chi) {
  if (num_sites < 1) throw InvalidArgument("MPS needs at least one site");
  if (chi < 1) throw InvalidArgument("bond cap chi must be at least 1");
  sites_.resize(static_cast<std::size_t>(num_sites));
  for (auto& s : sites_) {
    s[0] = Matrix::Ones(1, 1);
    s[1] = Matrix::Zero(1, 1);
  }
}

MpsState MpsState::product(std::span<const Eigen::Vector2cd> factors, int chi) {
  MpsState s(static_cast<int>(factors.size()), chi);
  s.set_product(factors);
  return s;
}

std::vector<int> MpsState::bond_dims() const {
  std::vector<int> dims;
  dims.push_back(static_cast<int>(sites_.front()[0].rows()));
  for (const auto& s : sites_) dims.push_back(static_cast<int>(s[0].cols()));
  return dims;
}

void MpsState::set_tensors(int site, Matrix zero, Matrix one) {
  if (site < 0 || site >= num_sites()) throw InvalidArgument("site out of range");
  if (zero.rows() != one.rows() || zero.cols() != one.cols()) {
    throw InvalidArgument("both physical slices need the same bond shape");
  }
  sites_[static_cast<std::size_t>(site)] = {std::move(zero), std::move(one)};
}

void MpsState::set_product(std::span<const Eigen::Vector2cd> factors) {
  if (static_cast<int>(factors.size()) != num_sites()) throw InvalidArgument("product state has the wrong site count");
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    sites_[i][0] = Matrix::Constant(1, 1, factors[i](0));
    sites_[i][1] = Matrix::Constant(1, 1, factors[i](1));
  }
  center_ = 0;
}

void MpsState::move_center(int site) {
  if (site < 0 || site >= num_sites()) throw InvalidArgument("site out of range");
  while (center_ < site) {
    auto& a = sites_[static_cast<std::size_t>(center_)];
    auto& b = sites_[static_cast<std::size_t>(center_) + 1];
    const Eigen::Index dl = a[0].rows(), dr = a[0].cols();
    Matrix stacked(2 * dl, dr);
    stacked << a[0], a[1];
    Eigen::HouseholderQR<Matrix> qr(stacked);
    const Eigen::Index k = std::min(2 * dl, dr);
    const Matrix q = thin_q(qr, k);
    const Matrix r = thin_r(qr, k);
    a[0] = q.topRows(dl);
    a[1] = q.bottomRows(dl);
    b[0] = r * b[0];
    b[1] = r * b[1];
    ++center_;
  }
  while (center_ > site) {
    auto& a = sites_[static_cast<std::size_t>(center_)];
    auto& b = sites_[static_cast<std::size_t>(center_) - 1];
    const Eigen::Index dl = a[0].rows(), dr = a[0].cols();
    Matrix wide(dl, 2 * dr);
    wide << a[0], a[1];
    // LQ via the QR of the adjoint: wide = R^dag Q^dag
    Eigen::HouseholderQR<Matrix> qr(wide.adjoint());
    const Eigen::Index k = std::min(dl, 2 * dr);
    const Matrix q = thin_q(qr, k).adjoint();
    const Matrix l = thin_r(qr, k).adjoint();
    a[0] = q.leftCols(dr);
    a[1] = q.rightCols(dr);
    b[0] = b[0] * l;
    b[1] = b[1] * l;
    --center_;
  }
}

double MpsState::apply_two_site(const Matrix4& m, int left) {
  if (left < 0 || left + 1 >= num_sites()) throw InvalidArgument("two-site block out of range");
  move_center(left);
  auto& a = sites_[static_cast<std::size_t>(left)];
  auto& b = sites_[static_cast<std::size_t>(left) + 1];
  const Eigen::Index dl = a[0].rows(), dr = b[0].cols();

  Matrix pair[2][2];
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t) pair[s][t] = a[s] * b[t];
  Matrix theta(2 * dl, 2 * dr);
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      Matrix block = Matrix::Zero(dl, dr);
      for (int s2 = 0; s2 < 2; ++s2)
        for (int t2 = 0; t2 < 2; ++t2) {
          const cplx c = m(2 * s + t, 2 * s2 + t2);
          if (c != cplx(0.0, 0.0)) block += c * pair[s2][t2];
        }
      theta.block(s * dl, t * dr, dl, dr) = block;
    }
  }
  if (!theta.allFinite()) throw NumericalFailure("non-finite two-site block");

  const ThinSvd svd = thin_svd(std::move(theta));
  const Eigen::VectorXd& s = svd.s;
  Eigen::Index rank = 0;
  const double floor = s.size() > 0 ? kRankTolerance * s(0) : 0.0;
  while (rank < s.size() && s(rank) > floor) ++rank;
  const Eigen::Index keep = std::max<Eigen::Index>(1, std::min<Eigen::Index>(rank, chi_));
  double discarded = 0.0;
  for (Eigen::Index j = keep; j < s.size(); ++j) discarded += s(j) * s(j);

  const Matrix u = svd.u.leftCols(keep);
  const Matrix sv = s.head(keep).cast<cplx>().asDiagonal() * svd.vt.topRows(keep);
  a[0] = u.topRows(dl);
  a[1] = u.bottomRows(dl);
  b[0] = sv.leftCols(dr);
  b[1] = sv.rightCols(dr);
  center_ = left + 1;
  return discarded;
}

double MpsState::apply_pair(const Matrix4& m, QubitPair pair) {
  if (pair.b == pair.a + 1) return apply_two_site(m, pair.a);
  if (pair.a == pair.b + 1) return apply_two_site(swap_sites(m), pair.b);
  throw InvalidArgument("MPS gates must act on neighbouring sites");
}

Eigen::VectorXcd MpsState::to_dense() const {
  if (num_sites() > 20) throw ResourceLimit("dense expansion limited to 20 sites");
  const std::size_t dim = std::size_t{1} << num_sites();
  Eigen::VectorXcd out(static_cast<Eigen::Index>(dim));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    Matrix acc = sites_[0][idx & 1u];
    for (int i = 1; i < num_sites(); ++i) acc = acc * sites_[static_cast<std::size_t>(i)][(idx >> i) & 1u];
    out(static_cast<Eigen::Index>(idx)) = acc(0, 0);
  }
  return out;
}

double MpsState::norm() const { return std::sqrt(std::abs(overlap(*this, *this))); }

double MpsState::canonical_error() const {
  double err = 0.0;
  for (int i = 0; i < num_sites(); ++i) {
    const auto& s = sites_[static_cast<std::size_t>(i)];
    if (i < center_) {
      const Matrix g = s[0].adjoint() * s[0] + s[1].adjoint() * s[1];
      err = std::max(err, (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    } else if (i > center_) {
      const Matrix g = s[0] * s[0].adjoint() + s[1] * s[1].adjoint();
      err = std::max(err, (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    }
  }
  return err;
}

cplx overlap(const MpsState& bra, const MpsState& ket) {
  if (bra.num_sites() != ket.num_sites()) throw InvalidArgument("overlap of MPS with different site counts");
  Matrix env = Matrix::Ones(1, 1);
  for (int i = 0; i < bra.num_sites(); ++i) {
    env = bra.tensor(i, 0).adjoint() * env * ket.tensor(i, 0) + bra.tensor(i, 1).adjoint() * env * ket.tensor(i, 1);
  }
  return env(0, 0);
}

MpsState product_mps(int n) {
  if (n < 2) throw InvalidArgument("product_mps needs n >= 2");
  return MpsState(n);
}

MpsState ghz_mps() {
  MpsState s(3);
  Matrix a0(1, 2), a1(1, 2);
  a0 << 1, 0;
  a1 << 0, 1;
  Matrix b0 = Matrix::Zero(2, 2), b1 = Matrix::Zero(2, 2);
  b0(0, 0) = b1(1, 1) = 1.0 / std::sqrt(2.0);
  Matrix c0(2, 1), c1(2, 1);
  c0 << 1, 0;
  c1 << 0, 1;
  s.set_tensors(0, a0, a1);
  s.set_tensors(1, b0, b1);
  s.set_tensors(2, c0, c1);
  s.set_center(1);
  return s;
}

TrajectoryRow run_mps_trajectory(const EchoModel& model, int d_max, int chi, TrajectorySeeds seeds) {
  if (d_max < 0) throw InvalidArgument("d_max must be nonnegative");
  MpsState psi(model.layout().num_qubits(), chi);
  MpsState phi(model.layout().num_qubits(), chi);
  return echo_trajectory(model, d_max, seeds, psi, phi);
}

FidelityRecord run_mps_campaign(const NoiseModel& model, const MpsCampaignOptions& options) {
  if (model.layout.dimension() != 1) throw InvalidArgument("MPS campaigns need a 1-D layout");
  for (const QubitPair& p : model.layout.positions()) {
    if (std::abs(p.a - p.b) != 1) throw InvalidArgument("MPS campaigns need nearest-neighbour gates");
  }
  if (options.d_max < 0) throw InvalidArgument("d_max must be nonnegative");
  if (options.n_traj < 1) throw InvalidArgument("n_traj must be at least 1");
  if (options.chi < 1) throw InvalidArgument("bond cap chi must be at least 1");
  const EchoModel echo(model, KrausBasis::equal_trace);
  FidelityRecord record = run_chunked(options.d_max, options.first_trajectory, options.n_traj, options.workers,
                                      [&](std::uint64_t j) {
                                        return run_mps_trajectory(echo, options.d_max, options.chi,
                                                                  trajectory_seeds(options.master_seed, j));
                                      });
  record.master_seed = options.master_seed;
  return record;
}

}  // namespace qecho
