#include <cmath>

#include "doctest.h"
#include "qecho/mps.hpp"

using namespace qecho;

namespace {

std::vector<Eigen::Vector2cd> random_product(int n, Rng& rng) {
  std::normal_distribution<double> g;
  std::vector<Eigen::Vector2cd> out(static_cast<std::size_t>(n));
  for (auto& v : out) {
    v << cplx(g(rng), g(rng)), cplx(g(rng), g(rng));
    v.normalize();
  }
  return out;
}

double max_abs(const Eigen::VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("mps") {

TEST_CASE("product state fixture") {
  const MpsState m = product_mps(4);
  const Eigen::VectorXcd v = m.to_dense();
  CHECK(v.size() == 16);
  CHECK(v(0) == cplx(1.0, 0.0));
  CHECK(v.norm() == doctest::Approx(1.0));
  for (int b : m.bond_dims()) CHECK(b == 1);
  CHECK(m.norm() == doctest::Approx(1.0));
}

TEST_CASE("GHZ fixture") {
  const MpsState ghz = ghz_mps();
  const std::vector<int> bonds{1, 2, 2, 1};
  CHECK(ghz.bond_dims() == bonds);
  const Eigen::VectorXcd v = ghz.to_dense();
  CHECK(std::abs(v(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(v(7) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(overlap(product_mps(3), ghz) - cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
  CHECK(ghz.canonical_error() < 1e-12);
}

TEST_CASE("product states match the dense layout") {
  Rng rng(1);
  const auto f = random_product(5, rng);
  const MpsState m = MpsState::product(f);
  const StateVector s = StateVector::product(f);
  CHECK(max_abs(m.to_dense() - s.amplitudes()) < 1e-14);
}

TEST_CASE("Bell pair at chi = 1 discards half the weight") {
  MpsState m = product_mps(2);
  m = MpsState::product(std::vector<Eigen::Vector2cd>(2, Eigen::Vector2cd(1, 0)), 1);
  Matrix4 bell_prep;
  const double r = 1.0 / std::sqrt(2.0);
  // CNOT (control a) after a Hadamard on a, in the local 2*bit(a)+bit(b) index
  bell_prep << r, 0, r, 0,
               0, r, 0, r,
               0, r, 0, -r,
               r, 0, -r, 0;
  const double discarded = m.apply_two_site(bell_prep, 0);
  CHECK(discarded == doctest::Approx(0.5));
  CHECK(m.norm() * m.norm() == doctest::Approx(0.5));
  for (int b : m.bond_dims()) CHECK(b <= 1);

  MpsState exact = MpsState::product(std::vector<Eigen::Vector2cd>(2, Eigen::Vector2cd(1, 0)));
  CHECK(exact.apply_two_site(bell_prep, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(exact.bond_dims()[1] == 2);
  const Eigen::VectorXcd v = exact.to_dense();
  CHECK(std::abs(v(0) - r) < 1e-14);
  CHECK(std::abs(v(3) - r) < 1e-14);
}

TEST_CASE("gate sequences agree with the state vector and invert cleanly") {
  Rng rng(2);
  const int n = 10;
  const auto f = random_product(n, rng);
  MpsState m = MpsState::product(f);
  StateVector s = StateVector::product(f);
  std::vector<std::pair<Matrix4, QubitPair>> gates;
  for (int k = 0; k < 40; ++k) {
    const int left = static_cast<int>(uniform_index(rng, n - 1));
    const QubitPair pair = (k % 3 == 0) ? QubitPair{left + 1, left} : QubitPair{left, left + 1};
    gates.emplace_back(Matrix4(haar_unitary(4, rng)), pair);
  }
  for (const auto& [u, pair] : gates) {
    CHECK(m.apply_pair(u, pair) < 1e-20);
    s.apply_pair(u, pair);
  }
  CHECK(max_abs(m.to_dense() - s.amplitudes()) < 1e-10);
  CHECK(m.canonical_error() < 1e-10);
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) m.apply_pair(it->first.adjoint(), it->second);
  CHECK(max_abs(m.to_dense() - StateVector::product(f).amplitudes()) < 1e-10);
}

TEST_CASE("truncation respects the bond cap") {
  Rng rng(3);
  const int n = 8, chi = 3;
  MpsState m = MpsState::product(random_product(n, rng), chi);
  double total = 0.0;
  for (int layer = 0; layer < 8; ++layer)
    for (int left = layer % 2; left + 1 < n; left += 2) {
      const double w = m.apply_two_site(Matrix4(haar_unitary(4, rng)), left);
      CHECK(w >= 0.0);
      total += w;
      for (int b : m.bond_dims()) CHECK(b <= chi);
    }
  CHECK(total > 0.0);
  CHECK(m.norm() < 1.0);
  CHECK(m.canonical_error() < 1e-10);
}

TEST_CASE("center moves keep the state") {
  Rng rng(4);
  MpsState m = MpsState::product(random_product(6, rng));
  for (int left = 0; left < 5; ++left) m.apply_two_site(Matrix4(haar_unitary(4, rng)), left);
  const Eigen::VectorXcd before = m.to_dense();
  for (int site : {0, 5, 2, 4, 1}) {
    m.move_center(site);
    CHECK(m.center() == site);
    CHECK(m.canonical_error() < 1e-10);
    CHECK(max_abs(m.to_dense() - before) < 1e-12);
  }
}

TEST_CASE("overlap matches the dense inner product") {
  Rng rng(5);
  MpsState a = MpsState::product(random_product(6, rng));
  MpsState b = MpsState::product(random_product(6, rng));
  for (int left = 0; left < 5; ++left) {
    a.apply_two_site(Matrix4(haar_unitary(4, rng)), left);
    b.apply_two_site(Matrix4(haar_unitary(4, rng)), 4 - left);
  }
  const cplx dense = a.to_dense().dot(b.to_dense());
  CHECK(std::abs(overlap(a, b) - dense) < 1e-12);
}

TEST_CASE("MPS and state-vector trajectories coincide without truncation") {
  const auto model = build_noise_model(build_chain(6), 0.01, 11, {{}, 0.01});
  const EchoModel echo(model);
  for (std::uint64_t j = 0; j < 5; ++j) {
    const auto seeds = trajectory_seeds(3, j);
    const auto dense = run_trajectory(echo, 12, seeds);
    const auto mps = run_mps_trajectory(echo, 12, kUnboundedBond, seeds);
    for (int d = 0; d <= 12; ++d) {
      CHECK(std::abs(dense.fidelity[d] - mps.fidelity[d]) < 1e-8);
      CHECK(mps.truncation[d] < 1e-20);
    }
  }
}

TEST_CASE("MPS campaigns") {
  const auto model = build_noise_model(build_chain(6), 0.02, 12);
  const MpsCampaignOptions opt{.d_max = 8, .chi = 4, .n_traj = 300, .master_seed = 5};
  const auto a = run_mps_campaign(model, opt);
  auto opt3 = opt;
  opt3.workers = 3;
  const auto b = run_mps_campaign(model, opt3);
  CHECK(a.sum == b.sum);
  CHECK(a.trunc_sum == b.trunc_sum);
  CHECK(a.trunc_sum[0] == 0.0);
  // only odd layers touch the centre bond, the one bond that can exceed chi = 4
  CHECK(a.trunc_sum[3] > 0.0);
  CHECK(a.trunc_sum[4] == 0.0);
  // truncation only loses weight relative to the exact engine
  auto exact = opt;
  exact.chi = kUnboundedBond;
  const auto c = run_mps_campaign(model, exact);
  CHECK(a.sum[8] < c.sum[8]);
  for (double t : c.trunc_sum) CHECK(t < 1e-12);
}

TEST_CASE("MPS guards") {
  CHECK_THROWS_AS(MpsState(0), InvalidArgument);
  CHECK_THROWS_AS(MpsState(4, 0), InvalidArgument);
  MpsState m = product_mps(4);
  CHECK_THROWS_AS(m.apply_pair(Matrix4::Identity(), {0, 2}), InvalidArgument);
  CHECK_THROWS_AS(m.apply_two_site(Matrix4::Identity(), 3), InvalidArgument);
  CHECK_THROWS_AS(m.move_center(4), InvalidArgument);
  CHECK_THROWS_AS(MpsState(21).to_dense(), ResourceLimit);
  const auto grid = build_noise_model(build_grid(2, 2), 0.01, 1);
  CHECK_THROWS_AS(run_mps_campaign(grid, {.d_max = 2, .chi = 4, .n_traj = 2}), InvalidArgument);
  const auto chain = build_noise_model(build_chain(3), 0.01, 1);
  CHECK_THROWS_AS(run_mps_campaign(chain, {.d_max = 2, .chi = 0, .n_traj = 2}), InvalidArgument);
}

}
