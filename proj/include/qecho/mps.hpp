#pragma once

#include <array>
#include <limits>
#include <span>
#include <vector>

#include "qecho/channels.hpp"
#include "qecho/common.hpp"
#include "qecho/record.hpp"
#include "qecho/statevec.hpp"

namespace qecho {

inline constexpr int kUnboundedBond = std::numeric_limits<int>::max();

// Open-boundary MPS with one orthogonality center. Site i holds two
// (left bond x right bond) matrices, one per physical value.
class MpsState {
 public:
  explicit MpsState(int num_sites, int chi = kUnboundedBond);
  static MpsState product(std::span<const Eigen::Vector2cd> factors, int chi = kUnboundedBond);

  int num_sites() const { return static_cast<int>(sites_.size()); }
  int chi() const { return chi_; }
  int center() const { return center_; }
  std::vector<int> bond_dims() const;  // n + 1 entries, boundaries included

  const Matrix& tensor(int site, int physical) const { return sites_[site][physical]; }
  void set_tensors(int site, Matrix zero, Matrix one);
  void set_center(int site) { center_ = site; }

  void set_product(std::span<const Eigen::Vector2cd> factors);

  // Move the orthogonality center by QR sweeps.
  void move_center(int site);

  // Applies m to sites (left, left + 1), truncating the new bond to chi by
  // discarding the smallest singular values. The kept weight is not
  // renormalized. Returns the discarded weight sum_j s_j^2.
  double apply_two_site(const Matrix4& m, int left);
  double apply_pair(const Matrix4& m, QubitPair pair);

  Eigen::VectorXcd to_dense() const;
  double norm() const;

  // Max deviation from left (right) orthonormality left (right) of the center.
  double canonical_error() const;

 private:
  int chi_;
  int center_ = 0;
  std::vector<std::array<Matrix, 2>> sites_;
};

cplx overlap(const MpsState& bra, const MpsState& ket);

MpsState product_mps(int n);

// 3-site GHZ: A = delta, B = 2^(-1/2) delta, C = delta; bonds (1, 2, 2, 1).
MpsState ghz_mps();

TrajectoryRow run_mps_trajectory(const EchoModel& model, int d_max, int chi, TrajectorySeeds seeds);

struct MpsCampaignOptions {
  int d_max = 0;
  int chi = kUnboundedBond;
  std::uint64_t n_traj = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::uint64_t first_trajectory = 0;
};

// Requires a chain layout.
FidelityRecord run_mps_campaign(const NoiseModel& model, const MpsCampaignOptions& options);

}  // namespace qecho
