#pragma once

#include <span>
#include <string>
#include <vector>

namespace qecho {

struct QubitPair {
  int a = 0;
  int b = 0;
  friend bool operator==(const QubitPair&, const QubitPair&) = default;
};

enum class Lattice { chain, grid, custom };

// Qubit set plus the periodic schedule of 2-qubit gate positions.
//
// A "position" is one lattice bond; every position appears in exactly one
// layer of the period, so position indices run over [0, n_g). Layer t of
// the circuit (t >= 1) uses layers()[(t - 1) % period()].
class QubitLayout {
 public:
  // Validates the schedule: distinct in-range qubits per pair, no qubit
  // twice in a layer, no bond repeated within the period.
  QubitLayout(Lattice lattice, int num_qubits, int dimension, int rows, int cols,
              std::vector<std::vector<QubitPair>> layers);

  Lattice lattice() const { return lattice_; }
  int num_qubits() const { return n_; }
  int dimension() const { return dimension_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int period() const { return static_cast<int>(layers_.size()); }
  int gates_per_period() const { return static_cast<int>(positions_.size()); }

  const std::vector<std::vector<QubitPair>>& layers() const { return layers_; }
  const std::vector<QubitPair>& positions() const { return positions_; }

  // Position indices of the gates in circuit layer t >= 1.
  std::span<const int> layer_positions(int t) const;

  std::string describe() const;

 private:
  Lattice lattice_;
  int n_;
  int dimension_;
  int rows_;
  int cols_;
  std::vector<std::vector<QubitPair>> layers_;
  std::vector<QubitPair> positions_;
  std::vector<std::vector<int>> layer_positions_;
};

// Period-2 brickwork on an open chain: even bonds, then odd bonds.
QubitLayout build_chain(int n);

// Period-4 staggered brickwork on an open rows x cols grid (qubit r*cols + c):
// horizontal even-column bonds, horizontal odd-column bonds, vertical
// even-row bonds, vertical odd-row bonds.
QubitLayout build_grid(int rows, int cols);

// round(10 * n^(1/D)).
int recommended_max_depth(int n, int dimension);

}  // namespace qecho
