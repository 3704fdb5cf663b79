#include "qecho/geometry.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "qecho/common.hpp"

namespace qecho {

QubitLayout::QubitLayout(Lattice lattice, int num_qubits, int dimension, int rows, int cols,
                         std::vector<std::vector<QubitPair>> layers)
    : lattice_(lattice), n_(num_qubits), dimension_(dimension), rows_(rows), cols_(cols),
      layers_(std::move(layers)) {
  if (n_ < 2) throw InvalidArgument("layout needs at least 2 qubits");
  if (layers_.empty()) throw InvalidArgument("layout period must be at least 1");
  std::set<std::pair<int, int>> seen_bonds;
  for (const auto& layer : layers_) {
    std::vector<int> ids;
    std::set<int> used;
    for (const QubitPair& pr : layer) {
      if (pr.a < 0 || pr.b < 0 || pr.a >= n_ || pr.b >= n_ || pr.a == pr.b) {
        throw InvalidArgument("invalid qubit pair in layout");
      }
      if (!used.insert(pr.a).second || !used.insert(pr.b).second) {
        throw InvalidArgument("qubit appears twice within one layer");
      }
      if (!seen_bonds.insert(std::minmax(pr.a, pr.b)).second) {
        throw InvalidArgument("bond repeated within one period");
      }
      ids.push_back(static_cast<int>(positions_.size()));
      positions_.push_back(pr);
    }
    layer_positions_.push_back(std::move(ids));
  }
}

std::span<const int> QubitLayout::layer_positions(int t) const {
  if (t < 1) throw InvalidArgument("circuit layers are numbered from 1");
  return layer_positions_[static_cast<std::size_t>((t - 1) % period())];
}

std::string QubitLayout::describe() const {
  std::ostringstream os;
  switch (lattice_) {
    case Lattice::chain: os << "chain n=" << n_; break;
    case Lattice::grid: os << "grid " << rows_ << "x" << cols_; break;
    case Lattice::custom: os << "custom n=" << n_; break;
  }
  os << " p=" << period() << " n_g=" << gates_per_period();
  return os.str();
}

QubitLayout build_chain(int n) {
  if (n < 2) throw InvalidArgument("chain needs n >= 2");
  std::vector<std::vector<QubitPair>> layers(2);
  for (int i = 0; i + 1 < n; ++i) layers[static_cast<std::size_t>(i % 2)].push_back({i, i + 1});
  return QubitLayout(Lattice::chain, n, 1, 1, n, std::move(layers));
}

QubitLayout build_grid(int rows, int cols) {
  if (rows < 2 || cols < 2) throw InvalidArgument("grid needs rows >= 2 and cols >= 2");
  auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::vector<QubitPair>> layers(4);
  for (int parity = 0; parity < 2; ++parity) {
    for (int r = 0; r < rows; ++r) {
      for (int c = parity; c + 1 < cols; c += 2) layers[static_cast<std::size_t>(parity)].push_back({id(r, c), id(r, c + 1)});
    }
  }
  for (int parity = 0; parity < 2; ++parity) {
    for (int r = parity; r + 1 < rows; r += 2) {
      for (int c = 0; c < cols; ++c) layers[static_cast<std::size_t>(2 + parity)].push_back({id(r, c), id(r + 1, c)});
    }
  }
  return QubitLayout(Lattice::grid, rows * cols, 2, rows, cols, std::move(layers));
}

int recommended_max_depth(int n, int dimension) {
  if (n < 1) throw InvalidArgument("qubit count must be positive");
  if (dimension != 1 && dimension != 2) throw InvalidArgument("dimension must be 1 or 2");
  return static_cast<int>(std::lround(10.0 * std::pow(static_cast<double>(n), 1.0 / dimension)));
}

}  // namespace qecho
