#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "oscillab/common.hpp"

namespace oscillab {

// Half-open axis-aligned cube on the torus [0,1)^n, stored on the cell lattice
// of a grid with m cells per axis: cells anchor[d], ..., anchor[d] + side - 1
// (mod m) along each axis d < n.
class Cube {
 public:
  Cube() = default;
  Cube(int dimension, int resolution, std::array<int, 2> anchor, int side);

  static Cube full(int dimension, int resolution);
  // Real coordinates; anchor and sidelength must lie on the cell lattice.
  static Cube from_coordinates(int dimension, int resolution, std::array<double, 2> anchor, double sidelength);

  int dimension() const { return dim_; }
  int resolution() const { return m_; }
  int side_cells() const { return side_; }
  int anchor_cell(int axis) const { return anchor_[axis]; }
  const std::array<int, 2>& anchor_cells() const { return anchor_; }

  double sidelength() const { return static_cast<double>(side_) / m_; }
  double anchor(int axis) const { return static_cast<double>(anchor_[axis]) / m_; }
  double measure() const;
  std::size_t cell_count() const;
  bool is_full() const { return side_ == m_; }
  // True when the cell range crosses the torus seam along some axis.
  bool wraps() const;

  bool contains_cell(std::size_t index) const;
  bool contains(const Cube& other) const;
  bool intersects(const Cube& other) const;

  // Cell indices (index = i0 + m*i1), axis 0 fastest, starting at the anchor.
  std::vector<std::size_t> cells() const;
  template <typename Fn>
  void for_each_cell(Fn&& fn) const {
    if (dim_ == 1) {
      for (int i = 0; i < side_; ++i) fn(static_cast<std::size_t>((anchor_[0] + i) % m_));
      return;
    }
    for (int j = 0; j < side_; ++j) {
      const std::size_t row = static_cast<std::size_t>((anchor_[1] + j) % m_) * m_;
      for (int i = 0; i < side_; ++i) fn(row + static_cast<std::size_t>((anchor_[0] + i) % m_));
    }
  }

  // Dyadic children, child bit d selects the upper half along axis d.
  bool has_children() const { return side_ >= 2 && side_ % 2 == 0; }
  Cube child(int which) const;
  std::vector<Cube> children() const;

  // Same cube translated by whole cells (mod m).
  Cube translated(std::array<int, 2> shift) const;

  bool operator==(const Cube& o) const;
  bool operator!=(const Cube& o) const { return !(*this == o); }
  // Deterministic total order: side, then anchor components.
  bool operator<(const Cube& o) const;

  std::string describe() const;

 private:
  int dim_ = 1;
  int m_ = 1;
  std::array<int, 2> anchor_{0, 0};
  int side_ = 1;
};

struct Dilation {
  Cube cube;
  bool saturated = false;  // lambda * l(Q) exceeded the torus and was clipped
  bool wrapped = false;    // the dilated cube crosses the torus seam
};

// Concentric dilation, rounded outward to the cell lattice so that it always
// contains the exact concentric cube. Sidelengths >= 1 become the full torus.
Dilation dilate(const Cube& q, double lambda);
inline Cube dilated(const Cube& q, double lambda) { return dilate(q, lambda).cube; }

// Smallest k with 2^k Q equal to the full torus.
int saturation_index(const Cube& q);

}  // namespace oscillab
