#pragma once

#include <memory>
#include <vector>

#include "oscillab/cube.hpp"
#include "oscillab/field.hpp"

namespace oscillab {

class CellSet;

// Positive density w on the grid; w(E) is the cell sum of w times the cell volume.
class Weight {
 public:
  explicit Weight(RealField density);

  static Weight uniform(int dimension, int resolution);

  const RealField& density() const { return density_; }
  int dimension() const { return density_.dimension(); }
  int resolution() const { return density_.resolution(); }

  // w(Q). Dyadic-aligned cubes read the precomputed mass pyramid.
  double mass(const Cube& q) const;
  double mass(const CellSet& e) const;
  // w(Q) / |Q|.
  double average(const Cube& q) const { return mass(q) / q.measure(); }

 private:
  RealField density_;
  // levels_[g][j] is the cell sum over the aligned block of side 2^g with block index j.
  std::vector<std::vector<double>> levels_;
};

}  // namespace oscillab
