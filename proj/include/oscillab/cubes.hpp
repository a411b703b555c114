#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oscillab/cube.hpp"
#include "oscillab/field.hpp"

namespace oscillab {

// Union of grid cells with O(1) counting over any cube (periodic summed-area table).
class CellSet {
 public:
  CellSet() = default;
  CellSet(int dimension, int resolution, std::vector<std::uint8_t> mask);

  static CellSet empty(int dimension, int resolution);
  static CellSet of_cube(const Cube& q);
  static CellSet of_cubes(int dimension, int resolution, const std::vector<Cube>& cubes);
  // Cells where predicate(value) holds.
  template <typename Pred>
  static CellSet where(const RealField& f, Pred&& pred) {
    std::vector<std::uint8_t> mask(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) mask[i] = pred(f[i]) ? 1 : 0;
    return CellSet(f.dimension(), f.resolution(), std::move(mask));
  }

  int dimension() const { return dim_; }
  int resolution() const { return m_; }
  std::size_t total_cells() const { return mask_.size(); }
  bool contains(std::size_t index) const { return mask_[index] != 0; }
  std::size_t count() const { return count_; }
  bool is_empty() const { return count_ == 0; }
  bool is_full() const { return count_ == mask_.size(); }
  double measure() const;
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  std::size_t count_in(const Cube& q) const;
  bool contains_cube(const Cube& q) const { return count_in(q) == q.cell_count(); }
  bool meets_complement(const Cube& q) const { return count_in(q) < q.cell_count(); }
  bool subset_of(const Cube& q) const;

 private:
  long long prefix(int x, int y) const;  // count over [0,x) x [0,y)
  long long rect(int x0, int x1, int y0, int y1) const;

  int dim_ = 1;
  int m_ = 1;
  std::vector<std::uint8_t> mask_;
  std::vector<long long> table_;
  std::size_t count_ = 0;
};

// Dyadic descendants of a root cube, level g holding 2^{gn} cubes.
class DyadicGrid {
 public:
  DyadicGrid(Cube root, int depth);

  const Cube& root() const { return root_; }
  int depth() const { return depth_; }
  const std::vector<Cube>& level(int g) const { return levels_.at(static_cast<std::size_t>(g)); }
  // Generation of a cube in this grid, or -1 if it is not one of its cubes.
  int generation_of(const Cube& q) const;

 private:
  Cube root_;
  int depth_;
  std::vector<std::vector<Cube>> levels_;
};

DyadicGrid dyadic_adapted_grid(const Cube& q, int depth);
// Grid rooted at the full torus anchored at Q's anchor, down to single cells;
// Q is one of its cubes whenever its side is a power of two.
DyadicGrid torus_grid_adapted_to(const Cube& q);

struct WhitneyCube {
  Cube cube;
  // Finest-level cube kept so that the family still covers Omega although
  // 4Q is not inside Omega (the grid cannot refine further).
  bool at_floor = false;
};

std::vector<WhitneyCube> whitney_decompose(const CellSet& omega, const DyadicGrid& grid);

struct WhitneyCheck {
  bool disjoint = true;
  bool covers = true;
  bool four_inside = true;    // 4Q_i inside Omega, for cubes above the floor
  bool ten_meets_complement = true;
  std::size_t cubes = 0;
  std::size_t floor_cubes = 0;
  bool all() const { return disjoint && covers && four_inside && ten_meets_complement; }
};

WhitneyCheck check_whitney(const CellSet& omega, const std::vector<WhitneyCube>& cubes);

enum class FamilyStrategy { dyadic_packing, stopping_time };

FamilyStrategy parse_family_strategy(const std::string& name);
std::string to_string(FamilyStrategy s);

using CubeFamily = std::vector<Cube>;

// Family #1 is {Q}, family #2 the generation-1 tiling; the rest are seeded
// random packings (or stopping-time families of `field`) of disjoint dyadic subcubes.
std::vector<CubeFamily> sample_disjoint_families(const Cube& q, int count, std::uint64_t seed,
                                                 FamilyStrategy strategy, const RealField* field = nullptr);

bool pairwise_disjoint(const CubeFamily& family);

}  // namespace oscillab
