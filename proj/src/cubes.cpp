#include "oscillab/cubes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "oscillab/norms.hpp"

namespace oscillab {

CellSet::CellSet(int dimension, int resolution, std::vector<std::uint8_t> mask)
    : dim_(dimension), m_(resolution), mask_(std::move(mask)) {
  if (dimension != 1 && dimension != 2) throw ParameterError("cell set dimension must be 1 or 2");
  const std::size_t n = dimension == 1 ? resolution : static_cast<std::size_t>(resolution) * resolution;
  if (mask_.size() != n) throw ParameterError("cell set mask size mismatch");
  const int rows = dimension == 1 ? 1 : resolution;
  table_.assign(static_cast<std::size_t>(resolution + 1) * (rows + 1), 0);
  const int w = resolution + 1;
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < resolution; ++x)
      table_[(x + 1) + w * (y + 1)] = table_[x + w * (y + 1)] + table_[(x + 1) + w * y] - table_[x + w * y] +
                                      mask_[x + static_cast<std::size_t>(resolution) * y];
  count_ = static_cast<std::size_t>(table_.back());
}

CellSet CellSet::empty(int dimension, int resolution) {
  const std::size_t n = dimension == 1 ? resolution : static_cast<std::size_t>(resolution) * resolution;
  return CellSet(dimension, resolution, std::vector<std::uint8_t>(n, 0));
}

CellSet CellSet::of_cube(const Cube& q) { return of_cubes(q.dimension(), q.resolution(), {q}); }

CellSet CellSet::of_cubes(int dimension, int resolution, const std::vector<Cube>& cubes) {
  const std::size_t n = dimension == 1 ? resolution : static_cast<std::size_t>(resolution) * resolution;
  std::vector<std::uint8_t> mask(n, 0);
  for (const Cube& q : cubes) q.for_each_cell([&](std::size_t i) { mask[i] = 1; });
  return CellSet(dimension, resolution, std::move(mask));
}

double CellSet::measure() const {
  const double cell = dim_ == 1 ? 1.0 / m_ : 1.0 / (static_cast<double>(m_) * m_);
  return static_cast<double>(count_) * cell;
}

long long CellSet::prefix(int x, int y) const { return table_[x + (m_ + 1) * y]; }

long long CellSet::rect(int x0, int x1, int y0, int y1) const {
  return prefix(x1, y1) - prefix(x0, y1) - prefix(x1, y0) + prefix(x0, y0);
}

std::size_t CellSet::count_in(const Cube& q) const {
  if (q.dimension() != dim_ || q.resolution() != m_) throw ParameterError("cube resolution mismatch");
  // Split each periodic interval into at most two plain intervals.
  auto pieces = [&](int a, int s) {
    std::vector<std::pair<int, int>> out;
    if (a + s <= m_) {
      out.emplace_back(a, a + s);
    } else {
      out.emplace_back(a, m_);
      out.emplace_back(0, a + s - m_);
    }
    return out;
  };
  long long total = 0;
  const auto xs = pieces(q.anchor_cell(0), q.side_cells());
  if (dim_ == 1) {
    for (auto [x0, x1] : xs) total += rect(x0, x1, 0, 1);
  } else {
    const auto ys = pieces(q.anchor_cell(1), q.side_cells());
    for (auto [x0, x1] : xs)
      for (auto [y0, y1] : ys) total += rect(x0, x1, y0, y1);
  }
  return static_cast<std::size_t>(total);
}

bool CellSet::subset_of(const Cube& q) const { return count_in(q) == count_; }

DyadicGrid::DyadicGrid(Cube root, int depth) : root_(root), depth_(depth) {
  if (depth < 0) throw ParameterError("dyadic grid depth must be nonnegative");
  if (root.side_cells() % (1 << std::min(depth, 30)) != 0 || (depth > 0 && root.side_cells() < (1 << depth)))
    throw ParameterError("dyadic grid depth " + std::to_string(depth) + " is too deep for resolution " +
                         std::to_string(root.resolution()));
  levels_.push_back({root});
  for (int g = 1; g <= depth; ++g) {
    std::vector<Cube> next;
    next.reserve(levels_.back().size() << root.dimension());
    for (const Cube& c : levels_.back())
      for (const Cube& ch : c.children()) next.push_back(ch);
    levels_.push_back(std::move(next));
  }
}

int DyadicGrid::generation_of(const Cube& q) const {
  for (int g = 0; g <= depth_; ++g) {
    const Cube& first = levels_[g].front();
    if (first.side_cells() != q.side_cells()) continue;
    if (!root_.contains(q)) return -1;
    const int m = root_.resolution();
    for (int d = 0; d < q.dimension(); ++d) {
      int off = ((q.anchor_cell(d) - root_.anchor_cell(d)) % m + m) % m;
      if (off % q.side_cells() != 0) return -1;
    }
    return g;
  }
  return -1;
}

DyadicGrid dyadic_adapted_grid(const Cube& q, int depth) { return DyadicGrid(q, depth); }

DyadicGrid torus_grid_adapted_to(const Cube& q) {
  Cube root(q.dimension(), q.resolution(), q.anchor_cells(), q.resolution());
  return DyadicGrid(root, log2_exact(q.resolution()));
}

std::vector<WhitneyCube> whitney_decompose(const CellSet& omega, const DyadicGrid& grid) {
  if (omega.is_full()) throw DomainError("Whitney decomposition is undefined when Omega is the whole torus");
  std::vector<WhitneyCube> out;
  if (omega.is_empty()) return out;
  const int depth = grid.depth();
  std::function<void(const Cube&, int)> visit = [&](const Cube& c, int g) {
    const std::size_t inside = omega.count_in(c);
    if (inside == 0) return;
    if (!c.is_full() && omega.contains_cube(dilated(c, 4))) {
      out.push_back({c, false});
      return;
    }
    if (g == depth || !c.has_children()) {
      // Cannot refine: keep the cells of Omega as floor cubes.
      if (inside == c.cell_count()) {
        out.push_back({c, true});
      } else {
        c.for_each_cell([&](std::size_t i) {
          if (!omega.contains(i)) return;
          const int m = c.resolution();
          std::array<int, 2> a{static_cast<int>(i % m), static_cast<int>(i / m)};
          out.push_back({Cube(c.dimension(), m, a, 1), true});
        });
      }
      return;
    }
    for (const Cube& ch : c.children()) visit(ch, g + 1);
  };
  visit(grid.root(), 0);
  return out;
}

WhitneyCheck check_whitney(const CellSet& omega, const std::vector<WhitneyCube>& cubes) {
  WhitneyCheck r;
  r.cubes = cubes.size();
  std::vector<std::uint8_t> hits(omega.total_cells(), 0);
  for (const WhitneyCube& w : cubes) {
    if (w.at_floor) ++r.floor_cubes;
    w.cube.for_each_cell([&](std::size_t i) {
      if (hits[i]) r.disjoint = false;
      hits[i] = 1;
    });
    if (!w.at_floor && !omega.contains_cube(dilated(w.cube, 4))) r.four_inside = false;
    if (!omega.meets_complement(dilated(w.cube, 10))) r.ten_meets_complement = false;
  }
  for (std::size_t i = 0; i < hits.size(); ++i)
    if (static_cast<bool>(hits[i]) != omega.contains(i)) r.covers = false;
  return r;
}

FamilyStrategy parse_family_strategy(const std::string& name) {
  if (name == "dyadic-packing") return FamilyStrategy::dyadic_packing;
  if (name == "stopping-time") return FamilyStrategy::stopping_time;
  throw ParameterError("unknown family strategy '" + name + "'");
}

std::string to_string(FamilyStrategy s) {
  return s == FamilyStrategy::dyadic_packing ? "dyadic-packing" : "stopping-time";
}

namespace {

void random_packing(const Cube& c, bool is_root, CounterRng& rng, CubeFamily& out) {
  const double u = rng.uniform();
  if (!is_root && u < 0.3) {
    out.push_back(c);
    return;
  }
  if (!is_root && u < 0.45) return;
  if (!c.has_children()) {
    if (rng.uniform() < 0.5) out.push_back(c);
    return;
  }
  for (const Cube& ch : c.children()) random_packing(ch, false, rng, out);
}

void stopping_time(const Cube& c, bool is_root, const RealField& field, double threshold, CubeFamily& out) {
  if (!is_root && lp_average(field, c, 1.0) > threshold) {
    out.push_back(c);
    return;
  }
  if (!c.has_children()) return;
  for (const Cube& ch : c.children()) stopping_time(ch, false, field, threshold, out);
}

}  // namespace

std::vector<CubeFamily> sample_disjoint_families(const Cube& q, int count, std::uint64_t seed,
                                                 FamilyStrategy strategy, const RealField* field) {
  if (count < 1) throw ParameterError("sample_disjoint_families: count must be >= 1");
  if (strategy == FamilyStrategy::stopping_time && field == nullptr)
    throw ParameterError("stopping-time families need a field");
  std::vector<CubeFamily> families;
  families.push_back({q});
  if (static_cast<int>(families.size()) < count && q.has_children()) families.push_back(q.children());
  std::uint64_t stream = 0;
  while (static_cast<int>(families.size()) < count) {
    CounterRng rng(seed, stream++);
    CubeFamily fam;
    if (strategy == FamilyStrategy::dyadic_packing || !q.has_children()) {
      random_packing(q, true, rng, fam);
    } else {
      const double mean = lp_average(*field, q, 1.0);
      const double top = lp_average(*field, q, kInfinity);
      const double threshold = mean + (top - mean) * rng.uniform(0.02, 0.9);
      stopping_time(q, true, *field, threshold, fam);
    }
    if (fam.empty()) fam.push_back(q.has_children() ? q.child(0) : q);
    families.push_back(std::move(fam));
    if (stream > static_cast<std::uint64_t>(count) * 64 + 64) break;
  }
  return families;
}

bool pairwise_disjoint(const CubeFamily& family) {
  if (family.empty()) return true;
  const Cube& first = family.front();
  const std::size_t n = first.dimension() == 1 ? first.resolution()
                                               : static_cast<std::size_t>(first.resolution()) * first.resolution();
  std::vector<std::uint8_t> hits(n, 0);
  bool ok = true;
  for (const Cube& c : family)
    c.for_each_cell([&](std::size_t i) {
      if (hits[i]) ok = false;
      hits[i] = 1;
    });
  return ok;
}

}  // namespace oscillab
