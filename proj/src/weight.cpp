#include "oscillab/weight.hpp"

#include "oscillab/cubes.hpp"

namespace oscillab {

Weight::Weight(RealField density) : density_(std::move(density)) {
  for (std::size_t i = 0; i < density_.size(); ++i)
    if (!(density_[i] > 0)) throw DataError("weight density must be positive (cell " + std::to_string(i) + ")");
  const int n = density_.dimension();
  const int m = density_.resolution();
  levels_.emplace_back(density_.values().data(), density_.values().data() + density_.size());
  for (int b = 2; b <= m; b *= 2) {
    const std::vector<double>& prev = levels_.back();
    const int per = m / b;
    const int prev_per = per * 2;
    std::vector<double> next(n == 1 ? per : static_cast<std::size_t>(per) * per);
    if (n == 1) {
      for (int j = 0; j < per; ++j) next[j] = prev[2 * j] + prev[2 * j + 1];
    } else {
      for (int y = 0; y < per; ++y)
        for (int x = 0; x < per; ++x) {
          auto at = [&](int xx, int yy) { return prev[xx + static_cast<std::size_t>(prev_per) * yy]; };
          next[x + static_cast<std::size_t>(per) * y] =
              (at(2 * x, 2 * y) + at(2 * x + 1, 2 * y)) + (at(2 * x, 2 * y + 1) + at(2 * x + 1, 2 * y + 1));
        }
    }
    levels_.push_back(std::move(next));
  }
}

Weight Weight::uniform(int dimension, int resolution) {
  return Weight(RealField::constant(dimension, resolution, 1.0));
}

double Weight::mass(const Cube& q) const {
  if (!density_.same_grid(q.dimension(), q.resolution())) throw ParameterError("cube resolution mismatch");
  const int s = q.side_cells();
  bool aligned = is_power_of_two(s) && !q.wraps();
  for (int d = 0; d < q.dimension() && aligned; ++d) aligned = q.anchor_cell(d) % s == 0;
  if (aligned) {
    const int g = log2_exact(s);
    const int per = q.resolution() / s;
    std::size_t idx = static_cast<std::size_t>(q.anchor_cell(0) / s);
    if (q.dimension() == 2) idx += static_cast<std::size_t>(per) * (q.anchor_cell(1) / s);
    return levels_[g][idx] * density_.cell_volume();
  }
  std::vector<double> v;
  v.reserve(q.cell_count());
  q.for_each_cell([&](std::size_t i) { v.push_back(density_[i]); });
  return pairwise_sum(v) * density_.cell_volume();
}

double Weight::mass(const CellSet& e) const {
  std::vector<double> v;
  v.reserve(e.count());
  for (std::size_t i = 0; i < e.total_cells(); ++i)
    if (e.contains(i)) v.push_back(density_[i]);
  return pairwise_sum(v) * density_.cell_volume();
}

}  // namespace oscillab
