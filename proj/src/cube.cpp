#include "oscillab/cube.hpp"

#include <cmath>
#include <sstream>

namespace oscillab {

namespace {

int wrap(int i, int m) {
  int r = i % m;
  return r < 0 ? r + m : r;
}

// Offset of `cell` from `start` along the torus, in [0, m).
int offset(int start, int cell, int m) { return wrap(cell - start, m); }

}  // namespace

Cube::Cube(int dimension, int resolution, std::array<int, 2> anchor, int side)
    : dim_(dimension), m_(resolution), side_(side) {
  if (dimension != 1 && dimension != 2) throw ParameterError("cube dimension must be 1 or 2");
  if (!is_power_of_two(resolution)) throw ParameterError("cube resolution must be a power of two");
  if (side < 1 || side > resolution) throw ParameterError("cube side must be between 1 and m cells");
  anchor_[0] = wrap(anchor[0], resolution);
  anchor_[1] = dimension == 2 ? wrap(anchor[1], resolution) : 0;
}

Cube Cube::full(int dimension, int resolution) { return Cube(dimension, resolution, {0, 0}, resolution); }

Cube Cube::from_coordinates(int dimension, int resolution, std::array<double, 2> anchor, double sidelength) {
  auto to_cells = [&](double x, const char* what) {
    double c = x * resolution;
    long long r = std::llround(c);
    if (std::abs(c - static_cast<double>(r)) > 1e-9)
      throw ParameterError(std::string("cube ") + what + " is not on the cell lattice of resolution " +
                           std::to_string(resolution));
    return static_cast<int>(r);
  };
  int side = to_cells(sidelength, "sidelength");
  std::array<int, 2> a{to_cells(anchor[0], "anchor"), dimension == 2 ? to_cells(anchor[1], "anchor") : 0};
  return Cube(dimension, resolution, a, side);
}

double Cube::measure() const {
  double l = sidelength();
  return dim_ == 1 ? l : l * l;
}

std::size_t Cube::cell_count() const {
  std::size_t s = static_cast<std::size_t>(side_);
  return dim_ == 1 ? s : s * s;
}

bool Cube::wraps() const {
  if (side_ == m_) return false;
  for (int d = 0; d < dim_; ++d)
    if (anchor_[d] + side_ > m_) return true;
  return false;
}

bool Cube::contains_cell(std::size_t index) const {
  int i0 = static_cast<int>(index % m_);
  if (offset(anchor_[0], i0, m_) >= side_) return false;
  if (dim_ == 2) {
    int i1 = static_cast<int>(index / m_);
    if (offset(anchor_[1], i1, m_) >= side_) return false;
  }
  return true;
}

bool Cube::contains(const Cube& o) const {
  if (o.dim_ != dim_ || o.m_ != m_) throw ParameterError("cube resolution mismatch");
  if (side_ == m_) return true;
  if (o.side_ > side_) return false;
  for (int d = 0; d < dim_; ++d)
    if (offset(anchor_[d], o.anchor_[d], m_) + o.side_ > side_) return false;
  return true;
}

bool Cube::intersects(const Cube& o) const {
  if (o.dim_ != dim_ || o.m_ != m_) throw ParameterError("cube resolution mismatch");
  for (int d = 0; d < dim_; ++d) {
    // Intervals on the circle intersect iff one start lies inside the other.
    bool hit = offset(anchor_[d], o.anchor_[d], m_) < side_ || offset(o.anchor_[d], anchor_[d], m_) < o.side_;
    if (!hit) return false;
  }
  return true;
}

std::vector<std::size_t> Cube::cells() const {
  std::vector<std::size_t> out;
  out.reserve(cell_count());
  for_each_cell([&](std::size_t i) { out.push_back(i); });
  return out;
}

Cube Cube::child(int which) const {
  if (!has_children()) throw ParameterError("cube has no dyadic children at this resolution");
  int h = side_ / 2;
  std::array<int, 2> a = anchor_;
  for (int d = 0; d < dim_; ++d)
    if (which & (1 << d)) a[d] += h;
  return Cube(dim_, m_, a, h);
}

std::vector<Cube> Cube::children() const {
  std::vector<Cube> out;
  for (int c = 0; c < (1 << dim_); ++c) out.push_back(child(c));
  return out;
}

Cube Cube::translated(std::array<int, 2> shift) const {
  return Cube(dim_, m_, {anchor_[0] + shift[0], anchor_[1] + (dim_ == 2 ? shift[1] : 0)}, side_);
}

bool Cube::operator==(const Cube& o) const {
  if (dim_ != o.dim_ || m_ != o.m_ || side_ != o.side_) return false;
  if (side_ == m_) return true;
  return anchor_ == o.anchor_;
}

bool Cube::operator<(const Cube& o) const {
  if (side_ != o.side_) return side_ < o.side_;
  if (anchor_[1] != o.anchor_[1]) return anchor_[1] < o.anchor_[1];
  return anchor_[0] < o.anchor_[0];
}

std::string Cube::describe() const {
  std::ostringstream os;
  os << "[anchor=(" << anchor(0);
  if (dim_ == 2) os << ", " << anchor(1);
  os << "), side=" << sidelength() << "]";
  return os.str();
}

Dilation dilate(const Cube& q, double lambda) {
  if (!(lambda >= 1.0)) throw ParameterError("dilation factor must be >= 1");
  const int m = q.resolution();
  const int s = q.side_cells();
  const double target = lambda * s;
  Dilation out;
  if (target >= m - 1e-9) {
    out.cube = Cube::full(q.dimension(), m);
    out.saturated = target > m + 1e-9;
    return out;
  }
  // Exact concentric interval [a + s/2 - target/2, a + s/2 + target/2), hull on the lattice.
  const double grow = (target - s) / 2.0;
  const int lo = static_cast<int>(std::floor(-grow + 1e-9));
  const int hi = static_cast<int>(std::ceil(s + grow - 1e-9));
  const int side = hi - lo;
  std::array<int, 2> a = q.anchor_cells();
  for (int d = 0; d < q.dimension(); ++d) a[d] += lo;
  if (side >= m) {
    out.cube = Cube::full(q.dimension(), m);
    return out;
  }
  out.cube = Cube(q.dimension(), m, a, side);
  out.wrapped = out.cube.wraps();
  return out;
}

int saturation_index(const Cube& q) {
  int k = 0;
  while (!dilated(q, std::ldexp(1.0, k)).is_full()) ++k;
  return k;
}

}  // namespace oscillab
