#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "oscillab/common.hpp"

namespace oscillab {

// Cell-centred samples on the periodic grid with m cells per axis over [0,1)^n.
// Index of cell (i0, i1) is i0 + m * i1. Immutable after construction.
template <typename Scalar>
class BasicField {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicField() = default;

  BasicField(int dimension, int resolution, Vector values)
      : dim_(dimension), m_(resolution), values_(std::move(values)) {
    if (dimension != 1 && dimension != 2) throw ParameterError("field dimension must be 1 or 2");
    if (!is_power_of_two(resolution)) throw ParameterError("field resolution must be a power of two");
    if (values_.size() != static_cast<Eigen::Index>(expected_size()))
      throw DataError("field has " + std::to_string(values_.size()) + " samples, expected " +
                      std::to_string(expected_size()));
    for (Eigen::Index i = 0; i < values_.size(); ++i)
      if (!finite(values_[i])) throw DataError("field sample " + std::to_string(i) + " is not finite");
  }

  static BasicField constant(int dimension, int resolution, Scalar c) {
    std::size_t n = dimension == 1 ? resolution : static_cast<std::size_t>(resolution) * resolution;
    return BasicField(dimension, resolution, Vector::Constant(static_cast<Eigen::Index>(n), c));
  }

  // Samples fn at cell centres; fn receives {x0, x1} (x1 = 0 in 1-D).
  template <typename Fn>
  static BasicField sample(int dimension, int resolution, Fn&& fn) {
    std::size_t n = dimension == 1 ? resolution : static_cast<std::size_t>(resolution) * resolution;
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(fn(center(dimension, resolution, i)));
    return BasicField(dimension, resolution, std::move(v));
  }

  static std::array<double, 2> center(int dimension, int resolution, std::size_t index) {
    double h = 1.0 / resolution;
    std::array<double, 2> x{(static_cast<double>(index % resolution) + 0.5) * h, 0.0};
    if (dimension == 2) x[1] = (static_cast<double>(index / resolution) + 0.5) * h;
    return x;
  }

  int dimension() const { return dim_; }
  int resolution() const { return m_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double cell_width() const { return 1.0 / m_; }
  double cell_volume() const { return dim_ == 1 ? 1.0 / m_ : 1.0 / (static_cast<double>(m_) * m_); }
  std::array<double, 2> center(std::size_t index) const { return center(dim_, m_, index); }

  const Vector& values() const { return values_; }
  Scalar operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  // Integral over the torus: cell sum times cell volume, summed pairwise.
  Scalar integral() const {
    if constexpr (std::is_same_v<Scalar, double>) {
      return pairwise_sum(std::span<const double>(values_.data(), size())) * cell_volume();
    } else {
      std::vector<double> re(size()), im(size());
      for (std::size_t i = 0; i < size(); ++i) {
        re[i] = std::real(values_[i]);
        im[i] = std::imag(values_[i]);
      }
      return Scalar(pairwise_sum(re), pairwise_sum(im)) * cell_volume();
    }
  }

  Eigen::ArrayXd modulus() const {
    Eigen::ArrayXd out(values_.size());
    for (Eigen::Index i = 0; i < values_.size(); ++i) out[i] = magnitude(values_[i]);
    return out;
  }

  template <typename To>
  BasicField<To> cast() const {
    return BasicField<To>(dim_, m_, values_.template cast<To>());
  }

  bool same_grid(int dimension, int resolution) const { return dim_ == dimension && m_ == resolution; }

 private:
  std::size_t expected_size() const {
    return dim_ == 1 ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(m_) * m_;
  }
  static bool finite(double x) { return std::isfinite(x); }
  static bool finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

  int dim_ = 1;
  int m_ = 1;
  Vector values_;
};

using RealField = BasicField<double>;
using ComplexField = BasicField<Complex>;

template <typename S>
BasicField<S> operator+(const BasicField<S>& a, const BasicField<S>& b) {
  return BasicField<S>(a.dimension(), a.resolution(), a.values() + b.values());
}

template <typename S>
BasicField<S> operator-(const BasicField<S>& a, const BasicField<S>& b) {
  return BasicField<S>(a.dimension(), a.resolution(), a.values() - b.values());
}

template <typename S, typename C>
BasicField<S> operator*(C c, const BasicField<S>& a) {
  return BasicField<S>(a.dimension(), a.resolution(), a.values() * static_cast<S>(c));
}

inline ComplexField to_complex(const RealField& f) { return f.cast<Complex>(); }
inline ComplexField to_complex(const ComplexField& f) { return f; }

}  // namespace oscillab
