#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "oscillab/cube.hpp"
#include "oscillab/field.hpp"
#include "oscillab/weight.hpp"

namespace oscillab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// |f| on the cells of a cube together with the measure of each cell
// (1 for Lebesgue measure, w(cell) up to the common cell volume otherwise).
struct MeasuredSamples {
  std::vector<double> modulus;
  std::vector<double> mass;
};

template <typename S>
MeasuredSamples gather(const BasicField<S>& f, const Cube& q, const Weight* w = nullptr) {
  if (!f.same_grid(q.dimension(), q.resolution())) throw ParameterError("cube resolution mismatch");
  if (w && !w->density().same_grid(f.dimension(), f.resolution())) throw ParameterError("weight resolution mismatch");
  MeasuredSamples out;
  out.modulus.reserve(q.cell_count());
  out.mass.reserve(q.cell_count());
  q.for_each_cell([&](std::size_t i) {
    out.modulus.push_back(magnitude(f[i]));
    out.mass.push_back(w ? w->density()[i] : 1.0);
  });
  return out;
}

// (sum mass*|f|^p / sum mass)^(1/p); p = infinity gives the max.
double lp_average(const MeasuredSamples& s, double p);
// sup_t t * (mu{|f| >= t} / mu(Q))^(1/q), attained at sample values.
double weak_lq_norm(const MeasuredSamples& s, double q);
// inf{lambda : avg(exp(|f|/lambda) - 1) <= 1} by bisection.
double exp_luxemburg_norm(const MeasuredSamples& s);
// avg(exp(|f|/lambda) - 1), the Luxemburg gauge.
double luxemburg_gauge(const MeasuredSamples& s, double lambda);

template <typename S>
double lp_average(const BasicField<S>& f, const Cube& q, double p, const Weight* w = nullptr) {
  return lp_average(gather(f, q, w), p);
}

template <typename S>
double weak_lq_norm(const BasicField<S>& f, const Cube& q, double exponent, const Weight* w = nullptr) {
  return weak_lq_norm(gather(f, q, w), exponent);
}

template <typename S>
double exp_luxemburg_norm(const BasicField<S>& f, const Cube& q, const Weight* w = nullptr) {
  return exp_luxemburg_norm(gather(f, q, w));
}

struct KolmogorovPair {
  double lhs;
  double rhs;
};

// (||f||_{L^r,Q}, (q/(q-r))^(1/r) ||f||_{L^{q,inf},Q}).
KolmogorovPair kolmogorov_check(const MeasuredSamples& s, double r, double q);

template <typename S>
KolmogorovPair kolmogorov_check(const BasicField<S>& f, const Cube& q, double r, double exponent,
                                const Weight* w = nullptr) {
  return kolmogorov_check(gather(f, q, w), r, exponent);
}

enum class NormKind { lp, weak_lq, exp_l };

struct NormReport {
  double value = 0;
  Cube cube;
  NormKind kind = NormKind::lp;
  double exponent = 1;  // p for Lp, q for WeakLq, unused for ExpL
  bool weighted = false;
};

template <typename S>
NormReport norm_report(const BasicField<S>& f, const Cube& q, NormKind kind, double exponent, const Weight* w = nullptr) {
  NormReport r;
  r.cube = q;
  r.kind = kind;
  r.exponent = exponent;
  r.weighted = w != nullptr;
  MeasuredSamples s = gather(f, q, w);
  switch (kind) {
    case NormKind::lp: r.value = lp_average(s, exponent); break;
    case NormKind::weak_lq: r.value = weak_lq_norm(s, exponent); break;
    case NormKind::exp_l: r.value = exp_luxemburg_norm(s); break;
  }
  return r;
}

std::string to_string(NormKind kind);

// Periodic box sums of a over all lattice anchors for cubes of `side` cells
// (side a power of two), computed by exact doubling S_2s(x) = S_s(x) + S_s(x+s).
Eigen::ArrayXd box_sums(int dimension, int resolution, const Eigen::ArrayXd& a, int side);
// One doubling step: box sums for side 2s from box sums for side s.
Eigen::ArrayXd double_box_sums(int dimension, int resolution, const Eigen::ArrayXd& sums, int side);
// For every cell x, max of v(anchor) over the anchors of side-cubes containing x.
Eigen::ArrayXd window_max(int dimension, int resolution, const Eigen::ArrayXd& v, int side);

// M_p f over the restricted family: sidelengths h, 2h, ..., 1 and every lattice anchor.
template <typename S>
RealField maximal_function(const BasicField<S>& f, double p);

extern template RealField maximal_function<double>(const RealField&, double);
extern template RealField maximal_function<Complex>(const ComplexField&, double);

}  // namespace oscillab
