#include "oscillab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oscillab {

namespace {

void require_nonempty(const MeasuredSamples& s) {
  if (s.modulus.empty()) throw ParameterError("empty cube");
}

}  // namespace

double lp_average(const MeasuredSamples& s, double p) {
  require_nonempty(s);
  if (!(p > 0)) throw ParameterError("lp_average: exponent must be positive");
  const double top = *std::max_element(s.modulus.begin(), s.modulus.end());
  if (std::isinf(p) || top == 0) return top;
  const std::size_t n = s.modulus.size();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = s.mass[i] * std::pow(s.modulus[i] / top, p);
  const double num = pairwise_sum(terms);
  const double den = pairwise_sum(s.mass);
  return top * std::pow(num / den, 1.0 / p);
}

double weak_lq_norm(const MeasuredSamples& s, double q) {
  require_nonempty(s);
  if (!(q > 0) || std::isinf(q)) throw ParameterError("weak_lq_norm: exponent must be in (0, inf)");
  const std::size_t n = s.modulus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.modulus[a] > s.modulus[b]; });
  const double total = pairwise_sum(s.mass);
  double best = 0;
  double cumulative = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = s.modulus[order[k]];
    cumulative += s.mass[order[k]];
    // Evaluate only at the last sample of a tie group: mu{|f| >= v} is complete there.
    if (k + 1 < n && s.modulus[order[k + 1]] == v) continue;
    if (v == 0) break;
    const double fraction = std::min(cumulative / total, 1.0);
    best = std::max(best, v * std::pow(fraction, 1.0 / q));
  }
  return best;
}

double luxemburg_gauge(const MeasuredSamples& s, double lambda) {
  const std::size_t n = s.modulus.size();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = s.mass[i] * std::expm1(s.modulus[i] / lambda);
  return pairwise_sum(terms) / pairwise_sum(s.mass);
}

double exp_luxemburg_norm(const MeasuredSamples& s) {
  require_nonempty(s);
  const double top = *std::max_element(s.modulus.begin(), s.modulus.end());
  if (top == 0) return 0;
  double lo = top / 64;
  double hi = 64 * top;
  for (int i = 0; luxemburg_gauge(s, lo) <= 1; ++i) {
    if (i > 64) throw NumericError("exp_luxemburg_norm: lower bracket not found");
    hi = lo;
    lo /= 64;
  }
  const double tolerance = 1e-10 * top;
  for (int i = 0; hi - lo > tolerance; ++i) {
    if (i > 400) throw NumericError("exp_luxemburg_norm: bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    if (luxemburg_gauge(s, mid) <= 1)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

KolmogorovPair kolmogorov_check(const MeasuredSamples& s, double r, double q) {
  if (!(r > 0) || !(r < q)) throw ParameterError("kolmogorov_check requires 0 < r < q");
  return {lp_average(s, r), std::pow(q / (q - r), 1.0 / r) * weak_lq_norm(s, q)};
}

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::lp: return "Lp";
    case NormKind::weak_lq: return "WeakLq";
    case NormKind::exp_l: return "ExpL";
  }
  return "?";
}

Eigen::ArrayXd double_box_sums(int dimension, int m, const Eigen::ArrayXd& sums, int side) {
  Eigen::ArrayXd out(sums.size());
  if (dimension == 1) {
    for (int x = 0; x < m; ++x) out[x] = sums[x] + sums[(x + side) % m];
    return out;
  }
  for (int y = 0; y < m; ++y) {
    const int y2 = (y + side) % m;
    for (int x = 0; x < m; ++x) {
      const int x2 = (x + side) % m;
      out[x + m * y] = (sums[x + m * y] + sums[x2 + m * y]) + (sums[x + m * y2] + sums[x2 + m * y2]);
    }
  }
  return out;
}

Eigen::ArrayXd box_sums(int dimension, int m, const Eigen::ArrayXd& a, int side) {
  if (!is_power_of_two(side) || side > m) throw ParameterError("box_sums: side must be a power of two <= m");
  Eigen::ArrayXd s = a;
  for (int w = 1; w < side; w *= 2) s = double_box_sums(dimension, m, s, w);
  return s;
}

Eigen::ArrayXd window_max(int dimension, int m, const Eigen::ArrayXd& v, int side) {
  // Sliding max over anchors x-side+1..x along each axis, by doubling windows.
  Eigen::ArrayXd cur = v;
  for (int axis = 0; axis < dimension; ++axis) {
    const int stride = axis == 0 ? 1 : m;
    for (int w = 1; w < side; w *= 2) {
      Eigen::ArrayXd next(cur.size());
      for (Eigen::Index i = 0; i < cur.size(); ++i) {
        const int coord = axis == 0 ? static_cast<int>(i % m) : static_cast<int>(i / m);
        const int shifted = ((coord - w) % m + m) % m;
        const Eigen::Index j = i + static_cast<Eigen::Index>(shifted - coord) * stride;
        next[i] = std::max(cur[i], cur[j]);
      }
      cur = std::move(next);
    }
  }
  return cur;
}

template <typename S>
RealField maximal_function(const BasicField<S>& f, double p) {
  if (!(p >= 1) || std::isinf(p)) throw ParameterError("maximal_function: p must be a finite real >= 1");
  const int n = f.dimension();
  const int m = f.resolution();
  const Eigen::ArrayXd mod = f.modulus();
  const Eigen::ArrayXd a = mod.pow(p);
  Eigen::ArrayXd sums = a;
  Eigen::ArrayXd best = a;
  for (int side = 2; side <= m; side *= 2) {
    sums = double_box_sums(n, m, sums, side / 2);
    const double volume = n == 1 ? side : static_cast<double>(side) * side;
    best = best.max(window_max(n, m, sums / volume, side));
  }
  Eigen::VectorXd out = best.pow(1.0 / p).max(mod).matrix();
  return RealField(n, m, std::move(out));
}

template RealField maximal_function<double>(const RealField&, double);
template RealField maximal_function<Complex>(const ComplexField&, double);

}  // namespace oscillab
