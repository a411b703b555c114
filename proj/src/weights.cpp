#include "oscillab/weights.hpp"

#include <algorithm>
#include <cmath>

#include "oscillab/norms.hpp"

namespace oscillab {

namespace {

std::vector<double> densities(const Weight& w, const Cube& q) {
  std::vector<double> v;
  v.reserve(q.cell_count());
  q.for_each_cell([&](std::size_t i) { v.push_back(w.density()[i]); });
  return v;
}

double mean(const std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

}  // namespace

double ap_ratio(const Weight& w, const Cube& q, double p) {
  if (!(p >= 1)) throw ParameterError("A_p requires p >= 1");
  std::vector<double> v = densities(w, q);
  const double avg = mean(v);
  if (p == 1) return avg / *std::min_element(v.begin(), v.end());
  std::vector<double> dual(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dual[i] = std::pow(v[i], 1.0 / (1.0 - p));
  return avg * std::pow(mean(dual), p - 1.0);
}

double rh_ratio(const Weight& w, const Cube& q, double p) {
  if (!(p >= 1)) throw ParameterError("RH_p requires p >= 1");
  std::vector<double> v = densities(w, q);
  const double avg = mean(v);
  if (std::isinf(p)) return *std::max_element(v.begin(), v.end()) / avg;
  const double top = *std::max_element(v.begin(), v.end());
  std::vector<double> pw(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) pw[i] = std::pow(v[i] / top, p);
  return top * std::pow(mean(pw), 1.0 / p) / avg;
}

std::vector<Cube> theta_subsets(const Weight& w, const Cube& q, std::uint64_t seed) {
  std::vector<Cube> out;
  // Heaviest-child chain down to a single cell.
  for (Cube c = q; c.has_children();) {
    const std::vector<Cube> ch = c.children();
    c = *std::max_element(ch.begin(), ch.end(), [&](const Cube& a, const Cube& b) { return w.mass(a) < w.mass(b); });
    out.push_back(c);
  }
  std::vector<Cube> level{q};
  for (int g = 1; g <= 3; ++g) {
    std::vector<Cube> next;
    for (const Cube& c : level)
      if (c.has_children())
        for (const Cube& ch : c.children()) next.push_back(ch);
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  CounterRng rng(seed, 0x7e7a);
  for (int i = 0; i < 8 && q.side_cells() > 1; ++i) {
    const int side = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(q.side_cells() - 1)));
    std::array<int, 2> a = q.anchor_cells();
    for (int d = 0; d < q.dimension(); ++d)
      a[d] += static_cast<int>(rng.below(static_cast<std::uint64_t>(q.side_cells() - side + 1)));
    out.emplace_back(q.dimension(), q.resolution(), a, side);
  }
  return out;
}

WeightReport weight_report(const Weight& w, const std::vector<double>& ps, const std::vector<Cube>& cubes,
                           std::uint64_t seed) {
  if (cubes.empty()) throw ParameterError("weight_report: cube sample is empty");
  WeightReport r;
  r.cubes_sampled = cubes.size();
  r.seed = seed;
  const std::size_t np = ps.size();
  std::vector<double> ap(cubes.size() * np), rh(cubes.size() * np), theta(cubes.size(), 1.0);
  parallel_for(cubes.size(), [&](std::size_t c) {
    const Cube& q = cubes[c];
    for (std::size_t k = 0; k < np; ++k) {
      ap[c * np + k] = ap_ratio(w, q, ps[k]);
      rh[c * np + k] = rh_ratio(w, q, ps[k]);
    }
    // Largest theta with w(S)/w(Q) <= 4 (|S|/|Q|)^theta for every sampled S:
    // theta <= log(4 / ratio) / log(|Q|/|S|) whenever ratio <= 4.
    const double wq = w.mass(q);
    double best = 1.0;
    for (const Cube& s : theta_subsets(w, q, hash_combine(seed, c))) {
      const double size = s.measure() / q.measure();
      if (size >= 1) continue;
      const double ratio = w.mass(s) / wq;
      const double bound = std::log(4.0 / ratio) / std::log(1.0 / size);
      best = std::min(best, bound);
    }
    theta[c] = best;
  });
  for (std::size_t k = 0; k < np; ++k) {
    double a = 1, h = 1;
    for (std::size_t c = 0; c < cubes.size(); ++c) {
      a = std::max(a, ap[c * np + k]);
      h = std::max(h, rh[c * np + k]);
    }
    r.ap[ps[k]] = a;
    r.rh[ps[k]] = h;
  }
  double t = *std::min_element(theta.begin(), theta.end());
  // Clamp into (0, 1]; a nonpositive fit means the sample saw no decay at all.
  r.theta = std::clamp(t, 1e-6, 1.0);
  return r;
}

RhSubsetCheck rh_subset_check(const Weight& w, const Cube& q, const CellSet& e, double p, double constant) {
  if (e.is_empty() || !e.subset_of(q)) throw ParameterError("rh_subset_check: E must be a nonempty subset of Q");
  const double lhs = w.mass(e) / w.mass(q);
  const double size = e.measure() / q.measure();
  const double dual = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;
  return {lhs, constant * std::pow(size, dual)};
}

}  // namespace oscillab
