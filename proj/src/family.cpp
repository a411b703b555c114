#include "oscillab/family.hpp"

#include <algorithm>
#include <cmath>

namespace oscillab {

FamilyKind parse_family_kind(const std::string& name) {
  if (name == "classical-average") return FamilyKind::classical_average;
  if (name == "extended-average") return FamilyKind::extended_average;
  if (name == "semigroup") return FamilyKind::semigroup;
  throw ParameterError("unknown family kind '" + name + "'");
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::classical_average: return "classical-average";
    case FamilyKind::extended_average: return "extended-average";
    case FamilyKind::semigroup: return "semigroup";
  }
  return "?";
}

OscillationFamily make_family(FamilyKind kind, Exponents exponents, std::shared_ptr<const EllipticOperator> op, int N) {
  if (!(exponents.p0 >= 1 && exponents.p0 <= exponents.q0))
    throw ParameterError("family exponents require 1 <= p0 <= q0");
  if (kind == FamilyKind::semigroup) {
    if (!op) throw ParameterError("semigroup family requires an elliptic operator");
    if (N < 1) throw ParameterError("semigroup family requires N >= 1");
  }
  OscillationFamily F;
  F.kind_ = kind;
  F.exponents_ = exponents;
  F.op_ = std::move(op);
  F.power_ = kind == FamilyKind::semigroup ? N : 1;
  return F;
}

OscillationFamily OscillationFamily::with_profile(OffDiagonalProfile p) const {
  OscillationFamily F = *this;
  F.profile_ = std::move(p);
  return F;
}

OscillationFamily OscillationFamily::with_exponents(Exponents e) const {
  OscillationFamily F = make_family(kind_, e, op_, power_);
  return F;
}

Complex cube_mean(const ComplexField& f, const Cube& q) {
  std::vector<double> re, im;
  re.reserve(q.cell_count());
  im.reserve(q.cell_count());
  q.for_each_cell([&](std::size_t i) {
    re.push_back(f[i].real());
    im.push_back(f[i].imag());
  });
  const double n = static_cast<double>(q.cell_count());
  return {pairwise_sum(re) / n, pairwise_sum(im) / n};
}

ComplexField restrict_to(const ComplexField& f, const Cube& q) {
  ComplexField::Vector v = ComplexField::Vector::Zero(static_cast<Eigen::Index>(f.size()));
  q.for_each_cell([&](std::size_t i) { v[static_cast<Eigen::Index>(i)] = f[i]; });
  return ComplexField(f.dimension(), f.resolution(), std::move(v));
}

ComplexField restrict_outside(const ComplexField& f, const Cube& q) {
  ComplexField::Vector v = f.values();
  q.for_each_cell([&](std::size_t i) { v[static_cast<Eigen::Index>(i)] = 0; });
  return ComplexField(f.dimension(), f.resolution(), std::move(v));
}

ComplexField OscillationFamily::apply_b_side(const ComplexField& f, int side_cells) const {
  if (kind_ != FamilyKind::semigroup) throw ParameterError("apply_b_side requires a semigroup family");
  const double l = static_cast<double>(side_cells) / f.resolution();
  ComplexField g = f;
  for (int r = 0; r < power_; ++r) g = g - op_->semigroup(l * l, g);
  return g;
}

ComplexField OscillationFamily::apply_a(const ComplexField& f, const Cube& q) const {
  if (!f.same_grid(q.dimension(), q.resolution())) throw ParameterError("cube resolution mismatch");
  if (kind_ == FamilyKind::semigroup) return f - apply_b_side(f, q.side_cells());
  const Complex mean = cube_mean(f, q);
  const Cube support = kind_ == FamilyKind::classical_average ? q : dilated(q, 2);
  ComplexField::Vector v = ComplexField::Vector::Zero(static_cast<Eigen::Index>(f.size()));
  support.for_each_cell([&](std::size_t i) { v[static_cast<Eigen::Index>(i)] = mean; });
  return ComplexField(f.dimension(), f.resolution(), std::move(v));
}

ComplexField OscillationFamily::apply_b(const ComplexField& f, const Cube& q) const {
  if (kind_ == FamilyKind::semigroup) {
    if (!f.same_grid(q.dimension(), q.resolution())) throw ParameterError("cube resolution mismatch");
    return apply_b_side(f, q.side_cells());
  }
  return f - apply_a(f, q);
}

std::vector<RealField> sharp_maximal(const OscillationFamily& F, const ComplexField& f, const std::vector<double>& ps,
                                     double alpha) {
  const Exponents& e = F.exponents();
  for (double p : ps)
    if (!(p >= e.p0 && p < e.q0) || std::isinf(p))
      throw ParameterError("sharp_maximal: p = " + std::to_string(p) + " outside [p0, q0)");
  const int n = f.dimension();
  const int m = f.resolution();
  const Eigen::Index N = static_cast<Eigen::Index>(f.size());
  std::vector<Eigen::ArrayXd> best(ps.size(), Eigen::ArrayXd::Zero(N));
  for (int side = 1; side <= m; side *= 2) {
    const double l = static_cast<double>(side) / m;
    const double scale = alpha == 0 ? 1.0 : std::pow(l, -alpha);
    const double volume = n == 1 ? side : static_cast<double>(side) * side;
    std::vector<Eigen::ArrayXd> values(ps.size(), Eigen::ArrayXd::Zero(N));
    if (F.side_determined()) {
      const Eigen::ArrayXd g = F.apply_b_side(f, side).modulus();
      for (std::size_t k = 0; k < ps.size(); ++k) {
        if (side == 1) {
          values[k] = g;
        } else {
          const Eigen::ArrayXd sums = box_sums(n, m, g.pow(ps[k]), side);
          values[k] = (sums / volume).pow(1.0 / ps[k]);
        }
      }
    } else if (side > 1) {
      // Averaging families: on Q, B_Q f = f - f_Q.
      const std::size_t anchors = side == m ? 1 : static_cast<std::size_t>(N);
      std::vector<std::vector<double>> per_anchor(anchors);
      parallel_for(anchors, [&](std::size_t a) {
        const Cube q(n, m, {static_cast<int>(a % m), static_cast<int>(a / m)}, side);
        const Complex mean = cube_mean(f, q);
        MeasuredSamples s;
        s.modulus.reserve(q.cell_count());
        q.for_each_cell([&](std::size_t i) { s.modulus.push_back(std::abs(f[i] - mean)); });
        s.mass.assign(s.modulus.size(), 1.0);
        per_anchor[a].resize(ps.size());
        for (std::size_t k = 0; k < ps.size(); ++k) per_anchor[a][k] = lp_average(s, ps[k]);
      });
      for (std::size_t k = 0; k < ps.size(); ++k)
        for (Eigen::Index a = 0; a < N; ++a) values[k][a] = per_anchor[anchors == 1 ? 0 : a][k];
    }
    for (std::size_t k = 0; k < ps.size(); ++k) {
      if (scale != 1.0) values[k] *= scale;
      best[k] = best[k].max(window_max(n, m, values[k], side));
    }
  }
  std::vector<RealField> out;
  for (auto& b : best) out.emplace_back(n, m, Eigen::VectorXd(b.matrix()));
  return out;
}

RealField sharp_maximal(const OscillationFamily& F, const ComplexField& f, double p, double alpha) {
  return sharp_maximal(F, f, std::vector<double>{p}, alpha).front();
}

std::vector<ComplexField> default_probe_patterns(int dimension, int resolution, int random_signs, std::uint64_t seed) {
  std::vector<ComplexField> out;
  out.push_back(ComplexField::constant(dimension, resolution, 1.0));
  for (int r = 0; r < random_signs; ++r) {
    CounterRng rng(seed, 0x9b0be + static_cast<std::uint64_t>(r));
    out.push_back(ComplexField::sample(dimension, resolution, [&](const std::array<double, 2>&) { return rng.sign(); }));
  }
  return out;
}

std::vector<ProbeRegion> probe_regions(const Cube& q) {
  std::vector<ProbeRegion> out;
  Cube outer = dilated(q, 4);
  out.push_back({2, outer, std::nullopt});
  for (int k = 3; !outer.is_full(); ++k) {
    Cube next = dilated(q, std::ldexp(1.0, k));
    out.push_back({k, next, outer});
    outer = next;
  }
  return out;
}

namespace {

ComplexField region_probe(const ComplexField& pattern, const ProbeRegion& r) {
  ComplexField g = restrict_to(pattern, r.outer);
  if (r.inner) g = restrict_outside(g, *r.inner);
  return g;
}

std::vector<Cube> nested_subcubes(const Cube& q) {
  std::vector<Cube> out{q};
  if (q.has_children()) {
    for (const Cube& c : q.children()) out.push_back(c);
    const Cube c0 = q.child(0);
    if (c0.has_children()) out.push_back(c0.child(0));
  }
  return out;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& alpha, int first, int last) {
  DecayFit fit;
  if (last < 0) {
    last = -1;
    for (int k = first; k < static_cast<int>(alpha.size()); ++k)
      if (alpha[k] > 0) last = k;
  }
  std::vector<double> xs, ys;
  for (int k = first; k <= last && k < static_cast<int>(alpha.size()); ++k) {
    if (!(alpha[k] > 0)) continue;
    xs.push_back(std::ldexp(1.0, 2 * k));
    ys.push_back(std::log(alpha[k]));
  }
  fit.k_first = first;
  fit.k_last = last;
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  const double mx = pairwise_sum(xs) / n;
  const double my = pairwise_sum(ys) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  fit.c = -slope;
  fit.intercept = my - slope * mx;
  double rss = 0, yy = 0, log_envelope = -kInfinity;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double yhat = fit.intercept + slope * xs[i];
    rss += (ys[i] - yhat) * (ys[i] - yhat);
    yy += ys[i] * ys[i];
    log_envelope = std::max(log_envelope, ys[i] + fit.c * xs[i]);
  }
  fit.residual = yy > 0 ? std::sqrt(rss / yy) : 0;
  fit.C = std::exp(log_envelope);
  fit.valid = true;
  return fit;
}

OffDiagonalProfile measure_offdiagonal(const OscillationFamily& F, const std::vector<ComplexField>& patterns,
                                       const std::vector<Cube>& cubes, const ProfileOptions& options) {
  if (patterns.empty()) throw ParameterError("measure_offdiagonal: empty probe set");
  if (cubes.empty()) throw ParameterError("measure_offdiagonal: empty cube sample");
  const double p0 = F.exponents().p0;
  const double q0 = F.exponents().q0;
  std::vector<std::vector<double>> alphas(cubes.size()), betas(cubes.size());
  parallel_for(cubes.size(), [&](std::size_t c) {
    const Cube& q = cubes[c];
    const std::vector<ProbeRegion> regions = probe_regions(q);
    const int kmax = regions.back().k;
    std::vector<double> a(kmax + 1, 0.0), b(kmax + 1, 0.0);
    const std::vector<Cube> rs = nested_subcubes(q);
    std::vector<Cube> targets;  // targets[j] = 2^j Q
    for (int j = 0; j <= kmax; ++j) targets.push_back(dilated(q, std::ldexp(1.0, j)));
    for (const ProbeRegion& region : regions) {
      for (const ComplexField& pattern : patterns) {
        const ComplexField g = region_probe(pattern, region);
        const double den = lp_average(g, region.outer, p0);
        if (den == 0) continue;
        const ComplexField u = F.apply_a(g, q);
        if (region.k == 2) {
          a[2] = std::max(a[2], lp_average(u, targets[1], q0) / den);
        } else {
          for (int j = 1; j <= region.k - 2; ++j) a[region.k] = std::max(a[region.k], lp_average(u, targets[j], q0) / den);
        }
        for (const Cube& r : rs) {
          const ComplexField v = F.apply_b(u, r);
          b[region.k] = std::max(b[region.k], lp_average(v, dilated(r, 2), q0) / den);
        }
      }
    }
    alphas[c] = std::move(a);
    betas[c] = std::move(b);
  });
  OffDiagonalProfile prof;
  prof.exponents = F.exponents();
  prof.dimension = cubes.front().dimension();
  prof.cubes = cubes.size();
  prof.probes = patterns.size();
  prof.probe_description = "constant one and " + std::to_string(patterns.size() - 1) +
                           " random-sign patterns restricted to 4Q and dyadic annuli 2^kQ \\ 2^(k-1)Q";
  for (std::size_t c = 0; c < cubes.size(); ++c) {
    if (alphas[c].size() > prof.alpha.size()) {
      prof.alpha.resize(alphas[c].size(), 0.0);
      prof.beta.resize(alphas[c].size(), 0.0);
    }
    for (std::size_t k = 0; k < alphas[c].size(); ++k) {
      prof.alpha[k] = std::max(prof.alpha[k], alphas[c][k]);
      prof.beta[k] = std::max(prof.beta[k], betas[c][k]);
    }
  }
  prof.fit = fit_decay(prof.alpha, options.fit_first, options.fit_last);
  return prof;
}

AuditReport audit_family(const OscillationFamily& F, const std::vector<ComplexField>& probes,
                         const std::vector<std::pair<Cube, Cube>>& pairs) {
  AuditReport r;
  r.kind = F.kind();
  r.side_determined = F.side_determined();
  r.pairs = pairs.size();
  r.probes = probes.size();
  if (probes.empty() || pairs.empty()) return r;
  const double p0 = F.exponents().p0;
  struct Slot {
    double comm = 0, bound = 0, loc = 0, rep = 0;
  };
  std::vector<Slot> slots(pairs.size() * probes.size());
  parallel_for(slots.size(), [&](std::size_t idx) {
    const auto& [R, Q] = pairs[idx / probes.size()];
    if (!Q.contains(R)) throw ParameterError("audit_family: pair " + R.describe() + " is not inside " + Q.describe());
    const ComplexField& f = probes[idx % probes.size()];
    const Cube torus = Cube::full(f.dimension(), f.resolution());
    const double fn = lp_average(f, torus, p0);
    const double fsup = lp_average(f, torus, kInfinity);
    Slot s;
    if (fn == 0) {
      slots[idx] = s;
      return;
    }
    const ComplexField bq = F.apply_b(f, Q);
    const ComplexField br = F.apply_b(f, R);
    s.comm = lp_average(F.apply_b(br, Q) - F.apply_b(bq, R), torus, p0) / fn;
    s.bound = std::max(lp_average(bq, torus, p0), lp_average(br, torus, p0)) / fn;
    const Cube q2 = dilated(Q, 2);
    const ComplexField aq = F.apply_a(f, Q);
    const ComplexField local = restrict_to(F.apply_a(restrict_to(f, q2), Q), q2);
    s.loc = lp_average(aq - local, torus, kInfinity) / fsup;
    const ComplexField ara = F.apply_a(aq, R);
    s.rep = lp_average(ara - aq, dilated(R, 2), kInfinity) / fsup;
    slots[idx] = s;
  });
  for (const Slot& s : slots) {
    r.commutator = std::max(r.commutator, s.comm);
    r.uniform_bound = std::max(r.uniform_bound, s.bound);
    r.localization_defect = std::max(r.localization_defect, s.loc);
    r.replace_comm_defect = std::max(r.replace_comm_defect, s.rep);
  }
  r.localization = r.localization_defect <= 1e-12;
  r.replace_comm = r.replace_comm_defect <= 1e-12;
  return r;
}

}  // namespace oscillab
