#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "oscillab/config.hpp"
#include "oscillab/elliptic.hpp"
#include "oscillab/family.hpp"
#include "oscillab/verify.hpp"

using namespace oscillab;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_sup(const ComplexField& a, const ComplexField& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den == 0 ? num : num / den;
}

ComplexField smooth_probe(int n, int m) {
  return ComplexField::sample(n, m, [&](auto x) {
    const double y = n == 2 ? x[1] : 0.0;
    return Complex(std::cos(2 * kPi * (2 * x[0] + y)) + 0.5 * std::sin(2 * kPi * x[0]), 0.25 * std::cos(2 * kPi * y));
  });
}

ComplexField smooth_bump(int n, int m) {
  return ComplexField::sample(n, m, [&](auto x) {
    const double dx = std::sin(kPi * (x[0] - 0.5)), dy = n == 2 ? std::sin(kPi * (x[1] - 0.5)) : 0.0;
    return std::exp(-4 * (dx * dx + dy * dy));
  });
}

EllipticOperator sinusoidal(int n, int m, SolverKind solver = SolverKind::automatic) {
  return EllipticOperator::from_function(
      n, m,
      [](std::array<double, 2> x) -> CoefficientMatrix {
        return CoefficientMatrix::Identity() * Complex(1.25 + 0.75 * std::sin(2 * kPi * x[0]), 0);
      },
      solver);
}

CoefficientMatrix anisotropic() {
  CoefficientMatrix a;
  a << 1.5, 0.4, 0.4, 0.8;
  return a;
}

CoefficientMatrix perturbed(double eps) {
  CoefficientMatrix r;
  r << 0.3, -0.7, 0.5, 0.9;
  return CoefficientMatrix::Identity() + Complex(0, eps) * r;
}

struct Identities {
  double conservation, law, us;
};

Identities identities(const EllipticOperator& L, const ComplexField& f, const ComplexField& smooth) {
  const int n = L.dimension(), m = L.resolution();
  const ComplexField one = ComplexField::constant(n, m, 1.0);
  Identities out{};
  out.conservation = rel_sup(L.semigroup(0.01, one), one);
  out.law = rel_sup(L.semigroup(0.01, L.semigroup(0.02, f)), L.semigroup(0.03, f));
  const double s = 0.005;
  const ComplexField u = u_s_apply(L, s, 1, smooth);
  out.us = rel_sup(Complex(s, 0) * L.generator(u), smooth - L.semigroup(s, smooth));
  return out;
}

}  // namespace

TEST_CASE("semigroup identities on the exact routes") {
  struct Case {
    const char* name;
    EllipticOperator op;
  };
  const std::vector<Case> cases{
      {"1-D laplacian", EllipticOperator::laplacian(1, 256)},
      {"1-D variable", sinusoidal(1, 256)},
      {"2-D anisotropic", EllipticOperator::constant(2, 256, anisotropic())},
      {"2-D complex", EllipticOperator::constant(2, 256, perturbed(0.3))},
      {"2-D variable", sinusoidal(2, 32)},
  };
  for (const Case& c : cases) {
    CAPTURE(c.name);
    const int n = c.op.dimension(), m = c.op.resolution();
    CHECK(c.op.solver() != SolverKind::crank_nicolson);
    const Identities r = identities(c.op, oracle::random_complex(n, m, 17), smooth_probe(n, m) + smooth_bump(n, m).cast<Complex>());
    CHECK(r.conservation <= 1e-8);
    CHECK(r.law <= 1e-8);
    CHECK(r.us <= 1e-6);
  }
}

TEST_CASE("Crank-Nicolson route") {
  const EllipticOperator L = sinusoidal(2, 16, SolverKind::crank_nicolson);
  REQUIRE(L.solver() == SolverKind::crank_nicolson);
  const EllipticOperator exact = L.with_solver(SolverKind::eigendecomposition);
  const ComplexField f = oracle::random_complex(2, 16, 3);
  const ComplexField one = ComplexField::constant(2, 16, 1.0);
  CHECK(rel_sup(L.semigroup(0.02, one), one) <= 1e-8);
  CHECK(rel_sup(L.semigroup(0.02, f), exact.semigroup(0.02, f)) <= 5e-2);
  const ComplexField g = smooth_probe(2, 16);
  CHECK(rel_sup(L.semigroup(0.02, g), exact.semigroup(0.02, g)) <= 5e-3);
}

TEST_CASE("spectral route matches Fourier multipliers") {
  const int m = 128;
  const double t = 0.003;
  for (const CoefficientMatrix& a : {CoefficientMatrix(CoefficientMatrix::Identity()), anisotropic(), perturbed(0.2)}) {
    const EllipticOperator L = EllipticOperator::constant(1, m, a);
    REQUIRE(L.solver() == SolverKind::spectral);
    const ComplexField f = oracle::random_complex(1, m, 41);
    const auto fh = oracle::dft(f);
    const ComplexField u = L.semigroup(t, f);
    const auto uh = oracle::dft(u);
    const auto gh = oracle::dft(L.generator(f));
    double err = 0, gerr = 0, scale = 0, gscale = 0;
    for (int k = 0; k < m; ++k) {
      const double freq = k <= m / 2 ? k : k - m;
      const Complex symbol = 4 * kPi * kPi * a(0, 0) * freq * freq;
      err = std::max(err, std::abs(uh[k] - std::exp(-t * symbol) * fh[k]));
      gerr = std::max(gerr, std::abs(gh[k] - symbol * fh[k]));
      scale = std::max(scale, std::abs(fh[k]));
      gscale = std::max(gscale, std::abs(symbol * fh[k]));
    }
    CHECK(err / scale <= 1e-10);
    CHECK(gerr / gscale <= 1e-10);
  }
  // 2-D anisotropic: e^{-tL} of a single mode is the scalar multiplier times the mode.
  const EllipticOperator L2 = EllipticOperator::constant(2, 64, anisotropic());
  for (auto [k0, k1] : {std::pair{1, 0}, std::pair{2, -3}, std::pair{5, 4}}) {
    const ComplexField e = ComplexField::sample(2, 64, [&](auto x) { return std::polar(1.0, 2 * kPi * (k0 * x[0] + k1 * x[1])); });
    const double mu = 4 * kPi * kPi * (1.5 * k0 * k0 + 0.8 * k0 * k1 + 0.8 * k1 * k1);
    CHECK(rel_sup(L2.semigroup(t, e), std::exp(-t * mu) * e) <= 1e-10);
  }
}

TEST_CASE("U_s multiplier") {
  const int m = 128;
  const EllipticOperator L = EllipticOperator::laplacian(1, m);
  const ComplexField one = ComplexField::constant(1, m, 1.0);
  for (int N : {1, 2, 3}) {
    CHECK(rel_sup(u_s_apply(L, 0.01, N, one), one) <= 1e-12);
    for (int k : {1, 3, 10, 40}) {
      const ComplexField e = ComplexField::sample(1, m, [&](auto x) { return std::cos(2 * kPi * k * x[0]); });
      for (double s : {1e-4, 0.003, 0.05}) {
        const double sm = s * 4 * kPi * kPi * k * k;
        const double multiplier = std::pow(-std::expm1(-sm) / sm, N);
        const ComplexField u = u_s_apply(L, s, N, e);
        double err = 0;
        for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(u[i] - multiplier * e[i]));
        CHECK(err <= 1e-10 * multiplier + 1e-14);
      }
    }
  }
  CHECK_THROWS_AS(u_s_apply(L, 0.01, 0, one), ParameterError);
  const auto nodes = u_s_nodes(L, 0.05);
  double total = 0;
  for (const auto& [x, w] : nodes) {
    CHECK(x > 0);
    CHECK(x < 0.05);
    total += w;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("semigroup positivity and mass conservation") {
  for (const EllipticOperator& L : {EllipticOperator::laplacian(1, 256), sinusoidal(1, 128),
                                    EllipticOperator::constant(2, 64, anisotropic())}) {
    const int n = L.dimension(), m = L.resolution();
    for (std::uint64_t s = 0; s < 20; ++s) {
      const RealField f0 = oracle::random_real(n, m, 900 + s);
      const ComplexField f = ComplexField::sample(n, m, [&, i = 0](auto) mutable { return std::abs(f0[i++]); });
      const ComplexField u = L.semigroup(1e-3, f);
      double lo = 0;
      for (std::size_t i = 0; i < u.size(); ++i) lo = std::min(lo, u[i].real());
      CHECK(lo >= -1e-12 * std::max(1.0, std::abs(f.integral())));
      CHECK(std::abs(u.integral() - f.integral()) <= 1e-10 * std::max(1.0, std::abs(f.integral())));
    }
  }
}

TEST_CASE("A + B = I for every family kind") {
  auto op = std::make_shared<const EllipticOperator>(EllipticOperator::laplacian(2, 32));
  const ComplexField f = oracle::random_complex(2, 32, 8);
  CounterRng rng(4, 0);
  for (FamilyKind kind : {FamilyKind::classical_average, FamilyKind::extended_average, FamilyKind::semigroup}) {
    const OscillationFamily F = make_family(kind, {1, kInfinity}, op, 2);
    for (int t = 0; t < 10; ++t) {
      const Cube q = oracle::random_cube(2, 32, rng);
      CHECK(rel_sup(F.apply_a(f, q) + F.apply_b(f, q), f) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(make_family(FamilyKind::semigroup, {1, kInfinity}), ParameterError);
  CHECK_THROWS_AS(make_family(FamilyKind::classical_average, {2, 1}), ParameterError);
  CHECK(parse_family_kind("extended-average") == FamilyKind::extended_average);
  CHECK(make_family(FamilyKind::classical_average, {1, kInfinity}, op, 3).power() == 1);
}

TEST_CASE("averaging family examples") {
  const ComplexField f = ComplexField::sample(1, 16, [](auto x) { return std::floor(x[0] * 16); });
  const Cube q(1, 16, {4, 0}, 4);
  const OscillationFamily classical = make_family(FamilyKind::classical_average, {1, kInfinity});
  const ComplexField a = classical.apply_a(f, q);
  CHECK(a[3] == Complex(0));
  CHECK(a[4] == Complex(5.5));
  CHECK(a[7] == Complex(5.5));
  CHECK(a[8] == Complex(0));
  const ComplexField e = make_family(FamilyKind::extended_average, {1, kInfinity}).apply_a(f, q);
  CHECK(e[1] == Complex(0));
  CHECK(e[2] == Complex(5.5));
  CHECK(e[9] == Complex(5.5));
  CHECK(e[10] == Complex(0));
}

TEST_CASE("audit examples") {
  const int m = 64;
  const auto probes = default_probe_patterns(1, m, 2, 5);
  std::vector<std::pair<Cube, Cube>> pairs;
  for (int side : {32, 16, 8})
    for (int x = 0; x < m; x += 2 * side) pairs.emplace_back(Cube(1, m, {x, 0}, side / 2), Cube(1, m, {x, 0}, side));
  auto op = std::make_shared<const EllipticOperator>(EllipticOperator::laplacian(1, m));
  const AuditReport semi = audit_family(make_family(FamilyKind::semigroup, {1, kInfinity}, op), probes, pairs);
  CHECK(semi.commutator <= 1e-8);
  CHECK(semi.side_determined);
  CHECK(semi.uniform_bound <= 2);
  CHECK(semi.pairs == pairs.size());
  CHECK(semi.probes == 3);
  const AuditReport cl = audit_family(make_family(FamilyKind::classical_average, {1, kInfinity}), probes, pairs);
  CHECK(cl.localization);
  CHECK(cl.uniform_bound <= 2 + 1e-12);
  const AuditReport ex = audit_family(make_family(FamilyKind::extended_average, {1, kInfinity}), probes, pairs);
  CHECK(ex.localization);
  CHECK(ex.replace_comm);
  CHECK(ex.uniform_bound <= 1 + 2 + 1e-12);
  CHECK(audit_family(make_family(FamilyKind::classical_average, {1, kInfinity}), {}, pairs).pairs == pairs.size());
  CHECK_THROWS_AS(audit_family(make_family(FamilyKind::classical_average, {1, kInfinity}), probes,
                               {{Cube(1, m, {0, 0}, 16), Cube(1, m, {0, 0}, 8)}}),
                  ParameterError);
}

TEST_CASE("off-diagonal profiles") {
  const int m = 256;
  ProfileSpec spec;
  spec.sidelength = 1.0 / 64;
  const auto cubes = profile_cubes(1, m, spec, 7);
  const auto patterns = default_probe_patterns(1, m, 1, 7);
  const OffDiagonalProfile avg =
      measure_offdiagonal(make_family(FamilyKind::classical_average, {1, kInfinity}), patterns, cubes);
  for (int k = 3; k < static_cast<int>(avg.alpha.size()); ++k) CHECK(avg.alpha_at(k) == 0);
  const OffDiagonalProfile ext =
      measure_offdiagonal(make_family(FamilyKind::extended_average, {1, kInfinity}), patterns, cubes);
  CHECK(ext.alpha_at(2) <= 1 + 1e-12);
  for (int k = 3; k < static_cast<int>(ext.alpha.size()); ++k) CHECK(ext.alpha_at(k) == 0);

  auto op = std::make_shared<const EllipticOperator>(EllipticOperator::laplacian(1, m));
  const OffDiagonalProfile heat =
      measure_offdiagonal(make_family(FamilyKind::semigroup, {2, 2}, op), patterns, cubes, {3, 6});
  REQUIRE(heat.fit.valid);
  CHECK(heat.fit.c > 0);
  CHECK(heat.fit.residual < 0.1);
  for (int k = 4; k <= 6; ++k) CHECK(heat.alpha_at(k) < heat.alpha_at(k - 1));
  CHECK(heat.alpha_at(0) == 0);
  CHECK(heat.alpha_at(1) == 0);
  CHECK(heat.cubes == cubes.size());
}

TEST_CASE("fit_decay examples") {
  std::vector<double> alpha(8, 0.0);
  for (int k = 2; k < 8; ++k) alpha[k] = 3 * std::exp(-0.01 * std::ldexp(1.0, 2 * k));
  const DecayFit fit = fit_decay(alpha, 3, 6);
  REQUIRE(fit.valid);
  CHECK(fit.c == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3).epsilon(1e-9));
  CHECK(fit.residual <= 1e-12);
  CHECK(fit.k_first == 3);
  CHECK(fit.k_last == 6);
  CHECK_FALSE(fit_decay(std::vector<double>(8, 0.0), 3, 6).valid);
}

TEST_CASE("sharp maximal function matches brute force") {
  const OscillationFamily F = make_family(FamilyKind::classical_average, {1, kInfinity});
  for (std::uint64_t s = 0; s < 6; ++s) {
    const int n = s % 2 ? 2 : 1;
    const int m = n == 1 ? 32 : 8;
    const ComplexField f = oracle::random_complex(n, m, 300 + s);
    for (double p : {1.0, 2.5}) {
      const RealField got = sharp_maximal(F, f, p);
      const auto want = oracle::sharp_classical(f, p);
      for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(sharp_maximal(make_family(FamilyKind::classical_average, {2, 4}), oracle::random_complex(1, 8, 1), 1),
                  ParameterError);
}

TEST_CASE("sharp maximal function is monotone in p") {
  auto op = std::make_shared<const EllipticOperator>(EllipticOperator::laplacian(1, 64));
  const std::vector<double> ps{1, 1.5, 2, 4, 8};
  for (FamilyKind kind : {FamilyKind::classical_average, FamilyKind::semigroup}) {
    const OscillationFamily F = make_family(kind, {1, kInfinity}, op);
    for (std::uint64_t s = 0; s < 100; ++s) {
      const ComplexField f = to_complex(oracle::random_real(1, 64, 5000 + s));
      const auto fields = sharp_maximal(F, f, ps);
      for (std::size_t k = 1; k < ps.size(); ++k)
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(fields[k][i] >= fields[k - 1][i] * (1 - 1e-12));
    }
  }
}
