#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"
#include "oscillab/field_io.hpp"
#include "oscillab/norms.hpp"
#include "oscillab/weight.hpp"

using namespace oscillab;

TEST_CASE("field invariants") {
  CHECK_THROWS_AS(RealField(1, 8, RealField::Vector::Zero(7)), DataError);
  RealField::Vector v = RealField::Vector::Zero(8);
  v[3] = std::nan("");
  CHECK_THROWS_AS(RealField(1, 8, v), DataError);
  for (int m : {8, 64, 256}) {
    CHECK(RealField::constant(1, m, 2.5).integral() == 2.5);
    CHECK(RealField::constant(2, m, -3.0).integral() == -3.0);
  }
  const auto x = RealField::center(1, 8, 0);
  CHECK(x[0] == 1.0 / 16);
}

TEST_CASE("lp_average examples") {
  const RealField three = RealField::constant(1, 16, 3.0);
  for (double p : {1.0, 1.5, 2.0, 7.0, kInfinity}) CHECK(lp_average(three, Cube(1, 16, {5, 0}, 4), p) == doctest::Approx(3.0));

  const RealField half = RealField::sample(1, 16, [](auto x) { return x[0] < 0.5 ? 1.0 : 0.0; });
  CHECK(lp_average(half, Cube::full(1, 16), 2) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  const RealField id = RealField::sample(1, 8, [](auto x) { return x[0]; });
  const Cube q(1, 8, {0, 0}, 4);
  CHECK(lp_average(id, q, 1) == doctest::Approx(oracle::lp_average(oracle::moduli(id, q), 1)).epsilon(1e-15));
  CHECK(lp_average(id, q, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(lp_average(id, q, kInfinity) == doctest::Approx(7.0 / 16));
}

TEST_CASE("norms reject mismatched cubes") {
  const RealField f = RealField::constant(1, 16, 1.0);
  CHECK_THROWS_AS(lp_average(f, Cube(1, 32, {0, 0}, 4), 1), ParameterError);
  CHECK_THROWS_AS(kolmogorov_check(f, Cube::full(1, 16), 2, 2), ParameterError);
}

TEST_CASE("weak_lq_norm examples and brute force") {
  CHECK(weak_lq_norm(RealField::constant(1, 32, 2.0), Cube::full(1, 32), 1.5) == doctest::Approx(2.0));
  const RealField half = RealField::sample(1, 16, [](auto x) { return x[0] < 0.5 ? 1.0 : 0.0; });
  CHECK(weak_lq_norm(half, Cube::full(1, 16), 2) == doctest::Approx(std::sqrt(0.5)));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RealField f = oracle::random_real(1, 64, s);
    CounterRng rng(s, 1);
    const Cube q = oracle::random_cube(1, 64, rng);
    CHECK(weak_lq_norm(f, q, 1.5) == doctest::Approx(oracle::weak_norm(oracle::moduli(f, q), 1.5)).epsilon(1e-12));
  }
}

TEST_CASE("weighted norms against direct sums") {
  const RealField dens = RealField::sample(2, 16, [](auto x) { return 1 + x[0] + 3 * x[1] * x[1]; });
  const Weight w(dens);
  const ComplexField f = oracle::random_complex(2, 16, 5);
  const Cube q(2, 16, {3, 9}, 8);
  std::vector<double> mass;
  for (std::size_t i : oracle::cells(q)) mass.push_back(dens[i]);
  const auto v = oracle::moduli(f, q);
  CHECK(lp_average(f, q, 2.5, &w) == doctest::Approx(oracle::lp_average(v, mass, 2.5)).epsilon(1e-12));
  CHECK(weak_lq_norm(f, q, 3, &w) == doctest::Approx(oracle::weak_norm(v, mass, 3)).epsilon(1e-12));
}

TEST_CASE("exp_luxemburg_norm examples") {
  const double c = 1.7;
  CHECK(exp_luxemburg_norm(RealField::constant(1, 32, c), Cube::full(1, 32)) ==
        doctest::Approx(c / std::log(2.0)).epsilon(1e-10));
  const RealField half = RealField::sample(1, 32, [&](auto x) { return x[0] < 0.5 ? c : 0.0; });
  CHECK(exp_luxemburg_norm(half, Cube::full(1, 32)) == doctest::Approx(c / std::log(3.0)).epsilon(1e-10));
  CHECK(exp_luxemburg_norm(RealField::constant(1, 32, 0.0), Cube::full(1, 32)) == 0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const RealField f = oracle::random_real(1, 64, 100 + s);
    CounterRng rng(s, 2);
    const Cube q = oracle::random_cube(1, 64, rng);
    const auto v = oracle::moduli(f, q);
    const double mx = *std::max_element(v.begin(), v.end());
    CHECK(std::abs(exp_luxemburg_norm(f, q) - oracle::exp_norm(v)) <= 1e-9 * mx + 1e-300);
  }
}

TEST_CASE("kolmogorov_check examples") {
  const auto kc = kolmogorov_check(RealField::constant(1, 16, 2.0), Cube::full(1, 16), 1, 2);
  CHECK(kc.lhs == doctest::Approx(2.0));
  CHECK(kc.rhs == doctest::Approx(4.0));
  const RealField ind = RealField::sample(1, 16, [](auto x) { return x[0] < 0.25 ? 1.0 : 0.0; });
  const auto ki = kolmogorov_check(ind, Cube::full(1, 16), 1, 2);
  CHECK(ki.lhs == doctest::Approx(0.25));
  CHECK(ki.rhs == doctest::Approx(2 * 0.5));
  CHECK_THROWS_AS(kolmogorov_check(ind, Cube::full(1, 16), 2, 2), ParameterError);
}

TEST_CASE("maximal_function examples") {
  const RealField c = RealField::constant(2, 8, 4.0);
  const RealField mc = maximal_function(c, 1);
  for (std::size_t i = 0; i < mc.size(); ++i) CHECK(mc[i] == doctest::Approx(4.0));

  RealField::Vector v = RealField::Vector::Zero(32);
  v[7] = 1;
  const RealField spike(1, 32, v);
  for (double p : {1.0, 2.0}) {
    const RealField mf = maximal_function(spike, p);
    const auto ref = oracle::maximal(spike, p);
    for (std::size_t i = 0; i < mf.size(); ++i) CHECK(mf[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
  for (std::uint64_t s = 0; s < 6; ++s) {
    const RealField f = oracle::random_real(2, 8, 300 + s);
    const RealField mf = maximal_function(f, 1.5);
    const auto ref = oracle::maximal(f, 1.5);
    for (std::size_t i = 0; i < mf.size(); ++i) CHECK(mf[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("maximal weak (1,1) constant is finite and stable") {
  auto constant = [](int m) {
    double worst = 0;
    for (std::uint64_t s = 0; s < 8; ++s) {
      const RealField f = oracle::random_real(1, m, 500 + s);
      const RealField mf = maximal_function(f, 1);
      const double l1 = lp_average(f, Cube::full(1, m), 1);
      std::vector<double> vals(mf.values().data(), mf.values().data() + mf.size());
      for (double t : vals) {
        std::size_t count = 0;
        for (double x : vals) count += x > 0.999 * t;
        worst = std::max(worst, 0.999 * t * count / static_cast<double>(m) / l1);
      }
    }
    return worst;
  };
  const double c1 = constant(64), c2 = constant(256);
  CHECK(std::isfinite(c1));
  CHECK(c1 <= 3.0);
  CHECK(c2 <= 3.0);
}

TEST_CASE("property suite: exact norm inequalities over 1000 random fields") {
  int violations = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const int n = s % 4 == 0 ? 2 : 1;
    const int m = n == 1 ? 64 : 16;
    const RealField f = oracle::random_real(n, m, s);
    CounterRng rng(s, 3);
    const Cube q = oracle::random_cube(n, m, rng);
    const double q_exp = rng.uniform(1.05, 6);
    const double r = rng.uniform(0.2, 0.95) * q_exp;
    if (weak_lq_norm(f, q, q_exp) > lp_average(f, q, q_exp) * (1 + 1e-12)) ++violations;
    const auto kc = kolmogorov_check(f, q, r, q_exp);
    if (kc.lhs > kc.rhs * (1 + 1e-12)) ++violations;
    double prev = 0;
    for (double p : {1.0, 1.3, 2.0, 3.5, 8.0, kInfinity}) {
      const double a = lp_average(f, q, p);
      if (a < prev * (1 - 1e-12)) ++violations;
      prev = a;
    }
    const RealField mf = maximal_function(f, 1 + (s % 3));
    for (std::size_t i = 0; i < f.size(); ++i)
      if (mf[i] < std::abs(f[i]) * (1 - 1e-12)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("homogeneity of the three norms") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RealField f = oracle::random_real(1, 64, 900 + s);
    CounterRng rng(s, 4);
    const Cube q = oracle::random_cube(1, 64, rng);
    const double c = rng.uniform(0.1, 10);
    const RealField g = c * f;
    CHECK(lp_average(g, q, 2.2) == doctest::Approx(c * lp_average(f, q, 2.2)).epsilon(1e-12));
    CHECK(weak_lq_norm(g, q, 1.7) == doctest::Approx(c * weak_lq_norm(f, q, 1.7)).epsilon(1e-12));
    CHECK(exp_luxemburg_norm(g, q) == doctest::Approx(c * exp_luxemburg_norm(f, q)).epsilon(1e-9));
  }
}

TEST_CASE("exp norm gauge and L1 embedding") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RealField f = oracle::random_real(1, 64, 1200 + s);
    const Cube q = Cube::full(1, 64);
    const double lam = exp_luxemburg_norm(f, q);
    if (lam == 0) continue;
    const double g = luxemburg_gauge(gather(f, q), lam);
    CHECK(g <= 1.0 + 1e-9);
    CHECK(g >= 1.0 - 1e-6);
    CHECK(lp_average(f, q, 1) <= lam * (1 + 1e-12));
  }
}

TEST_CASE("norm values vanish only on zero fields") {
  const RealField z = RealField::constant(1, 16, 0.0);
  const Cube q(1, 16, {2, 0}, 4);
  CHECK(norm_report(z, q, NormKind::lp, 2).value == 0);
  CHECK(norm_report(z, q, NormKind::weak_lq, 2).value == 0);
  CHECK(norm_report(z, q, NormKind::exp_l, 0).value == 0);
  RealField::Vector v = RealField::Vector::Zero(16);
  v[3] = 1e-3;
  const RealField f(1, 16, v);
  CHECK(norm_report(f, q, NormKind::lp, 2).value > 0);
  CHECK(norm_report(f, q, NormKind::weak_lq, 2).value > 0);
  CHECK(norm_report(f, q, NormKind::exp_l, 0).value > 0);
}

TEST_CASE("field I/O round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "oscillab_field_io";
  std::filesystem::create_directories(dir);
  const ComplexField f = oracle::random_complex(2, 16, 77);
  for (auto enc : {FieldEncoding::binary, FieldEncoding::csv}) {
    const auto path = dir / (enc == FieldEncoding::binary ? "f.bin" : "f.csv");
    write_field(path, f, enc);
    const LoadedField g = read_field(path);
    CHECK(g.is_complex);
    CHECK(g.field.same_grid(2, 16));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(g.field[i] == f[i]);
  }
  const RealField r = oracle::random_real(1, 32, 78);
  write_field(dir / "r.csv", r, FieldEncoding::csv);
  const RealField rr = read_real_field(dir / "r.csv");
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(rr[i] == r[i]);
  CHECK_THROWS_AS(read_field(dir / "missing.bin"), DataError);
}
