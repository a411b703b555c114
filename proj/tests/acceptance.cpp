// Acceptance suite: one pass/fail line per criterion, exit code 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "oscillab/config.hpp"
#include "oscillab/elliptic.hpp"
#include "oscillab/verify.hpp"
#include "runner.hpp"

using namespace oscillab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string config_path(const std::string& name) { return std::string(OSCILLAB_SOURCE_DIR) + "/configs/" + name; }

ExperimentConfig load(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return load_config(config_path(name), overrides);
}

double rel_sup(const ComplexField& a, const ComplexField& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den == 0 ? num : num / den;
}

std::shared_ptr<const RealField> modulus(const RealField& f) {
  return std::make_shared<const RealField>(RealField(f.dimension(), f.resolution(), f.modulus().matrix()));
}

std::vector<Cube> dyadic_tops(int n, int m, int side) {
  std::vector<Cube> out;
  for (int y = 0; y < (n == 1 ? 1 : m); y += side)
    for (int x = 0; x < m; x += side) out.emplace_back(n, m, std::array<int, 2>{x, y}, side);
  return out;
}

// 1. Exact inequalities on 1000 seeded fields per property.
Outcome exact_inequalities() {
  const int fields = 1000;
  std::map<std::string, std::size_t> violations{{"weak<=strong", 0}, {"kolmogorov", 0}, {"jensen", 0},
                                                {"maximal>=|f|", 0}, {"D_r<=D_s", 0}, {"sharp-p", 0}};
  auto op1 = std::make_shared<const EllipticOperator>(EllipticOperator::laplacian(1, 64));
  auto op2 = std::make_shared<const EllipticOperator>(EllipticOperator::laplacian(2, 16));
  const std::vector<double> ps{1, 1.5, 2, 3, 8, kInfinity};
  for (int s = 0; s < fields; ++s) {
    const int n = s % 2 ? 2 : 1;
    const int m = n == 1 ? 64 : 16;
    const RealField f = oracle::random_real(n, m, 100000 + static_cast<std::uint64_t>(s));
    CounterRng rng(static_cast<std::uint64_t>(s), 0xacce);
    const Cube q = oracle::random_cube(n, m, rng);
    const MeasuredSamples smp = gather(f, q);
    for (double e : {1.5, 2.0, 4.0})
      if (weak_lq_norm(smp, e) > lp_average(smp, e) * (1 + 1e-12)) ++violations["weak<=strong"];
    for (auto [r, e] : {std::pair{1.0, 2.0}, std::pair{1.5, 2.0}, std::pair{1.0, 4.0}, std::pair{3.0, 4.0}}) {
      const KolmogorovPair kp = kolmogorov_check(smp, r, e);
      if (kp.lhs > kp.rhs * (1 + 1e-12)) ++violations["kolmogorov"];
    }
    for (std::size_t k = 1; k < ps.size(); ++k)
      if (lp_average(smp, ps[k - 1]) > lp_average(smp, ps[k]) * (1 + 1e-12)) ++violations["jensen"];
    for (double p : {1.0, 2.0}) {
      const RealField mf = maximal_function(f, p);
      for (std::size_t i = 0; i < f.size(); ++i)
        if (mf[i] < std::abs(f[i]) * (1 - 1e-12)) {
          ++violations["maximal>=|f|"];
          break;
        }
    }
    const Functional a = Functional::reduced_poincare(modulus(f), 1 + (s / 2) % 3);
    const ProbeSuite suite = make_probe_suite(dyadic_tops(n, m, m / 2), 4, static_cast<std::uint64_t>(s),
                                              FamilyStrategy::dyadic_packing);
    double prev = 0;
    for (double r : {1.0, 1.5, 2.0, 4.0}) {
      const double d = estimate_condition(a, ConditionKind::d_r, r, nullptr, suite).measured_constant;
      if (d < prev * (1 - 1e-12)) ++violations["D_r<=D_s"];
      prev = d;
    }
    const bool semigroup = (s / 2) % 2 == 1;
    const OscillationFamily F = semigroup ? make_family(FamilyKind::semigroup, {1, kInfinity}, n == 1 ? op1 : op2)
                                          : make_family(FamilyKind::classical_average, {1, kInfinity});
    const auto sharp = sharp_maximal(F, to_complex(f), {1, 2, 4});
    bool mono = true;
    for (std::size_t k = 1; k < sharp.size(); ++k)
      for (std::size_t i = 0; i < f.size(); ++i) mono = mono && sharp[k][i] >= sharp[k - 1][i] * (1 - 1e-12);
    if (!mono) ++violations["sharp-p"];
  }
  Outcome o;
  o.detail = std::to_string(fields) + " fields per property; violations:";
  for (const auto& [name, v] : violations) {
    o.detail += " " + name + "=" + std::to_string(v);
    o.pass = o.pass && v == 0;
  }
  return o;
}

// 2. Semigroup identities at m = 256 in 1-D and 2-D.
Outcome semigroup_identities() {
  CoefficientMatrix aniso;
  aniso << 1.5, 0.4, 0.4, 0.8;
  CoefficientMatrix R;
  R << 0.3, -0.7, 0.5, 0.9;
  const CoefficientMatrix complex = CoefficientMatrix::Identity() + Complex(0, 0.3) * R;
  auto sinusoidal = [](std::array<double, 2> x) -> CoefficientMatrix {
    return CoefficientMatrix::Identity() * Complex(1.25 + 0.75 * std::sin(2 * kPi * x[0]), 0);
  };
  struct Case {
    std::string name;
    EllipticOperator op;
  };
  std::vector<Case> cases{{"1d-identity", EllipticOperator::laplacian(1, 256)},
                          {"1d-real-variable", EllipticOperator::from_function(1, 256, sinusoidal)},
                          {"1d-complex", EllipticOperator::constant(1, 256, complex)},
                          {"2d-anisotropic", EllipticOperator::constant(2, 256, aniso)},
                          {"2d-complex", EllipticOperator::constant(2, 256, complex)}};
  double cons = 0, law = 0, us = 0, mult = 0;
  for (const Case& c : cases) {
    const int n = c.op.dimension(), m = c.op.resolution();
    const ComplexField one = ComplexField::constant(n, m, 1.0);
    const ComplexField f = oracle::random_complex(n, m, 23);
    cons = std::max(cons, rel_sup(c.op.semigroup(0.01, one), one));
    for (auto [t1, t2] : {std::pair{0.01, 0.02}, std::pair{1e-4, 3e-3}})
      law = std::max(law, rel_sup(c.op.semigroup(t1, c.op.semigroup(t2, f)), c.op.semigroup(t1 + t2, f)));
    const ComplexField smooth = ComplexField::sample(n, m, [&](auto x) {
      const double y = n == 2 ? x[1] : 0.0;
      const double dx = std::sin(kPi * (x[0] - 0.5)), dy = n == 2 ? std::sin(kPi * (y - 0.5)) : 0.0;
      return Complex(std::cos(2 * kPi * (2 * x[0] + y)) + std::exp(-4 * (dx * dx + dy * dy)), 0.25 * std::sin(2 * kPi * y));
    });
    for (double s : {0.001, 0.005}) {
      const ComplexField u = u_s_apply(c.op, s, 1, smooth);
      us = std::max(us, rel_sup(Complex(s, 0) * c.op.generator(u), smooth - c.op.semigroup(s, smooth)));
    }
    if (!c.op.constant_coefficients()) continue;
    const CoefficientMatrix& a = c.name == "2d-anisotropic" ? aniso : (c.name == "1d-identity" ? CoefficientMatrix(CoefficientMatrix::Identity()) : complex);
    const double t = 0.002;
    if (n == 1) {
      const auto fh = oracle::dft(f), uh = oracle::dft(c.op.semigroup(t, f));
      double err = 0, scale = 0;
      for (int k = 0; k < m; ++k) {
        const double fr = k <= m / 2 ? k : k - m;
        err = std::max(err, std::abs(uh[k] - std::exp(-t * 4 * kPi * kPi * a(0, 0) * fr * fr) * fh[k]));
        scale = std::max(scale, std::abs(fh[k]));
      }
      mult = std::max(mult, err / scale);
    } else {
      for (auto [k0, k1] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{3, -2}, std::pair{7, 5}, std::pair{-20, 11}}) {
        const ComplexField e = ComplexField::sample(2, m, [&](auto x) { return std::polar(1.0, 2 * kPi * (k0 * x[0] + k1 * x[1])); });
        const Complex sym = 4 * kPi * kPi * (a(0, 0) * double(k0 * k0) + (a(0, 1) + a(1, 0)) * double(k0 * k1) + a(1, 1) * double(k1 * k1));
        const ComplexField u = c.op.semigroup(t, e);
        for (std::size_t i = 0; i < u.size(); ++i) mult = std::max(mult, std::abs(u[i] - std::exp(-t * sym) * e[i]));
      }
    }
  }
  Outcome o;
  o.pass = cons <= 1e-8 && law <= 1e-8 && us <= 1e-6 && mult <= 1e-10;
  o.detail = "e^{-tL}1=1 err " + fmt(cons) + ", semigroup law " + fmt(law) + ", sL U_s f = f - e^{-sL}f " + fmt(us) +
             ", Fourier multipliers " + fmt(mult) + " over " + std::to_string(cases.size()) + " operators";
  return o;
}

// 3. Off-diagonal decay of the heat semigroup and exact locality of averaging families.
Outcome offdiagonal_decay() {
  const ExperimentConfig cfg = load("heat-offdiag.json");
  const Experiment e = prepare(cfg, true, false);
  Outcome o;
  std::vector<double> cs;
  for (const Rung& r : e.rungs) {
    const OffDiagonalProfile& p = *r.family.profile();
    const bool ok = p.fit.valid && p.fit.c > 0 && p.fit.residual < 0.1 && p.fit.k_first == 3 && p.fit.k_last >= 5;
    bool decreasing = true;
    for (int k = 4; k <= p.fit.k_last; ++k) decreasing = decreasing && p.alpha_at(k) < p.alpha_at(k - 1);
    o.pass = o.pass && ok && decreasing;
    cs.push_back(p.fit.c);
    o.detail += "m=" + std::to_string(r.resolution) + " c=" + fmt(p.fit.c) + " residual=" + fmt(p.fit.residual) + " k=" +
                std::to_string(p.fit.k_first) + ".." + std::to_string(p.fit.k_last) + (decreasing ? "" : " (not decreasing)") + "; ";
  }
  o.pass = o.pass && ladder_stable(cs, 2);
  double far = 0;
  for (FamilyKind kind : {FamilyKind::classical_average, FamilyKind::extended_average})
    for (int m : {256, 512}) {
      ProfileSpec spec;
      spec.sidelength = 1.0 / 64;
      const auto p = measure_offdiagonal(make_family(kind, {1, kInfinity}), default_probe_patterns(1, m, 2, 3),
                                         profile_cubes(1, m, spec, 3));
      for (int k = 3; k < static_cast<int>(p.alpha.size()); ++k) far = std::max(far, p.alpha_at(k));
    }
  o.pass = o.pass && far == 0;
  o.detail += "averaging far-field max alpha = " + fmt(far);
  return o;
}

const Experiment& classical_experiment() {
  static const Experiment e = prepare(load("classical-jn.json"));
  return e;
}

// 4. Classical John-Nirenberg on the log-distance field.
Outcome classical_jn() {
  const auto start = std::chrono::steady_clock::now();
  const Experiment& e = classical_experiment();
  const VerifyReport weak = verify_weak(e);
  const VerifyReport ex = verify_exponential(e);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<double> wc, ec;
  double mismatch = 0;
  for (std::size_t k = 0; k < e.rungs.size(); ++k) {
    wc.push_back(weak.per_resolution[k].constant);
    ec.push_back(ex.per_resolution[k].constant);
    const Rung& r = e.rungs[k];
    for (std::size_t i = 0; i < r.cubes.size(); ++i) {
      const Cube& c = r.cubes[i];
      const auto v = oracle::moduli(r.family.apply_b(r.f, c), c);
      const double w = oracle::weak_norm(v, e.config.q), x = oracle::exp_norm(v);
      mismatch = std::max(mismatch, std::abs(weak.per_resolution[k].rows[i].numerator - w) / std::max(w, 1e-300));
      mismatch = std::max(mismatch, std::abs(ex.per_resolution[k].rows[i].numerator - x) / std::max(x, 1e-300));
    }
  }
  Outcome o;
  o.pass = ladder_stable(wc, 2) && ladder_stable(ec, 2) && mismatch <= 1e-9 && seconds < 60;
  o.detail = "weak q=2 constants";
  for (double c : wc) o.detail += " " + fmt(c);
  o.detail += "; exp-L constants";
  for (double c : ec) o.detail += " " + fmt(c);
  o.detail += "; brute-force norm mismatch " + fmt(mismatch) + "; " + fmt(seconds) + " s";
  return o;
}

// 5. Good-lambda inequality on the configuration of criterion 4.
Outcome good_lambda() {
  const Experiment& e = classical_experiment();
  const GoodLambdaSpec& g = e.config.good_lambda;
  const GoodLambdaReport r = verify_good_lambda(e, g.s, g.lambda, 20);
  bool finite = true, counts = true;
  for (const GoodLambdaRung& gr : r.per_resolution) {
    finite = finite && std::isfinite(gr.c);
    std::map<std::string, int> per_cube;
    for (const GoodLambdaRow& row : gr.rows) ++per_cube[row.cube.describe()];
    for (const auto& [c, k] : per_cube) counts = counts && k == 20;
  }
  // Independent recomputation of every Whitney decomposition on the coarsest rung.
  const Rung& rung = e.rungs.front();
  const double p0 = e.config.family.exponents.p0;
  std::size_t checked = 0;
  bool facts_ok = true;
  for (const GoodLambdaRow& row : r.per_resolution.front().rows) {
    if (!row.whitney_branch || row.whitney_cubes == 0) continue;
    const ComplexField b = rung.family.apply_b(rung.f, row.cube);
    const ComplexField b2 = rung.family.apply_b(b, row.cube);
    const Cube q2 = dilated(row.cube, 2);
    const RealField G = RealField::sample(1, rung.resolution, [&, i = std::size_t{0}](auto) mutable {
      const std::size_t j = i++;
      return q2.contains_cell(j) ? std::abs(b2[j]) : 0.0;
    });
    const RealField MG = maximal_function(G, p0);
    const CellSet omega = CellSet::where(MG, [&](double v) { return v > row.t; });
    const auto cubes = whitney_decompose(omega, torus_grid_adapted_to(row.cube));
    const auto facts = oracle::whitney_facts(omega, cubes);
    facts_ok = facts_ok && facts.disjoint && facts.covers && facts.four_inside && facts.ten_meets &&
               cubes.size() == row.whitney_cubes;
    ++checked;
  }
  Outcome o;
  o.pass = finite && counts && r.trivial_branch && r.whitney_branch && r.whitney_invariants && facts_ok && checked > 0;
  o.detail = "c per rung";
  for (const GoodLambdaRung& gr : r.per_resolution) o.detail += " " + fmt(gr.c);
  o.detail += "; trivial branch " + std::string(r.trivial_branch ? "yes" : "no") + ", Whitney branch " +
              (r.whitney_branch ? "yes" : "no") + "; " + std::to_string(r.decompositions) +
              " decompositions, invariants " + (r.whitney_invariants ? "hold" : "fail") + "; " + std::to_string(checked) +
              " recomputed by enumeration " + (facts_ok ? "agree" : "disagree");
  return o;
}

// 6. BMO_L^p equivalence for the 1-D heat semigroup.
Outcome bmo_equivalence() {
  Outcome o;
  for (const char* name : {"heat-bmo.json", "heat-bmo-variable.json"}) {
    const ExperimentConfig cfg = load(name);
    const Experiment e = prepare(cfg, true, false);
    const Ellipticity el = e.rungs.front().family.op()->ellipticity();
    const BmoReport r = verify_bmo_equivalence(e, cfg.bmo.ps);
    bool finite = r.per_resolution.front().rows.size() == 5;
    double worst = 1, drift = 1;
    for (std::size_t i = 0; i < r.per_resolution.front().rows.size(); ++i) {
      std::vector<double> ratios;
      for (const BmoRung& br : r.per_resolution) {
        finite = finite && std::isfinite(br.rows[i].ratio);
        worst = std::max(worst, br.rows[i].ratio);
        ratios.push_back(br.rows[i].ratio);
      }
      drift = std::max(drift, *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end()));
    }
    const bool bounds = el.lambda >= 0.5 - 1e-12 && el.Lambda <= 2 + 1e-12;
    o.pass = o.pass && r.passed && r.monotone && finite && drift <= 2 && bounds;
    o.detail += cfg.name + ": max ratio " + fmt(worst) + ", ladder drift " + fmt(drift) + ", monotone " +
                (r.monotone ? "yes" : "no") + ", lambda " + fmt(el.lambda) + " Lambda " + fmt(el.Lambda) + "; ";
  }
  return o;
}

// 7. Expanded Poincare machinery in two dimensions.
Outcome expanded_poincare() {
  const ExperimentConfig cfg = load("epi-2d.json");
  const Experiment e = prepare(cfg);
  const VerifyReport weak = verify_weak(e);
  Outcome o;
  o.pass = weak.passed;
  for (std::size_t k = 0; k < e.rungs.size(); ++k) {
    const ConditionReport& c = *weak.per_resolution[k].condition;
    const HypothesisReport& h = *e.rungs[k].hypothesis;
    const double lemma = safe_ratio(h.higher_constant, h.k0_constant);
    o.pass = o.pass && c.kind == ConditionKind::pair_d_q && c.family_count == 200 && std::isfinite(c.measured_constant) &&
             lemma <= 8;
    o.detail += "m=" + std::to_string(e.rungs[k].resolution) + " pair-D_q " + fmt(c.measured_constant) + " (" +
                std::to_string(c.probes) + " families), lemma ratio " + fmt(lemma) + "; ";
  }
  return o;
}

bool same_report(const VerifyReport& a, const VerifyReport& b) {
  if (a.per_resolution.size() != b.per_resolution.size()) return false;
  for (std::size_t k = 0; k < a.per_resolution.size(); ++k) {
    const RungReport &x = a.per_resolution[k], &y = b.per_resolution[k];
    if (x.constant != y.constant || x.rows.size() != y.rows.size()) return false;
    if (x.condition && y.condition && x.condition->measured_constant != y.condition->measured_constant) return false;
    for (std::size_t i = 0; i < x.rows.size(); ++i)
      if (x.rows[i].numerator != y.rows[i].numerator || x.rows[i].denominator != y.rows[i].denominator) return false;
  }
  return true;
}

// 8. Weighted path.
Outcome weighted_path() {
  Outcome o;
  const ExperimentConfig uniform = load("weighted-power.json", {"weight={\"kind\":\"uniform\"}", "ladder=[256]"});
  const ExperimentConfig plain = load("weighted-power.json", {"weight=null", "variant=tilde", "ladder=[256]"});
  const Experiment eu = prepare(uniform), ep = prepare(plain);
  const bool bitwise = same_report(verify_weak(eu), verify_weak(ep)) &&
                       same_report(verify_strong(eu, uniform.r), verify_strong(ep, plain.r)) &&
                       same_report(verify_exponential(eu), verify_exponential(ep));
  o.detail = std::string("w=1 reproduces unweighted bitwise: ") + (bitwise ? "yes" : "no") + "; ";
  const ExperimentConfig cfg = load("weighted-power.json");
  const Experiment e = prepare(cfg);
  bool stable = true;
  for (const VerifyReport& r : {verify_weak(e), verify_strong(e, cfg.r), verify_exponential(e)}) {
    std::vector<double> cs;
    for (const RungReport& rr : r.per_resolution) cs.push_back(rr.constant);
    stable = stable && ladder_stable(cs, 2) && r.passed;
    o.detail += r.harness + " " + fmt(*std::min_element(cs.begin(), cs.end())) + ".." +
                fmt(*std::max_element(cs.begin(), cs.end())) + "; ";
  }
  std::size_t checked = 0, violations = 0;
  for (const Rung& r : e.rungs) {
    const RhSetReport rh = rh_set_check(r, cfg.rh_p, cfg.seed);
    checked += rh.checked;
    violations += rh.violations;
  }
  o.detail += "RH sets " + std::to_string(checked) + " checked, " + std::to_string(violations) + " violations";
  o.pass = bitwise && stable && checked > 0 && violations == 0;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Determinism across runs and thread counts.
Outcome determinism() {
  Outcome o;
  std::size_t configs = 0, files = 0;
  const fs::path root = fs::temp_directory_path() / "oscillab-acceptance";
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(fs::path(OSCILLAB_SOURCE_DIR) / "configs"))
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const fs::path& p : paths) {
    std::map<std::string, std::string> bytes[2];
    for (int run = 0; run < 2; ++run) {
      cli::RunOptions opts;
      opts.config = p.string();
      opts.out = (root / (p.stem().string() + "-" + std::to_string(run))).string();
      opts.threads = run == 0 ? 1 : 4;
      fs::remove_all(opts.out);
      const cli::RunManifest m = cli::run_experiment(opts);
      for (const cli::Artifact& a : m.artifacts) bytes[run][a.name] = slurp(fs::path(opts.out) / a.name);
    }
    const bool same = bytes[0] == bytes[1] && !bytes[0].empty();
    if (!same) o.detail += p.filename().string() + " differs; ";
    o.pass = o.pass && same;
    ++configs;
    files += bytes[0].size();
  }
  set_thread_count(1);
  fs::remove_all(root);
  o.detail += std::to_string(configs) + " configs, " + std::to_string(files) +
              " artifacts compared byte for byte (threads 1 vs 4)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact inequalities", exact_inequalities},
      {"semigroup identities", semigroup_identities},
      {"off-diagonal decay", offdiagonal_decay},
      {"classical John-Nirenberg", classical_jn},
      {"good-lambda inequality", good_lambda},
      {"BMO_L^p equivalence", bmo_equivalence},
      {"expanded Poincare", expanded_poincare},
      {"weighted path", weighted_path},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << ", "
              << fmt(sec) << " s): " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
