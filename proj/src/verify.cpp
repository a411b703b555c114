#include "oscillab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "oscillab/field_io.hpp"
#include "oscillab/norms.hpp"

namespace oscillab {

namespace {

constexpr std::uint64_t kSampleTag = 0x53414d50;
constexpr std::uint64_t kPatternTag = 0x50415454;
constexpr std::uint64_t kProfileTag = 0x50524f46;
constexpr std::uint64_t kWeightTag = 0x57474854;
constexpr std::uint64_t kConditionTag = 0x434f4e44;

std::uint64_t rung_seed(std::uint64_t seed, std::uint64_t tag, int resolution) {
  return hash_combine(hash_combine(seed, tag), static_cast<std::uint64_t>(resolution));
}

RealField modulus_field(const ComplexField& f) {
  return RealField(f.dimension(), f.resolution(), f.modulus().matrix());
}

std::vector<Cube> dyadic_level(int dimension, int m, int side) {
  std::vector<Cube> out;
  const int per = m / side;
  for (int j = 0; j < (dimension == 1 ? 1 : per); ++j)
    for (int i = 0; i < per; ++i) out.emplace_back(dimension, m, std::array<int, 2>{i * side, j * side}, side);
  return out;
}

bool dyadic_aligned(const Cube& q) {
  const int s = q.side_cells();
  if (!is_power_of_two(s)) return false;
  for (int a = 0; a < q.dimension(); ++a)
    if (q.anchor_cell(a) % s != 0) return false;
  return true;
}

std::string rung_label(const Cube& q, int m) { return "m=" + std::to_string(m) + " cube " + q.describe(); }

struct RungMax {
  double value = 0;
  Cube cube;
  void update(double v, const Cube& q) {
    if (v > value || (std::isnan(v) && !std::isnan(value))) {
      value = v;
      cube = q;
    }
  }
};

void finish(VerifyReport& r) {
  std::vector<double> consts;
  r.conclusion_constant = 0;
  r.hypothesis_constant = 0;
  for (const RungReport& rr : r.per_resolution) {
    consts.push_back(rr.constant);
    r.conclusion_constant = std::max(r.conclusion_constant, rr.constant);
    r.hypothesis_constant = std::max(r.hypothesis_constant, rr.hypothesis_constant);
  }
  if (!r.failure.empty()) {
    r.passed = false;
    return;
  }
  for (const RungReport& rr : r.per_resolution)
    if (!std::isfinite(rr.constant)) {
      r.failure = "non-finite constant at " + rung_label(rr.worst, rr.resolution);
      r.passed = false;
      return;
    }
  if (!ladder_stable(consts)) {
    const auto it = std::max_element(r.per_resolution.begin(), r.per_resolution.end(),
                                     [](const RungReport& a, const RungReport& b) { return a.constant < b.constant; });
    r.failure = "constants vary by more than a factor 2 across the ladder; largest at " +
                rung_label(it->worst, it->resolution);
    r.passed = false;
    return;
  }
  r.passed = true;
}

}  // namespace

double safe_ratio(double numerator, double denominator) {
  if (numerator == 0) return 0;
  if (denominator == 0) return kInfinity;
  return numerator / denominator;
}

bool ladder_stable(const std::vector<double>& values, double slack) {
  if (values.empty()) return false;
  double lo = kInfinity, hi = 0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0) return false;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == 0) return true;
  if (lo == 0) return false;
  return hi <= slack * lo;
}

std::vector<Cube> sample_cubes(int dimension, int m, const SampleSpec& spec, std::uint64_t seed) {
  std::vector<Cube> out;
  for (int side = m; side >= std::max(spec.min_side_cells, 1); side /= 2) {
    auto level = dyadic_level(dimension, m, side);
    out.insert(out.end(), level.begin(), level.end());
  }
  if (out.empty()) out.push_back(Cube::full(dimension, m));
  std::vector<int> sides;
  for (int side = 1; side <= m / 2; side *= 2)
    if (side >= spec.min_side_cells) sides.push_back(side);
  if (sides.empty()) sides.push_back(std::min(std::max(spec.min_side_cells, 1), m));
  CounterRng rng(seed, 0x6f6666);
  for (int k = 0; k < spec.off_dyadic; ++k) {
    const int side = sides[rng.below(sides.size())];
    std::array<int, 2> anchor{static_cast<int>(rng.below(m)), 0};
    if (dimension == 2) anchor[1] = static_cast<int>(rng.below(m));
    out.emplace_back(dimension, m, anchor, side);
  }
  if (spec.max_cubes > 0 && out.size() > static_cast<std::size_t>(spec.max_cubes)) {
    std::vector<Cube> kept;
    for (int i = 0; i < spec.max_cubes; ++i) kept.push_back(out[static_cast<std::size_t>(i) * out.size() / spec.max_cubes]);
    out = std::move(kept);
  }
  return out;
}

std::vector<Cube> profile_cubes(int dimension, int m, const ProfileSpec& spec, std::uint64_t seed) {
  const int side = std::max(1, static_cast<int>(std::lround(spec.sidelength * m)));
  if (!is_power_of_two(side) || side > m) throw ConfigError("profile.sidelength", "must be a power-of-two multiple of the cell width");
  std::vector<Cube> out{Cube(dimension, m, {0, 0}, side)};
  CounterRng rng(seed, 0x70726f66);
  for (int k = 1; k < spec.cubes; ++k) {
    std::array<int, 2> anchor{static_cast<int>(rng.below(m)), 0};
    if (dimension == 2) anchor[1] = static_cast<int>(rng.below(m));
    out.emplace_back(dimension, m, anchor, side);
  }
  return out;
}

std::vector<Cube> condition_tops(const std::vector<Cube>& cubes, int max_tops) {
  std::vector<Cube> tops;
  for (const Cube& q : cubes)
    if (dyadic_aligned(q) && q.has_children()) tops.push_back(q);
  if (max_tops > 0 && tops.size() > static_cast<std::size_t>(max_tops)) {
    std::vector<Cube> kept;
    for (int i = 0; i < max_tops; ++i) kept.push_back(tops[static_cast<std::size_t>(i) * tops.size() / max_tops]);
    tops = std::move(kept);
  }
  if (tops.empty() && !cubes.empty()) tops.push_back(cubes.front());
  return tops;
}

void for_each_oscillation(const OscillationFamily& F, const ComplexField& f, const std::vector<Cube>& cubes,
                          const std::function<void(std::size_t, const ComplexField&)>& fn) {
  if (F.side_determined()) {
    std::vector<int> sides;
    for (const Cube& q : cubes) sides.push_back(q.side_cells());
    std::sort(sides.begin(), sides.end());
    sides.erase(std::unique(sides.begin(), sides.end()), sides.end());
    std::vector<ComplexField> fields(sides.size());
    parallel_for(sides.size(), [&](std::size_t i) { fields[i] = F.apply_b_side(f, sides[i]); });
    parallel_for(cubes.size(), [&](std::size_t i) {
      const auto it = std::lower_bound(sides.begin(), sides.end(), cubes[i].side_cells());
      fn(i, fields[static_cast<std::size_t>(it - sides.begin())]);
    });
    return;
  }
  parallel_for(cubes.size(), [&](std::size_t i) { fn(i, F.apply_b(f, cubes[i])); });
}

namespace {

std::vector<std::pair<Cube, double>> read_table(const std::string& file, int dimension, int m, const std::string& path) {
  std::ifstream in(file);
  if (!in) throw ConfigError(path, "cannot open custom table '" + file + "'");
  std::vector<std::pair<Cube, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    const std::string where = path + " line " + std::to_string(lineno);
    if (comma == std::string::npos) throw ConfigError(where, "expected '<cube json>,<value>'");
    const Json cube = Json::parse(line.substr(0, comma), nullptr, false);
    if (cube.is_discarded() || !cube.is_object() || !cube.contains("anchor") || !cube.contains("side"))
      throw ConfigError(where, "cube must be a JSON object with anchor and side (in cells)");
    std::array<int, 2> anchor{0, 0};
    for (std::size_t i = 0; i < cube["anchor"].size() && i < 2; ++i) anchor[i] = cube["anchor"][i].get<int>();
    double value = 0;
    try {
      value = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError(where, "value is not a number");
    }
    rows.emplace_back(Cube(dimension, m, anchor, cube["side"].get<int>()), value);
  }
  return rows;
}

RealField h_field(const Json& spec, const ComplexField& f, const std::string& path) {
  const Json h = spec.value("h", Json("gradient"));
  if (h.is_string() && h.get<std::string>() == "gradient") return gradient_modulus(f);
  return modulus_field(build_field(h, f.dimension(), f.resolution(), 0, path + ".h"));
}

}  // namespace

Functional build_functional(const Json& spec, const ComplexField& f, const OscillationFamily& F,
                            std::shared_ptr<const Weight> weight, const std::vector<Cube>& cubes,
                            const std::string& path) {
  if (!spec.is_object()) throw ConfigError(path, "expected a functional specification object");
  const std::string kind = spec.value("kind", "");
  const double p0 = F.exponents().p0;
  auto number = [&](const char* key, double fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec[key].is_number()) throw ConfigError(path + "." + key, "expected a number");
    return spec[key].get<double>();
  };
  auto use_weight = [&]() -> std::shared_ptr<const Weight> {
    if (!spec.value("weighted", false)) return nullptr;
    if (!weight) throw ConfigError(path + ".weighted", "weighted functional needs a weight");
    return weight;
  };
  try {
    if (kind == "constant") {
      if (spec.contains("c") && spec["c"].is_string() && spec["c"].get<std::string>() == "measured") {
        std::vector<double> osc(cubes.size());
        for_each_oscillation(F, f, cubes, [&](std::size_t i, const ComplexField& b) {
          osc[i] = lp_average(gather(b, cubes[i]), p0);
        });
        double c = 0;
        for (double v : osc) c = std::max(c, v);
        return Functional::constant(c);
      }
      return Functional::constant(number("c", 1.0));
    }
    if (kind == "bmo_lipschitz") return Functional::bmo_lipschitz(number("alpha", 0.0));
    if (kind == "fractional") {
      if (!spec.contains("u")) throw ConfigError(path + ".u", "fractional functional needs a weight u");
      return Functional::fractional(number("alpha", 1.0), number("s", 1.0),
                                    build_weight(spec["u"], f.dimension(), f.resolution(), path + ".u"));
    }
    if (kind == "reduced_poincare")
      return Functional::reduced_poincare(std::make_shared<const RealField>(h_field(spec, f, path)), number("s", 1.0),
                                          use_weight());
    if (kind == "expanded_poincare") {
      if (!spec.contains("gamma")) throw ConfigError(path + ".gamma", "expanded functional needs a gamma sequence");
      return Functional::expanded_poincare(std::make_shared<const RealField>(h_field(spec, f, path)), number("s", 1.0),
                                           build_sequence(spec["gamma"], path + ".gamma"), use_weight());
    }
    if (kind == "measured_oscillation") {
      auto field = std::make_shared<const ComplexField>(f);
      auto family = std::make_shared<const OscillationFamily>(F);
      auto by_side = std::make_shared<std::map<int, ComplexField>>();
      if (F.side_determined())
        for (int side = 1; side <= f.resolution(); side *= 2) (*by_side)[side] = F.apply_b_side(f, side);
      return Functional::measured("oscillation", [field, family, by_side, p0](const Cube& q) {
        const auto it = by_side->find(q.side_cells());
        if (it != by_side->end()) return lp_average(gather(it->second, q), p0);
        return lp_average(gather(family->apply_b(*field, q), q), p0);
      });
    }
    if (kind == "custom_table")
      return Functional::custom_table(read_table(spec.value("path", ""), f.dimension(), f.resolution(), path + ".path"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".kind", "unknown functional kind '" + kind + "'");
}

Rung build_rung(const ExperimentConfig& cfg, int m, bool weighted) {
  const int n = cfg.dimension;
  Rung r;
  r.resolution = m;
  r.f = build_field(cfg.field, n, m, cfg.seed);
  if (weighted) r.weight = build_weight(cfg.weight, n, m);
  std::shared_ptr<const EllipticOperator> op;
  if (cfg.family.kind == FamilyKind::semigroup) op = build_operator(cfg.family.op, n, m);
  OscillationFamily F = make_family(cfg.family.kind, cfg.family.exponents, op, cfg.family.N);
  r.cubes = sample_cubes(n, m, cfg.sample, rung_seed(cfg.seed, kSampleTag, 0));
  r.patterns = default_probe_patterns(n, m, cfg.profile.patterns, rung_seed(cfg.seed, kPatternTag, m));
  const auto pc = profile_cubes(n, m, cfg.profile, rung_seed(cfg.seed, kProfileTag, 0));
  ProfileOptions po;
  po.fit_first = cfg.profile.fit_first;
  po.fit_last = cfg.profile.fit_last;
  r.family = F.with_profile(measure_offdiagonal(F, r.patterns, pc, po));

  std::vector<std::pair<Cube, Cube>> pairs;
  int tops = 0;
  for (const Cube& q : r.cubes) {
    if (q.is_full() || !q.has_children() || !dyadic_aligned(q)) continue;
    pairs.emplace_back(q, q);
    std::vector<Cube> level{q};
    for (int g = 0; g < 2; ++g) {
      std::vector<Cube> next;
      for (const Cube& c : level)
        if (c.has_children())
          for (const Cube& ch : c.children()) next.push_back(ch);
      for (std::size_t i = 0; i < next.size() && i < 4; ++i) pairs.emplace_back(next[i], q);
      level = std::move(next);
    }
    if (++tops == 3) break;
  }
  std::vector<ComplexField> probes(r.patterns.begin(), r.patterns.begin() + std::min<std::size_t>(2, r.patterns.size()));
  r.audit = audit_family(r.family, probes, pairs);

  if (r.weight) {
    std::vector<double> ps{1, 2};
    if (cfg.rh_p != 1 && cfg.rh_p != 2) ps.push_back(cfg.rh_p);
    r.weight_report = weight_report(*r.weight, ps, r.cubes, rung_seed(cfg.seed, kWeightTag, m));
  }
  r.theta = cfg.theta > 0 ? cfg.theta : (r.weight_report ? r.weight_report->theta : 1.0);
  r.a = std::make_shared<const Functional>(build_functional(cfg.functional, r.f, r.family, r.weight, r.cubes));
  return r;
}

Experiment prepare(const ExperimentConfig& cfg, bool weighted, bool hypotheses) {
  Experiment e;
  e.config = cfg;
  for (int m : cfg.ladder) {
    Rung r = build_rung(cfg, m, weighted);
    if (hypotheses) {
      if (r.family.side_determined()) {
        const ProbeSuite suite = make_probe_suite(condition_tops(r.cubes, cfg.condition.max_tops), cfg.condition.families,
                                                  rung_seed(cfg.seed, kConditionTag, m), cfg.condition.strategy, nullptr,
                                                  cfg.condition.pair_generations);
        r.dp0 = estimate_condition(*r.a, ConditionKind::d_r, cfg.family.exponents.p0, nullptr, suite, nullptr,
                                   cfg.condition.cap);
      }
      r.hypothesis = check_hypothesis(r.family, r.f, *r.a, cfg.family.exponents.p0, r.cubes, cfg.hypothesis_kmax,
                                      r.dp0 ? &*r.dp0 : nullptr);
    }
    e.rungs.push_back(std::move(r));
  }
  return e;
}

HypothesisReport check_hypothesis(const OscillationFamily& F, const ComplexField& f, const Functional& a, double p0,
                                  const std::vector<Cube>& cubes, int k_max, const ConditionReport* dp0) {
  struct PerCube {
    double worst = 0, k0 = 0, k1 = 0, higher = 0, num = 0, den = 0;
    int worst_k = 0, kmax = 0;
  };
  std::vector<PerCube> per(cubes.size());
  for_each_oscillation(F, f, cubes, [&](std::size_t i, const ComplexField& b) {
    const Cube& q = cubes[i];
    std::vector<double> powered(b.size());
    for (std::size_t c = 0; c < b.size(); ++c) powered[c] = std::pow(magnitude(b[c]), p0);
    const BoxTable table(b.dimension(), b.resolution(), powered);
    const int sat = saturation_index(q);
    const int K = k_max < 0 ? sat : std::min(k_max, sat);
    PerCube& pc = per[i];
    pc.kmax = K;
    for (int k = 0; k <= K; ++k) {
      const Cube c = k < sat ? dilated(q, std::ldexp(1.0, k)) : Cube::full(q.dimension(), q.resolution());
      const double num = std::pow(static_cast<double>(table.sum(c) / static_cast<long double>(c.cell_count())), 1.0 / p0);
      const double den = a(c);
      const double ratio = safe_ratio(num, den);
      if (k == 0) pc.k0 = ratio;
      if (k == 1) pc.k1 = ratio;
      if (k >= 1) pc.higher = std::max(pc.higher, ratio);
      if (k == 0 || ratio > pc.worst) {
        pc.worst = ratio;
        pc.worst_k = k;
        pc.num = num;
        pc.den = den;
      }
    }
  });
  HypothesisReport r;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const PerCube& pc = per[i];
    r.rows.push_back({cubes[i], pc.num, pc.den, pc.worst});
    if (i == 0 || pc.worst > r.constant) {
      r.constant = pc.worst;
      r.worst = cubes[i];
      r.worst_k = pc.worst_k;
    }
    r.k0_constant = std::max(r.k0_constant, pc.k0);
    r.k1_constant = std::max(r.k1_constant, pc.k1);
    r.higher_constant = std::max(r.higher_constant, pc.higher);
    r.k_max = std::max(r.k_max, pc.kmax);
  }
  if (dp0 && F.side_determined()) {
    r.side_reduction = std::isfinite(dp0->measured_constant);
    r.dp0_constant = dp0->measured_constant;
    r.side_reduction_bound = r.k0_constant * dp0->measured_constant;
  }
  return r;
}

Denominator make_denominator(const Rung& rung, Variant variant, double q) {
  Denominator d;
  const auto a = rung.a;
  if (!rung.family.profile()) throw ParameterError("family has no off-diagonal profile");
  const OffDiagonalProfile& profile = *rung.family.profile();
  switch (variant) {
    case Variant::classical:
    case Variant::alternative_bis:
      d.value = [a](const Cube& c) { return (*a)(dilated(c, 2)); };
      d.condition_functional = a;
      d.description = "a(2Q)";
      break;
    case Variant::tilde:
    case Variant::weighted: {
      auto t = std::make_shared<const Functional>(tilde_expand(*a, profile));
      d.value = [t](const Cube& c) { return (*t)(dilated(c, 2)); };
      d.condition_functional = t;
      d.description = "a~(2Q)";
      break;
    }
    case Variant::pair: {
      auto t = std::make_shared<const Functional>(tilde_expand(*a, profile));
      if (!t->expanded()) throw ConfigError("variant", "the pair variant needs an expanded functional");
      auto bar = std::make_shared<const Functional>(bar_expand(*t, q, rung.theta, rung.f.dimension()));
      d.value = [bar](const Cube& c) { return (*bar)(dilated(c, 2)); };
      d.condition_functional = t;
      d.bar = bar;
      d.description = "a-bar(2Q)";
      break;
    }
    case Variant::alternative: {
      const Sequence eta = alternative_weights(profile);
      d.value = [a, eta](const Cube& c) { return expanded_sum(*a, eta, c); };
      d.condition_functional = a;
      d.description = "sum_k eta_k a(2^k Q)";
      break;
    }
  }
  return d;
}

ConditionReport condition_for(const Rung& rung, const ExperimentConfig& cfg, const Denominator& den, double r,
                              const Weight* mu) {
  const RealField modulus = modulus_field(rung.f);
  const ProbeSuite suite =
      make_probe_suite(condition_tops(rung.cubes, cfg.condition.max_tops), cfg.condition.families,
                       rung_seed(cfg.seed, kConditionTag, rung.resolution), cfg.condition.strategy, &modulus,
                       cfg.condition.pair_generations);
  return estimate_condition(*den.condition_functional, den.bar ? ConditionKind::pair_d_q : ConditionKind::d_r, r, mu,
                            suite, den.bar.get(), cfg.condition.cap);
}

namespace {

const HypothesisReport& rung_hypothesis(const Rung& r) {
  if (!r.hypothesis) throw ParameterError("experiment was prepared without hypothesis reports");
  return *r.hypothesis;
}

void note_hypothesis(RungReport& rr, const Rung& r) {
  const HypothesisReport& h = rung_hypothesis(r);
  rr.hypothesis_constant = h.constant;
  if (!std::isfinite(h.constant)) rr.warnings.push_back("hypothesis constant is not finite");
}

}  // namespace

VerifyReport verify_hypothesis(const Experiment& e) {
  VerifyReport rep;
  rep.harness = "hypothesis";
  rep.variant = "all-k";
  for (const Rung& r : e.rungs) {
    const HypothesisReport& h = rung_hypothesis(r);
    RungReport rr;
    rr.resolution = r.resolution;
    rr.hypothesis_constant = h.constant;
    rr.constant = h.constant;
    rr.worst = h.worst;
    rr.rows = h.rows;
    rr.diagnostics["k0_constant"] = h.k0_constant;
    rr.diagnostics["k1_constant"] = h.k1_constant;
    rr.diagnostics["higher_k_constant"] = h.higher_constant;
    rr.diagnostics["lemma_ratio"] = safe_ratio(h.higher_constant, h.k0_constant);
    rr.diagnostics["k_max"] = h.k_max;
    rr.diagnostics["worst_k"] = h.worst_k;
    if (h.side_reduction) {
      rr.diagnostics["dp0_constant"] = h.dp0_constant;
      rr.diagnostics["side_reduction_bound"] = h.side_reduction_bound;
    }
    rr.hypothesis = h;
    rep.per_resolution.push_back(std::move(rr));
  }
  finish(rep);
  return rep;
}

namespace {

VerifyReport norm_harness(const Experiment& e, const std::string& harness, double r_strong) {
  const ExperimentConfig& cfg = e.config;
  VerifyReport rep;
  rep.harness = harness;
  rep.variant = to_string(cfg.variant);
  const double q = cfg.q;
  for (const Rung& r : e.rungs) {
    RungReport rr;
    rr.resolution = r.resolution;
    note_hypothesis(rr, r);
    const Weight* mu = r.weight.get();
    const Denominator den = make_denominator(r, cfg.variant, q);
    rr.condition = condition_for(r, cfg, den, q, mu);
    rr.diagnostics["condition_constant"] = rr.condition->measured_constant;
    if (!rr.condition->passed) {
      rep.failure = "functional condition " + to_string(rr.condition->kind) + " not verified at m=" +
                    std::to_string(r.resolution) + " (worst cube " + rr.condition->worst.describe() + ")";
    }
    struct Out {
      CubeRow row;
      double shortcut = 0;
      double weak_ratio = 0;
      bool kolmogorov_ok = true;
    };
    std::vector<Out> out(r.cubes.size());
    const Functional& a = *r.a;
    for_each_oscillation(r.family, r.f, r.cubes, [&](std::size_t i, const ComplexField& b) {
      const Cube& c = r.cubes[i];
      const MeasuredSamples s = gather(b, c, mu);
      const double d = den.value(c);
      const double weak = weak_lq_norm(s, q);
      Out& o = out[i];
      if (harness == "strong") {
        const double strong = lp_average(s, r_strong);
        o.row = {c, strong, d, safe_ratio(strong, d)};
        o.weak_ratio = safe_ratio(weak, d);
        const KolmogorovPair kp = kolmogorov_check(s, r_strong, q);
        o.kolmogorov_ok = kp.lhs <= kp.rhs * (1 + 1e-12);
      } else {
        o.row = {c, weak, d, safe_ratio(weak, d)};
      }
      o.shortcut = safe_ratio(weak, a(c));
    });
    RungMax best;
    double shortcut = 0, weak_const = 0;
    std::size_t kolmogorov_violations = 0;
    for (const Out& o : out) {
      best.update(o.row.ratio, o.row.cube);
      shortcut = std::max(shortcut, o.shortcut);
      weak_const = std::max(weak_const, o.weak_ratio);
      if (!o.kolmogorov_ok) ++kolmogorov_violations;
      rr.rows.push_back(o.row);
    }
    rr.constant = best.value;
    rr.worst = best.cube;
    rr.diagnostics["doubling_shortcut"] = shortcut;
    if (harness == "strong") {
      rr.diagnostics["weak_constant"] = weak_const;
      rr.diagnostics["kolmogorov_factor"] = std::pow(q / (q - r_strong), 1 / r_strong);
      rr.diagnostics["kolmogorov_violations"] = static_cast<double>(kolmogorov_violations);
      if (kolmogorov_violations > 0 && rep.failure.empty())
        rep.failure = "Kolmogorov cross-check violated on " + std::to_string(kolmogorov_violations) + " cubes at m=" +
                      std::to_string(r.resolution);
    }
    rep.per_resolution.push_back(std::move(rr));
  }
  finish(rep);
  return rep;
}

}  // namespace

VerifyReport verify_weak(const Experiment& e) { return norm_harness(e, "weak", 0); }

VerifyReport verify_strong(const Experiment& e, double r) {
  const Exponents& ex = e.config.family.exponents;
  if (!(ex.p0 <= r && r < e.config.q)) throw ParameterError("strong harness needs p0 <= r < q");
  return norm_harness(e, "strong", r);
}

VerifyReport verify_exponential(const Experiment& e) {
  const ExperimentConfig& cfg = e.config;
  if (std::isfinite(cfg.family.exponents.q0)) throw DomainError("exponential harness needs q0 = inf");
  VerifyReport rep;
  rep.harness = "exponential";
  rep.variant = e.rungs.empty() || !e.rungs.front().weight ? "unweighted" : "weighted";
  for (const Rung& r : e.rungs) {
    RungReport rr;
    rr.resolution = r.resolution;
    note_hypothesis(rr, r);
    const ProbeSuite suite = make_probe_suite(condition_tops(r.cubes, cfg.condition.max_tops), cfg.condition.families,
                                              rung_seed(cfg.seed, kConditionTag, r.resolution), cfg.condition.strategy,
                                              nullptr, cfg.condition.pair_generations);
    rr.condition = estimate_condition(*r.a, ConditionKind::d_infinity, 1, nullptr, suite, nullptr, cfg.condition.cap);
    if (!rr.condition->passed)
      throw DomainError("exponential harness refused: functional is not D_infinity-flagged (measured constant " +
                        std::to_string(rr.condition->measured_constant) + ")");
    rr.diagnostics["condition_constant"] = rr.condition->measured_constant;
    const Weight* mu = r.weight.get();
    if (mu) {
      const double a2 = r.weight_report->ap.at(2);
      if (!std::isfinite(a2)) throw DomainError("exponential harness refused: weight has no finite A_infinity diagnostics");
      rr.diagnostics["weight_a2"] = a2;
    }
    const Sequence eta = exponential_weights(*r.family.profile());
    std::vector<CubeRow> rows(r.cubes.size());
    const Functional& a = *r.a;
    for_each_oscillation(r.family, r.f, r.cubes, [&](std::size_t i, const ComplexField& b) {
      const Cube& c = r.cubes[i];
      const double num = exp_luxemburg_norm(gather(b, c, mu));
      const double d = expanded_sum(a, eta, c);
      rows[i] = {c, num, d, safe_ratio(num, d)};
    });
    RungMax best;
    for (const CubeRow& row : rows) best.update(row.ratio, row.cube);
    rr.rows = std::move(rows);
    rr.constant = best.value;
    rr.worst = best.cube;
    rep.per_resolution.push_back(std::move(rr));
  }
  finish(rep);
  return rep;
}

GoodLambdaReport verify_good_lambda(const Experiment& e, double s, double lambda, int points) {
  if (!(s > 1)) throw ParameterError("good-lambda multiplier s must exceed 1");
  if (!(lambda > 0 && lambda < 1)) throw ParameterError("good-lambda parameter must lie in (0, 1)");
  const ExperimentConfig& cfg = e.config;
  const double p0 = cfg.family.exponents.p0, q0 = cfg.family.exponents.q0, q = cfg.q;
  GoodLambdaReport rep;
  rep.s = s;
  rep.lambda = lambda;
  for (const Rung& r : e.rungs) {
    const Denominator den = make_denominator(r, cfg.variant, q);
    std::vector<Cube> qs;
    for (const Cube& c : r.cubes)
      if (!c.is_full() && dyadic_aligned(c) && static_cast<int>(qs.size()) < cfg.good_lambda.cubes) qs.push_back(c);
    GoodLambdaRung gr;
    gr.resolution = r.resolution;
    struct PerCube {
      std::vector<GoodLambdaRow> rows;
      double c0 = 0;
      double defect = 0;
    };
    std::vector<PerCube> per(qs.size());
    const double cell = r.f.cell_volume();
    parallel_for(qs.size(), [&](std::size_t idx) {
      const Cube& Q = qs[idx];
      const Cube Q2 = dilated(Q, 2);
      const ComplexField b = r.family.apply_b(r.f, Q);
      const ComplexField b2 = r.family.apply_b(b, Q);
      const ComplexField reduced = b - r.family.apply_a(b, Q);
      double defect = 0, scale = 1;
      for (std::size_t i = 0; i < b.size(); ++i) {
        defect = std::max(defect, std::abs(b2[i] - reduced[i]));
        scale = std::max(scale, std::abs(b[i]));
      }
      per[idx].defect = defect / scale;
      RealField::Vector g(static_cast<Eigen::Index>(b2.size()));
      for (std::size_t i = 0; i < b2.size(); ++i) g[static_cast<Eigen::Index>(i)] = Q2.contains_cell(i) ? std::abs(b2[i]) : 0.0;
      const RealField G(r.f.dimension(), r.f.resolution(), std::move(g));
      const RealField MG = maximal_function(G, p0);
      MeasuredSamples torus;
      torus.modulus.assign(MG.values().data(), MG.values().data() + MG.size());
      torus.mass.assign(MG.size(), 1.0);
      const double a2 = den.value(Q);
      const double weak = weak_lq_norm(torus, p0);
      const double c0 = weak == 0 ? 0.0 : safe_ratio(weak, a2 * std::pow(Q.measure(), 1 / p0)) * (1 + 1e-9);
      per[idx].c0 = c0;
      const double threshold = c0 * a2;
      const double top = MG.values().maxCoeff();
      double lo = threshold > 0 ? threshold / 8 : 1e-3, hi = std::max(threshold * 8, 2 * top);
      if (!(hi > lo) || !std::isfinite(hi)) hi = lo * 64;
      const DyadicGrid grid = torus_grid_adapted_to(Q);
      const double structural_factor = std::pow(lambda / s, p0) + (std::isfinite(q0) ? std::pow(s, -q0) : 0.0);
      for (int k = 0; k < points; ++k) {
        const double t = lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
        const CellSet omega = CellSet::where(MG, [t](double v) { return v > t; });
        const CellSet omega_st = CellSet::where(MG, [t, s](double v) { return v > s * t; });
        GoodLambdaRow row;
        row.cube = Q;
        row.t = t;
        row.lhs = static_cast<double>(omega_st.count_in(Q)) * cell;
        row.structural = structural_factor * static_cast<double>(omega.count_in(Q)) * cell;
        row.tail = threshold > 0 ? std::pow(threshold / (lambda * t), q) * Q.measure() : 0.0;
        row.c = safe_ratio(row.lhs, row.structural + row.tail);
        row.whitney_branch = t > threshold;
        if (row.whitney_branch && !omega.is_empty()) {
          const auto cubes = whitney_decompose(omega, grid);
          const WhitneyCheck check = check_whitney(omega, cubes);
          row.whitney_cubes = check.cubes;
          row.floor_cubes = check.floor_cubes;
          row.whitney_ok = check.all();
        }
        per[idx].rows.push_back(row);
      }
    });
    for (const PerCube& pc : per) {
      gr.c0 = std::max(gr.c0, pc.c0);
      gr.bq2_defect = std::max(gr.bq2_defect, pc.defect);
      for (const GoodLambdaRow& row : pc.rows) {
        gr.c = std::max(gr.c, row.c);
        if (!std::isfinite(row.c)) gr.c = kInfinity;
        if (row.whitney_branch) {
          if (row.whitney_cubes > 0) {
            rep.whitney_branch = true;
            ++rep.decompositions;
            rep.floor_cubes += row.floor_cubes;
          }
        } else {
          rep.trivial_branch = true;
        }
        if (!row.whitney_ok) rep.whitney_invariants = false;
        gr.rows.push_back(row);
      }
    }
    rep.per_resolution.push_back(std::move(gr));
  }
  rep.passed = true;
  for (const GoodLambdaRung& gr : rep.per_resolution)
    if (!std::isfinite(gr.c)) {
      rep.passed = false;
      rep.failure = "good-lambda constant is not finite at m=" + std::to_string(gr.resolution);
    }
  if (rep.passed && !rep.whitney_invariants) {
    rep.passed = false;
    rep.failure = "a Whitney decomposition violated its invariants";
  }
  return rep;
}

BmoReport verify_bmo_equivalence(const Experiment& e, const std::vector<double>& ps_in) {
  const ExperimentConfig& cfg = e.config;
  BmoReport rep;
  std::vector<double> ps = ps_in;
  std::sort(ps.begin(), ps.end());
  rep.ps = ps;
  const double p0 = cfg.family.exponents.p0;
  for (double p : ps)
    if (!(p >= p0 && p < cfg.family.exponents.q0)) throw ParameterError("BMO exponents must lie in [p0, q0)");
  std::vector<Json> specs = cfg.bmo.fields;
  if (specs.empty()) specs.push_back(cfg.field);
  for (const Rung& r : e.rungs) {
    if (r.family.side_determined()) {
      rep.situation = "(i) side-determined";
    } else if (r.audit.localization && r.audit.replace_comm) {
      rep.situation = "(ii) local with replace-comm";
    } else {
      throw DomainError("BMO harness refused: the family satisfies neither situation (i) nor (ii)");
    }
    std::vector<double> all = ps;
    if (std::find(all.begin(), all.end(), p0) == all.end()) all.insert(all.begin(), p0);
    BmoRung br;
    br.resolution = r.resolution;
    for (std::size_t fi = 0; fi < specs.size(); ++fi) {
      const ComplexField f = build_field(specs[fi], r.f.dimension(), r.resolution, cfg.seed,
                                         "bmo.fields." + std::to_string(fi));
      const std::string name = specs[fi].value("name", specs[fi].value("kind", "field"));
      for (double alpha : cfg.bmo.alphas) {
        const std::vector<RealField> sharp = sharp_maximal(r.family, f, all, alpha);
        const RealField& base = sharp[0];
        BmoRow row;
        row.field = name;
        row.alpha = alpha;
        for (std::size_t k = 0; k < ps.size(); ++k) {
          const std::size_t j = static_cast<std::size_t>(std::find(all.begin(), all.end(), ps[k]) - all.begin());
          row.seminorms.push_back(sharp[j].values().maxCoeff());
          const double s = cfg.bmo.jn2_s > 0 ? cfg.bmo.jn2_s : 2 * ps[k];
          const RealField ms = maximal_function(base, s);
          double jn = 0;
          for (std::size_t x = 0; x < ms.size(); ++x) jn = std::max(jn, safe_ratio(sharp[j][x], ms[x]));
          row.jn2.push_back(jn);
        }
        const double hi = *std::max_element(row.seminorms.begin(), row.seminorms.end());
        const double lo = *std::min_element(row.seminorms.begin(), row.seminorms.end());
        row.ratio = hi == 0 ? 1.0 : safe_ratio(hi, lo);
        for (std::size_t k = 1; k < row.seminorms.size(); ++k)
          if (row.seminorms[k - 1] > row.seminorms[k] * (1 + 1e-12)) row.monotone = false;
        if (!row.monotone) rep.monotone = false;
        br.rows.push_back(std::move(row));
      }
    }
    rep.per_resolution.push_back(std::move(br));
  }
  rep.passed = rep.monotone;
  if (!rep.monotone) rep.failure = "monotone direction violated";
  const std::size_t rows = rep.per_resolution.empty() ? 0 : rep.per_resolution.front().rows.size();
  for (std::size_t i = 0; i < rows && rep.passed; ++i) {
    std::vector<double> ratios, jn;
    for (const BmoRung& br : rep.per_resolution) {
      ratios.push_back(br.rows[i].ratio);
      for (double v : br.rows[i].jn2)
        if (!std::isfinite(v)) jn.push_back(v);
    }
    if (!ladder_stable(ratios)) {
      rep.passed = false;
      rep.failure = "seminorm ratio for field '" + rep.per_resolution.front().rows[i].field +
                    "' is not finite or not ladder-stable";
    } else if (!jn.empty()) {
      rep.passed = false;
      rep.failure = "JN2 constant is not finite for field '" + rep.per_resolution.front().rows[i].field + "'";
    }
  }
  return rep;
}

RhSetReport rh_set_check(const Rung& rung, double p, std::uint64_t seed, std::size_t max_cubes) {
  if (!rung.weight || !rung.weight_report) throw ParameterError("RH set check needs a weight");
  const Weight& w = *rung.weight;
  RhSetReport rep;
  rep.p = p;
  rep.constant = rung.weight_report->rh.at(p);
  const int n = w.dimension(), m = w.resolution();
  const std::size_t total = n == 1 ? m : static_cast<std::size_t>(m) * m;
  const std::size_t count = std::min(max_cubes, rung.cubes.size());
  std::vector<std::vector<RhSubsetCheck>> checks(count);
  parallel_for(count, [&](std::size_t ci) {
    const Cube& q = rung.cubes[ci * rung.cubes.size() / count];
    const auto cells = q.cells();
    std::vector<double> vals;
    for (std::size_t c : cells) vals.push_back(w.density()[c]);
    std::vector<double> sorted = vals;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::vector<std::vector<std::uint8_t>> masks;
    auto mask_where = [&](auto&& pred) {
      std::vector<std::uint8_t> mk(total, 0);
      bool any = false;
      for (std::size_t k = 0; k < cells.size(); ++k)
        if (pred(k)) {
          mk[cells[k]] = 1;
          any = true;
        }
      if (any) masks.push_back(std::move(mk));
    };
    mask_where([&](std::size_t k) { return vals[k] > median; });
    mask_where([&](std::size_t k) { return vals[k] <= median; });
    const std::size_t argmax = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    mask_where([&](std::size_t k) { return k == argmax; });
    CounterRng rng(seed, ci);
    std::vector<std::uint8_t> coin(cells.size());
    for (auto& c : coin) c = rng.uniform() < 0.5;
    mask_where([&](std::size_t k) { return coin[k] != 0; });
    if (q.has_children())
      for (const Cube& ch : q.children()) {
        std::vector<std::uint8_t> mk(total, 0);
        ch.for_each_cell([&](std::size_t i) { mk[i] = 1; });
        masks.push_back(std::move(mk));
      }
    for (auto& mk : masks) checks[ci].push_back(rh_subset_check(w, q, CellSet(n, m, std::move(mk)), p, rep.constant));
  });
  for (const auto& list : checks)
    for (const RhSubsetCheck& c : list) {
      ++rep.checked;
      if (!c.holds()) ++rep.violations;
      rep.worst_margin = std::max(rep.worst_margin, safe_ratio(c.lhs, c.rhs));
    }
  return rep;
}

}  // namespace oscillab
