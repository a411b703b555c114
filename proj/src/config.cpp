#include "oscillab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oscillab/field_io.hpp"

namespace oscillab {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const Json* find(const Json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_number(const Json& obj, const std::string& key, double fallback, const std::string& path) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
  return v->get<double>();
}

int get_int(const Json& obj, const std::string& key, int fallback, const std::string& path) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v->get<int>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& fallback, const std::string& path) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
  return v->get<std::string>();
}

std::array<double, 2> get_point(const Json& obj, const std::string& key, const std::string& path) {
  std::array<double, 2> c{0.5, 0.5};
  const Json* v = find(obj, key);
  if (!v) return c;
  if (v->is_number()) {
    c[0] = c[1] = v->get<double>();
    return c;
  }
  if (!v->is_array() || v->empty() || v->size() > 2) throw ConfigError(join(path, key), "expected a point [x] or [x, y]");
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number()) throw ConfigError(join(path, key), "expected numeric coordinates");
    c[i] = (*v)[i].get<double>();
  }
  if (v->size() == 1) c[1] = c[0];
  return c;
}

std::vector<double> get_numbers(const Json& obj, const std::string& key, std::vector<double> fallback,
                                const std::string& path) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_array()) throw ConfigError(join(path, key), "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(parse_exponent((*v)[i], join(path, key) + "." + std::to_string(i)));
  return out;
}

template <typename Fn>
auto wrap(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

double torus_gap(double a, double b) {
  double d = std::fabs(a - b);
  d -= std::floor(d);
  return std::min(d, 1 - d);
}

double torus_distance(int dimension, const std::array<double, 2>& x, const std::array<double, 2>& c) {
  const double d0 = torus_gap(x[0], c[0]);
  if (dimension == 1) return d0;
  const double d1 = torus_gap(x[1], c[1]);
  return std::sqrt(d0 * d0 + d1 * d1);
}

}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "classical") return Variant::classical;
  if (name == "tilde") return Variant::tilde;
  if (name == "pair") return Variant::pair;
  if (name == "alternative") return Variant::alternative;
  if (name == "alternative-bis") return Variant::alternative_bis;
  if (name == "weighted") return Variant::weighted;
  throw ParameterError("unknown variant '" + name + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::classical: return "classical";
    case Variant::tilde: return "tilde";
    case Variant::pair: return "pair";
    case Variant::alternative: return "alternative";
    case Variant::alternative_bis: return "alternative-bis";
    case Variant::weighted: return "weighted";
  }
  return "?";
}

bool ExperimentConfig::wants(const std::string& harness) const {
  return std::find(harnesses.begin(), harnesses.end(), harness) != harnesses.end();
}

double parse_exponent(const Json& value, const std::string& path) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf" || s == "infinity") return kInfinity;
  }
  throw ConfigError(path, "expected a number or \"inf\"");
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must have the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (p.empty()) throw ConfigError(key, "empty path component");
    Json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (const std::exception&) {
        throw ConfigError(key, "expected an array index at '" + p + "'");
      }
      if (idx >= node->size()) throw ConfigError(key, "array index out of range");
      next = &(*node)[idx];
    } else {
      if (!node->is_object()) *node = Json::object();
      next = &(*node)[p];
    }
    node = next;
  }
  *node = value;
}

ExperimentConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  ExperimentConfig c;
  c.source = doc;
  c.name = get_string(doc, "name", "experiment", "");
  c.dimension = get_int(doc, "dimension", 1, "");
  if (c.dimension != 1 && c.dimension != 2) throw ConfigError("dimension", "must be 1 or 2");
  const Json* ladder = find(doc, "ladder");
  if (!ladder || !ladder->is_array() || ladder->empty()) throw ConfigError("ladder", "expected a nonempty list of resolutions");
  for (std::size_t i = 0; i < ladder->size(); ++i) {
    const std::string p = "ladder." + std::to_string(i);
    if (!(*ladder)[i].is_number_integer()) throw ConfigError(p, "expected an integer");
    const int m = (*ladder)[i].get<int>();
    if (!is_power_of_two(m)) throw ConfigError(p, "resolution must be a power of two");
    if (m < 8) throw ConfigError(p, "resolution must be at least 8");
    if (c.dimension == 2 && m > 1024) throw ConfigError(p, "2-D resolution must be at most 1024");
    c.ladder.push_back(m);
  }
  if (const Json* s = find(doc, "seed")) {
    if (!s->is_number_integer()) throw ConfigError("seed", "expected an integer");
    c.seed = s->get<std::uint64_t>();
  }
  c.field = doc.value("field", Json());
  if (c.field.is_null()) throw ConfigError("field", "missing field specification");
  c.weight = doc.value("weight", Json());
  if (c.weight.is_object() && get_string(c.weight, "kind", "", "weight") == "none") c.weight = Json();
  c.functional = doc.value("functional", Json{{"kind", "constant"}, {"c", "measured"}});

  const Json fam = doc.value("family", Json::object());
  c.family.kind = wrap("family.kind", [&] { return parse_family_kind(get_string(fam, "kind", "classical-average", "family")); });
  if (const Json* v = find(fam, "p0")) c.family.exponents.p0 = parse_exponent(*v, "family.p0");
  if (const Json* v = find(fam, "q0")) c.family.exponents.q0 = parse_exponent(*v, "family.q0");
  if (!(c.family.exponents.p0 >= 1) || !std::isfinite(c.family.exponents.p0))
    throw ConfigError("family.p0", "must be finite and at least 1");
  if (!(c.family.exponents.q0 >= c.family.exponents.p0)) throw ConfigError("family.q0", "must satisfy q0 >= p0");
  c.family.N = get_int(fam, "N", 1, "family");
  if (c.family.N < 1) throw ConfigError("family.N", "must be at least 1");
  const Json op = fam.value("operator", Json::object());
  c.family.op.coefficients = get_string(op, "coefficients", "identity", "family.operator");
  if (c.family.op.coefficients != "identity" && c.family.op.coefficients != "constant" &&
      c.family.op.coefficients != "sinusoidal")
    throw ConfigError("family.operator.coefficients", "expected identity, constant or sinusoidal");
  if (const Json* mtx = find(op, "matrix")) {
    if (!mtx->is_array() || mtx->size() != 2) throw ConfigError("family.operator.matrix", "expected a 2x2 list");
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const Json& e = (*mtx)[i];
        if (!e.is_array() || e.size() != 2 || !e[j].is_number())
          throw ConfigError("family.operator.matrix", "expected a 2x2 list of numbers");
        c.family.op.matrix(i, j) = e[j].get<double>();
      }
  }
  c.family.op.mean = get_number(op, "mean", 1.25, "family.operator");
  c.family.op.amplitude = get_number(op, "amplitude", 0.75, "family.operator");
  if (!(c.family.op.mean - std::fabs(c.family.op.amplitude) > 0))
    throw ConfigError("family.operator.amplitude", "coefficient must stay positive");
  c.family.op.solver = wrap("family.operator.solver", [&] { return parse_solver_kind(get_string(op, "solver", "automatic", "family.operator")); });
  if (const Json* r = find(op, "exponent_range")) {
    const auto v = get_numbers(op, "exponent_range", {}, "family.operator");
    if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError("family.operator.exponent_range", "expected [p_minus, p_plus] with p_minus < p_plus");
    c.family.op.exponent_range = std::make_pair(v[0], v[1]);
    (void)r;
  }
  if (c.family.kind == FamilyKind::semigroup && c.family.op.coefficients == "constant" && c.dimension == 1 &&
      c.family.op.matrix(0, 0) <= 0)
    throw ConfigError("family.operator.matrix", "1-D coefficient must be positive");

  const Json ex = doc.value("exponents", Json::object());
  if (const Json* v = find(ex, "q")) c.q = parse_exponent(*v, "exponents.q");
  if (const Json* v = find(ex, "r")) c.r = parse_exponent(*v, "exponents.r");

  if (const Json* h = find(doc, "harnesses")) {
    if (!h->is_array()) throw ConfigError("harnesses", "expected a list");
    static const std::vector<std::string> known{"hypothesis", "weak", "strong", "exponential", "good_lambda", "bmo"};
    for (std::size_t i = 0; i < h->size(); ++i) {
      const std::string p = "harnesses." + std::to_string(i);
      if (!(*h)[i].is_string()) throw ConfigError(p, "expected a harness name");
      const std::string name = (*h)[i].get<std::string>();
      if (std::find(known.begin(), known.end(), name) == known.end()) throw ConfigError(p, "unknown harness '" + name + "'");
      c.harnesses.push_back(name);
    }
  }
  c.variant = wrap("variant", [&] { return parse_variant(get_string(doc, "variant", "tilde", "")); });

  const Exponents& e = c.family.exponents;
  const bool uses_q = c.wants("weak") || c.wants("strong") || c.wants("good_lambda");
  if (uses_q && !(e.p0 < c.q && c.q < e.q0))
    throw ConfigError("exponents.q", "must satisfy p0 < q < q0 (p0 = " + std::to_string(e.p0) +
                                         ", q = " + std::to_string(c.q) + ", q0 = " + std::to_string(e.q0) + ")");
  if (c.wants("strong") && !(e.p0 <= c.r && c.r < c.q))
    throw ConfigError("exponents.r", "must satisfy p0 <= r < q");
  if (c.wants("exponential") && std::isfinite(e.q0)) throw ConfigError("family.q0", "the exponential harness needs q0 = inf");
  if (c.family.op.exponent_range && uses_q) {
    const auto [pm, pp] = *c.family.op.exponent_range;
    if (!(pm < e.p0 && c.q < pp)) throw ConfigError("exponents.q", "must satisfy p_minus < p0 < q < p_plus");
    if (!(c.family.N > c.dimension / (2 * pp))) throw ConfigError("family.N", "must satisfy N > n / (2 p_plus)");
  }
  if (c.variant == Variant::weighted && c.weight.is_null()) throw ConfigError("weight", "the weighted variant needs a weight");

  const Json sm = doc.value("sample", Json::object());
  c.sample.min_side_cells = get_int(sm, "min_side_cells", 8, "sample");
  c.sample.off_dyadic = get_int(sm, "off_dyadic", 32, "sample");
  c.sample.max_cubes = get_int(sm, "max_cubes", 0, "sample");
  if (c.sample.min_side_cells < 1) throw ConfigError("sample.min_side_cells", "must be at least 1");
  if (c.sample.off_dyadic < 0 || c.sample.max_cubes < 0) throw ConfigError("sample", "counts must be nonnegative");

  const Json pr = doc.value("profile", Json::object());
  c.profile.sidelength = get_number(pr, "sidelength", 1.0 / 64, "profile");
  c.profile.cubes = get_int(pr, "cubes", 4, "profile");
  c.profile.patterns = get_int(pr, "patterns", 2, "profile");
  c.profile.fit_first = get_int(pr, "fit_first", 3, "profile");
  c.profile.fit_last = get_int(pr, "fit_last", -1, "profile");
  if (!(c.profile.sidelength > 0 && c.profile.sidelength <= 1)) throw ConfigError("profile.sidelength", "must lie in (0, 1]");
  if (c.profile.cubes < 1) throw ConfigError("profile.cubes", "must be at least 1");

  const Json cd = doc.value("condition", Json::object());
  c.condition.families = get_int(cd, "families", 16, "condition");
  c.condition.strategy = wrap("condition.strategy", [&] { return parse_family_strategy(get_string(cd, "strategy", "dyadic-packing", "condition")); });
  c.condition.cap = get_number(cd, "cap", 1e6, "condition");
  c.condition.pair_generations = get_int(cd, "pair_generations", 3, "condition");
  c.condition.max_tops = get_int(cd, "max_tops", 64, "condition");
  if (c.condition.families < 1) throw ConfigError("condition.families", "must be at least 1");

  const Json gl = doc.value("good_lambda", Json::object());
  c.good_lambda.s = get_number(gl, "s", 8, "good_lambda");
  c.good_lambda.lambda = get_number(gl, "lambda", 0.5, "good_lambda");
  c.good_lambda.points = get_int(gl, "points", 20, "good_lambda");
  c.good_lambda.cubes = get_int(gl, "cubes", 4, "good_lambda");
  if (!(c.good_lambda.s > 1)) throw ConfigError("good_lambda.s", "must exceed 1");
  if (!(c.good_lambda.lambda > 0 && c.good_lambda.lambda < 1)) throw ConfigError("good_lambda.lambda", "must lie in (0, 1)");
  if (c.good_lambda.points < 2) throw ConfigError("good_lambda.points", "must be at least 2");

  const Json bm = doc.value("bmo", Json::object());
  c.bmo.ps = get_numbers(bm, "ps", {1, 2, 4}, "bmo");
  c.bmo.alphas = get_numbers(bm, "alphas", {0}, "bmo");
  c.bmo.jn2_s = get_number(bm, "jn2_s", 0, "bmo");
  if (const Json* fs = find(bm, "fields")) {
    if (!fs->is_array()) throw ConfigError("bmo.fields", "expected a list of field specifications");
    for (const Json& f : *fs) c.bmo.fields.push_back(f);
  }
  if (c.wants("bmo")) {
    if (c.bmo.ps.empty()) throw ConfigError("bmo.ps", "expected at least one exponent");
    for (std::size_t i = 0; i < c.bmo.ps.size(); ++i)
      if (!(c.bmo.ps[i] >= e.p0 && c.bmo.ps[i] < e.q0 && std::isfinite(c.bmo.ps[i])))
        throw ConfigError("bmo.ps." + std::to_string(i), "must lie in [p0, q0)");
  }

  c.rh_p = get_number(doc, "rh_p", 1.5, "");
  if (!(c.rh_p > 1)) throw ConfigError("rh_p", "must exceed 1");
  c.theta = get_number(doc, "theta", 0, "");
  if (!(c.theta >= 0 && c.theta <= 1)) throw ConfigError("theta", "must lie in [0, 1]");
  c.hypothesis_kmax = get_int(doc, "hypothesis_kmax", -1, "");

  // Build every specification once at the coarsest rung so errors surface before any work.
  const int m0 = *std::min_element(c.ladder.begin(), c.ladder.end());
  build_field(c.field, c.dimension, m0, c.seed, "field");
  if (!c.weight.is_null()) build_weight(c.weight, c.dimension, m0, "weight");
  for (std::size_t i = 0; i < c.bmo.fields.size(); ++i)
    build_field(c.bmo.fields[i], c.dimension, m0, c.seed, "bmo.fields." + std::to_string(i));
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  Json doc = Json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError(path, "configuration is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

ComplexField build_field(const Json& spec, int dimension, int m, std::uint64_t seed, const std::string& path) {
  if (!spec.is_object()) throw ConfigError(path, "expected a field specification object");
  const std::string kind = get_string(spec, "kind", "", path);
  const double scale = get_number(spec, "scale", 1.0, path);
  const auto c = get_point(spec, "center", path);
  const double tau = 2 * std::numbers::pi;
  auto real = [&](auto&& fn) { return to_complex(RealField::sample(dimension, m, fn)); };
  ComplexField out;
  if (kind == "constant") {
    const double v = get_number(spec, "value", 1.0, path);
    out = ComplexField::constant(dimension, m, Complex(v, 0));
  } else if (kind == "log_distance") {
    out = real([&](std::array<double, 2> x) { return std::log(torus_distance(dimension, x, c)); });
  } else if (kind == "cusp") {
    const double e = get_number(spec, "exponent", 0.5, path);
    out = real([&](std::array<double, 2> x) { return std::pow(torus_distance(dimension, x, c), e); });
  } else if (kind == "step") {
    const double a = get_number(spec, "from", 0.25, path), b = get_number(spec, "to", 0.75, path);
    const double lo = get_number(spec, "low", 0.0, path), hi = get_number(spec, "high", 1.0, path);
    out = real([&](std::array<double, 2> x) { return x[0] >= a && x[0] < b ? hi : lo; });
  } else if (kind == "sawtooth") {
    const double freq = get_number(spec, "frequency", 1.0, path);
    out = real([&](std::array<double, 2> x) {
      const double t = freq * x[0];
      return t - std::floor(t) - 0.5;
    });
  } else if (kind == "fourier_mode") {
    const auto k = get_numbers(spec, "k", {1, 0}, path);
    const double amp = get_number(spec, "amplitude", 1.0, path), phase = get_number(spec, "phase", 0.0, path);
    const double k0 = k.empty() ? 1 : k[0], k1 = k.size() > 1 ? k[1] : 0;
    out = real([&](std::array<double, 2> x) { return amp * std::cos(tau * (k0 * x[0] + k1 * x[1]) + phase); });
  } else if (kind == "lacunary") {
    const int terms = get_int(spec, "terms", 6, path);
    if (terms < 1) throw ConfigError(join(path, "terms"), "must be at least 1");
    out = real([&](std::array<double, 2> x) {
      double v = 0;
      for (int j = 1; j <= terms; ++j) v += std::cos(tau * std::ldexp(1.0, j) * x[0]);
      return v;
    });
  } else if (kind == "bump") {
    const double r = get_number(spec, "radius", 0.25, path);
    if (!(r > 0)) throw ConfigError(join(path, "radius"), "must be positive");
    out = real([&](std::array<double, 2> x) {
      const double d = torus_distance(dimension, x, c) / r;
      return d < 1 ? std::exp(1 - 1 / (1 - d * d)) : 0.0;
    });
  } else if (kind == "random") {
    const std::uint64_t stream = static_cast<std::uint64_t>(get_int(spec, "stream", 0, path));
    CounterRng rng(seed, hash_combine(0x6669656c64ULL, stream));
    const std::size_t n = dimension == 1 ? m : static_cast<std::size_t>(m) * m;
    ComplexField::Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = rng.normal();
    out = ComplexField(dimension, m, std::move(v));
  } else if (kind == "sum") {
    const Json* terms = find(spec, "terms");
    if (!terms || !terms->is_array() || terms->empty()) throw ConfigError(join(path, "terms"), "expected a nonempty list");
    out = ComplexField::constant(dimension, m, Complex(0, 0));
    for (std::size_t i = 0; i < terms->size(); ++i)
      out = out + build_field((*terms)[i], dimension, m, seed, join(path, "terms." + std::to_string(i)));
  } else if (kind == "file") {
    const std::string file = get_string(spec, "path", "", path);
    LoadedField lf = wrap(join(path, "path"), [&] { return read_field(file); });
    if (!lf.field.same_grid(dimension, m))
      throw ConfigError(join(path, "path"), "file grid does not match dimension " + std::to_string(dimension) +
                                                ", resolution " + std::to_string(m));
    out = lf.field;
  } else {
    throw ConfigError(join(path, "kind"), "unknown field kind '" + kind + "'");
  }
  if (scale != 1.0) out = Complex(scale, 0) * out;
  return out;
}

std::shared_ptr<const Weight> build_weight(const Json& spec, int dimension, int m, const std::string& path) {
  if (spec.is_null()) return nullptr;
  if (!spec.is_object()) throw ConfigError(path, "expected a weight specification object");
  const std::string kind = get_string(spec, "kind", "", path);
  const auto c = get_point(spec, "center", path);
  RealField density;
  if (kind == "uniform") {
    return std::make_shared<const Weight>(Weight::uniform(dimension, m));
  } else if (kind == "power") {
    const double gamma = get_number(spec, "gamma", -0.5, path);
    if (!(gamma > -dimension)) throw ConfigError(join(path, "gamma"), "power weight needs gamma > -n");
    density = RealField::sample(dimension, m, [&](std::array<double, 2> x) {
      return std::pow(torus_distance(dimension, x, c), gamma);
    });
  } else if (kind == "spike") {
    const double height = get_number(spec, "height", 10.0, path), r = get_number(spec, "radius", 0.05, path);
    density = RealField::sample(dimension, m, [&](std::array<double, 2> x) {
      return torus_distance(dimension, x, c) < r ? 1 + height : 1.0;
    });
  } else if (kind == "file") {
    const std::string file = get_string(spec, "path", "", path);
    RealField f = wrap(join(path, "path"), [&] { return read_real_field(file); });
    if (!f.same_grid(dimension, m)) throw ConfigError(join(path, "path"), "file grid does not match the run");
    density = std::move(f);
  } else {
    throw ConfigError(join(path, "kind"), "unknown weight kind '" + kind + "'");
  }
  return wrap(path, [&] { return std::make_shared<const Weight>(std::move(density)); });
}

std::shared_ptr<const EllipticOperator> build_operator(const OperatorSpec& spec, int dimension, int m) {
  EllipticOperator op = [&] {
    if (spec.coefficients == "identity") return EllipticOperator::laplacian(dimension, m, spec.solver);
    if (spec.coefficients == "constant") return EllipticOperator::constant(dimension, m, spec.matrix.cast<Complex>(), spec.solver);
    const double mean = spec.mean, amp = spec.amplitude;
    return EllipticOperator::from_function(
        dimension, m,
        [&](std::array<double, 2> x) -> CoefficientMatrix {
          return CoefficientMatrix::Identity() * Complex(mean + amp * std::sin(2 * std::numbers::pi * x[0]), 0);
        },
        spec.solver);
  }();
  if (spec.exponent_range) op = op.with_exponent_range(spec.exponent_range->first, spec.exponent_range->second);
  return std::make_shared<const EllipticOperator>(std::move(op));
}

Sequence build_sequence(const Json& spec, const std::string& path) {
  if (!spec.is_object()) throw ConfigError(path, "expected a sequence specification object");
  const std::string kind = get_string(spec, "kind", "", path);
  const int first = get_int(spec, "first", 0, path);
  return wrap(path, [&] {
    if (kind == "geometric") {
      const double ratio = find(spec, "sigma") ? std::exp2(-get_number(spec, "sigma", 0, path))
                                               : get_number(spec, "ratio", 0.5, path);
      return Sequence::geometric(get_number(spec, "scale", 1.0, path), ratio, first);
    }
    if (kind == "super_exponential")
      return Sequence::super_exponential(get_number(spec, "scale", 1.0, path), get_number(spec, "c", 1.0, path), first);
    if (kind == "finite") return Sequence::finite(get_numbers(spec, "terms", {}, path), first);
    throw ConfigError(join(path, "kind"), "unknown sequence kind '" + kind + "'");
  });
}

RealField gradient_modulus(const ComplexField& f) {
  const int m = f.resolution(), n = f.dimension();
  RealField::Vector v(static_cast<Eigen::Index>(f.size()));
  const double scale = m / 2.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int x = static_cast<int>(i % m), y = static_cast<int>(i / m);
    auto at = [&](int xx, int yy) { return f[static_cast<std::size_t>((xx + m) % m) + static_cast<std::size_t>((yy + m) % m) * m]; };
    const double dx = std::abs(at(x + 1, y) - at(x - 1, y)) * scale;
    double g2 = dx * dx;
    if (n == 2) {
      const double dy = std::abs(at(x, y + 1) - at(x, y - 1)) * scale;
      g2 += dy * dy;
    }
    v[static_cast<Eigen::Index>(i)] = std::sqrt(g2);
  }
  return RealField(n, m, std::move(v));
}

}  // namespace oscillab
