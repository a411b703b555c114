#include "oscillab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace oscillab {

std::string to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::bmo_lipschitz: return "bmo-lipschitz";
    case FunctionalKind::fractional: return "fractional";
    case FunctionalKind::reduced_poincare: return "reduced-poincare";
    case FunctionalKind::expanded_poincare: return "expanded-poincare";
    case FunctionalKind::tilde_of: return "tilde-of";
    case FunctionalKind::bar_of: return "bar-of";
    case FunctionalKind::constant: return "constant";
    case FunctionalKind::custom_table: return "custom-table";
    case FunctionalKind::measured: return "measured";
  }
  return "?";
}

std::string to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::d_r: return "D_r";
    case ConditionKind::d_infinity: return "D_inf";
    case ConditionKind::d_zero: return "D_0";
    case ConditionKind::doubling: return "doubling";
    case ConditionKind::pair_d_q: return "pair-D_q";
  }
  return "?";
}

BoxTable::BoxTable(int dimension, int resolution, const std::vector<double>& values)
    : dim_(dimension), m_(resolution) {
  const int rows = dimension == 1 ? 1 : resolution;
  const int w = resolution + 1;
  table_.assign(static_cast<std::size_t>(w) * (rows + 1), 0.0L);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < resolution; ++x)
      table_[(x + 1) + w * (y + 1)] = table_[x + w * (y + 1)] + table_[(x + 1) + w * y] - table_[x + w * y] +
                                      static_cast<long double>(values[x + static_cast<std::size_t>(resolution) * y]);
}

long double BoxTable::sum(const Cube& q) const {
  if (q.dimension() != dim_ || q.resolution() != m_) throw ParameterError("cube resolution mismatch");
  const int w = m_ + 1;
  auto prefix = [&](int x, int y) { return table_[x + w * y]; };
  auto rect = [&](int x0, int x1, int y0, int y1) {
    return prefix(x1, y1) - prefix(x0, y1) - prefix(x1, y0) + prefix(x0, y0);
  };
  auto pieces = [&](int a, int s) {
    std::vector<std::pair<int, int>> out;
    if (a + s <= m_) {
      out.emplace_back(a, a + s);
    } else {
      out.emplace_back(a, m_);
      out.emplace_back(0, a + s - m_);
    }
    return out;
  };
  long double total = 0;
  const auto xs = pieces(q.anchor_cell(0), q.side_cells());
  if (dim_ == 1) {
    for (auto [x0, x1] : xs) total += rect(x0, x1, 0, 1);
  } else {
    const auto ys = pieces(q.anchor_cell(1), q.side_cells());
    for (auto [x0, x1] : xs)
      for (auto [y0, y1] : ys) total += rect(x0, x1, y0, y1);
  }
  return total;
}

struct Functional::Impl {
  FunctionalKind kind = FunctionalKind::constant;
  double c = 0;
  double alpha = 0;
  double s = 1;
  std::shared_ptr<const Weight> weight;
  std::shared_ptr<const RealField> h;
  Sequence seq;
  bool is_expanded = false;
  std::vector<double> coef;   // seq[k] for k < coef.size()
  std::vector<double> tails;  // seq.tail(K) for K < tails.size()
  std::shared_ptr<const Impl> base;
  BoxTable hs_table;
  BoxTable w_table;
  std::map<std::tuple<int, int, int, int>, double> table;
  std::function<double(const Cube&)> rule;
  std::string name;

  // l(C) (avg_C h^s dmu)^{1/s}.
  double poincare_term(const Cube& q) const {
    const long double num = hs_table.sum(q);
    const long double den = weight ? w_table.sum(q) : static_cast<long double>(q.cell_count());
    const double avg = static_cast<double>(num / den);
    return q.sidelength() * std::pow(std::max(avg, 0.0), 1.0 / s);
  }

  double eval(const Cube& q) const {
    switch (kind) {
      case FunctionalKind::constant: return c;
      case FunctionalKind::bmo_lipschitz: return std::pow(q.sidelength(), alpha);
      case FunctionalKind::fractional:
        return std::pow(q.sidelength(), alpha) * std::pow(weight->mass(q) / q.measure(), 1.0 / s);
      case FunctionalKind::reduced_poincare: return poincare_term(q);
      case FunctionalKind::custom_table: {
        auto it = table.find({q.side_cells(), q.anchor_cell(0), q.anchor_cell(1), q.resolution()});
        if (it == table.end()) throw ParameterError("custom-table functional has no value for cube " + q.describe());
        return it->second;
      }
      case FunctionalKind::measured: return rule(q);
      default: break;
    }
    if (is_expanded) {
      const int K = saturation_index(q);
      double sum = 0;
      for (int k = 0; k < K; ++k) {
        const double g = k < static_cast<int>(coef.size()) ? coef[k] : seq[k];
        if (g != 0) sum += g * poincare_term(dilated(q, std::ldexp(1.0, k)));
      }
      const double tail = K < static_cast<int>(tails.size()) ? tails[K] : seq.tail(K);
      if (tail != 0) sum += tail * poincare_term(Cube::full(q.dimension(), q.resolution()));
      return sum;
    }
    // Non-collapsed tilde-of: sum_{k >= 1} gamma~_k a(2^k Q).
    const int K = std::max(saturation_index(q), 1);
    double sum = 0;
    for (int k = 1; k < K; ++k) {
      const double g = seq[k];
      if (g != 0) sum += g * base->eval(dilated(q, std::ldexp(1.0, k)));
    }
    const double tail = seq.tail(K);
    if (tail != 0) sum += tail * base->eval(Cube::full(q.dimension(), q.resolution()));
    return sum;
  }
};

Functional::Functional(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Functional Functional::constant(double c) {
  if (!(c >= 0) || !std::isfinite(c)) throw ParameterError("constant functional needs a finite c >= 0");
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::constant;
  impl->c = c;
  return Functional(impl);
}

Functional Functional::bmo_lipschitz(double alpha) {
  if (!(alpha >= 0)) throw ParameterError("bmo-lipschitz needs alpha >= 0");
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::bmo_lipschitz;
  impl->alpha = alpha;
  return Functional(impl);
}

Functional Functional::fractional(double alpha, double s, std::shared_ptr<const Weight> u) {
  if (!u) throw ParameterError("fractional functional needs a weight u");
  if (!(s >= 1)) throw ParameterError("fractional functional needs s >= 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::fractional;
  impl->alpha = alpha;
  impl->s = s;
  impl->weight = std::move(u);
  return Functional(impl);
}

namespace {

void build_tables(Functional::Impl& impl) {
  const RealField& h = *impl.h;
  if (impl.weight && !impl.weight->density().same_grid(h.dimension(), h.resolution()))
    throw ParameterError("weight and h grids differ");
  std::vector<double> hs(h.size()), w(impl.weight ? h.size() : 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] >= 0)) throw DataError("h must be nonnegative");
    const double wi = impl.weight ? impl.weight->density()[i] : 1.0;
    hs[i] = std::pow(h[i], impl.s) * wi;
    if (impl.weight) w[i] = wi;
  }
  impl.hs_table = BoxTable(h.dimension(), h.resolution(), hs);
  if (impl.weight) impl.w_table = BoxTable(h.dimension(), h.resolution(), w);
}

void build_coefficients(Functional::Impl& impl) {
  const int kmax = log2_exact(impl.h->resolution()) + 4;
  impl.coef.clear();
  impl.tails.clear();
  for (int k = 0; k <= kmax; ++k) {
    impl.coef.push_back(impl.seq[k]);
    impl.tails.push_back(impl.seq.tail(k));
  }
}

}  // namespace

Functional Functional::reduced_poincare(std::shared_ptr<const RealField> h, double s, std::shared_ptr<const Weight> w) {
  if (!h) throw ParameterError("reduced-poincare needs h");
  if (!(s >= 1)) throw ParameterError("reduced-poincare needs s >= 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::reduced_poincare;
  impl->h = std::move(h);
  impl->s = s;
  impl->weight = std::move(w);
  build_tables(*impl);
  return Functional(impl);
}

Functional Functional::expanded_poincare(std::shared_ptr<const RealField> h, double s, Sequence gamma,
                                         std::shared_ptr<const Weight> w) {
  if (!h) throw ParameterError("expanded-poincare needs h");
  if (!(s >= 1)) throw ParameterError("expanded-poincare needs s >= 1");
  gamma.tail(0);  // divergent gamma -> parameter error
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::expanded_poincare;
  impl->h = std::move(h);
  impl->s = s;
  impl->weight = std::move(w);
  impl->seq = std::move(gamma);
  impl->is_expanded = true;
  build_tables(*impl);
  build_coefficients(*impl);
  return Functional(impl);
}

Functional Functional::expanded_like(const Functional& shape, FunctionalKind kind, Sequence coefficients) {
  if (!shape.expanded()) throw ParameterError("expanded_like needs an expanded functional");
  coefficients.tail(0);
  auto impl = std::make_shared<Impl>(*shape.impl_);
  impl->kind = kind;
  impl->seq = std::move(coefficients);
  impl->base.reset();
  build_coefficients(*impl);
  return Functional(impl);
}

Functional Functional::tilde_of(const Functional& base, Sequence gamma_tilde) {
  gamma_tilde.tail(0);
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::tilde_of;
  impl->seq = std::move(gamma_tilde);
  impl->base = base.impl_;
  return Functional(impl);
}

Functional Functional::custom_table(std::vector<std::pair<Cube, double>> rows) {
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::custom_table;
  for (const auto& [q, v] : rows) {
    if (!(v >= 0) || !std::isfinite(v)) throw DataError("custom-table values must be finite and nonnegative");
    impl->table[{q.side_cells(), q.anchor_cell(0), q.anchor_cell(1), q.resolution()}] = v;
  }
  return Functional(impl);
}

Functional Functional::measured(std::string name, std::function<double(const Cube&)> rule) {
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionalKind::measured;
  impl->name = std::move(name);
  impl->rule = std::move(rule);
  return Functional(impl);
}

FunctionalKind Functional::kind() const { return impl_->kind; }
double Functional::operator()(const Cube& q) const { return impl_->eval(q); }
bool Functional::expanded() const { return impl_->is_expanded; }
const Sequence& Functional::coefficients() const { return impl_->seq; }
double Functional::s() const { return impl_->s; }
const std::shared_ptr<const RealField>& Functional::h() const { return impl_->h; }
const std::shared_ptr<const Weight>& Functional::weight() const { return impl_->weight; }

const Functional* Functional::base() const {
  thread_local Functional holder{nullptr};
  if (!impl_->base) return nullptr;
  holder = Functional(impl_->base);
  return &holder;
}

std::string Functional::describe() const {
  std::ostringstream os;
  os << to_string(impl_->kind);
  switch (impl_->kind) {
    case FunctionalKind::constant: os << "(c=" << impl_->c << ")"; break;
    case FunctionalKind::bmo_lipschitz: os << "(alpha=" << impl_->alpha << ")"; break;
    case FunctionalKind::fractional: os << "(alpha=" << impl_->alpha << ", s=" << impl_->s << ")"; break;
    case FunctionalKind::reduced_poincare: os << "(s=" << impl_->s << (impl_->weight ? ", weighted" : "") << ")"; break;
    case FunctionalKind::measured: os << "(" << impl_->name << ")"; break;
    case FunctionalKind::custom_table: os << "(" << impl_->table.size() << " rows)"; break;
    default: os << "(" << impl_->seq.describe() << (impl_->weight ? ", weighted" : "") << ")"; break;
  }
  return os.str();
}

namespace {

double ak(const OffDiagonalProfile& p, int k) { return p.alpha_at(k); }

}  // namespace

Sequence tilde_coefficients(const OffDiagonalProfile& p) {
  const int n = p.dimension;
  const double p0 = p.exponents.p0;
  const int last = std::max(static_cast<int>(p.alpha.size()) + 2, static_cast<int>(p.beta.size()) + 3);
  std::vector<double> g(static_cast<std::size_t>(std::max(last, 5)), 0.0);
  g[1] = 1;
  g[2] = std::max({1.0, ak(p, 2), ak(p, 3)});
  g[3] = std::max({ak(p, 2), ak(p, 3), ak(p, 4)});
  g[4] = std::max({ak(p, 3), ak(p, 4), ak(p, 5), p.beta_at(2)});
  for (int k = 5; k < static_cast<int>(g.size()); ++k) {
    const double grow = std::exp2(k * n / p0);
    g[k] = std::max({ak(p, k - 2), grow * ak(p, k - 1), grow * ak(p, k), ak(p, k + 1), p.beta_at(k - 3),
                     p.beta_at(k - 2)});
  }
  return Sequence::finite(std::move(g), 0);
}

Sequence exponential_weights(const OffDiagonalProfile& p) {
  const int last = static_cast<int>(p.alpha.size()) + 3;
  std::vector<double> e(static_cast<std::size_t>(std::max(last, 5)), 0.0);
  e[1] = 1;
  for (int k = 2; k < static_cast<int>(e.size()); ++k)
    e[k] = k <= 4 ? ak(p, k) : std::max(ak(p, k), ak(p, k - 3));
  return Sequence::finite(std::move(e), 0);
}

Sequence alternative_weights(const OffDiagonalProfile& p) {
  std::vector<double> e(std::max<std::size_t>(p.alpha.size(), 2), 0.0);
  e[1] = 1;
  for (int k = 2; k < static_cast<int>(e.size()); ++k) e[k] = ak(p, k) * std::exp2(k * p.dimension / p.exponents.p0);
  return Sequence::finite(std::move(e), 0);
}

Functional tilde_expand(const Functional& a, const OffDiagonalProfile& profile) {
  if (profile.alpha.empty()) throw ParameterError("tilde_expand needs a measured profile");
  const Sequence g = tilde_coefficients(profile);
  if (a.kind() == FunctionalKind::constant) return Functional::constant(a(Cube::full(1, 1)) * g.tail(1));
  if (a.expanded())
    return Functional::expanded_like(a, FunctionalKind::tilde_of, Sequence::convolution(g, a.coefficients()));
  return Functional::tilde_of(a, g);
}

Functional bar_expand(const Functional& a, double q, double theta, int dimension) {
  if (!a.expanded()) throw ParameterError("bar_expand needs an expanded-poincare functional");
  if (!(theta > 0 && theta <= 1)) throw ParameterError("bar_expand needs theta in (0, 1]");
  const double s = a.s();
  const double n = dimension;
  if (!(q >= 1)) throw ParameterError("bar_expand needs q >= 1");
  if (s < n && !(q < s * n / (n - s)))
    throw ParameterError("bar_expand needs q < s* = " + std::to_string(s * n / (n - s)));
  const double e = n * (1 - theta) / s + theta * n * std::max(1.0 / s - 1.0 / q, 0.0);
  return Functional::expanded_like(a, FunctionalKind::bar_of, Sequence::bar(a.coefficients(), e));
}

double expanded_sum(const Functional& a, const Sequence& eta, const Cube& q) {
  const int K = std::max(saturation_index(q), 1);
  double sum = 0;
  for (int k = 1; k < K; ++k) {
    const double e = eta[k];
    if (e != 0) sum += e * a(dilated(q, std::ldexp(1.0, k)));
  }
  const double tail = eta.tail(K);
  if (tail != 0) sum += tail * a(Cube::full(q.dimension(), q.resolution()));
  return sum;
}

ProbeSuite make_probe_suite(const std::vector<Cube>& tops, int count, std::uint64_t seed, FamilyStrategy strategy,
                            const RealField* field, int pair_generations) {
  ProbeSuite suite;
  suite.tops = tops;
  suite.seed = seed;
  suite.count = count;
  suite.strategy = strategy;
  suite.families.resize(tops.size());
  parallel_for(tops.size(), [&](std::size_t i) {
    suite.families[i] = sample_disjoint_families(tops[i], count, hash_combine(seed, i), strategy, field);
  });
  for (const Cube& q : tops) {
    std::vector<Cube> level{q};
    suite.pairs.emplace_back(q, q);
    for (int g = 1; g <= pair_generations; ++g) {
      std::vector<Cube> next;
      for (const Cube& c : level)
        if (c.has_children())
          for (const Cube& ch : c.children()) next.push_back(ch);
      for (const Cube& r : next) suite.pairs.emplace_back(r, q);
      level = std::move(next);
    }
  }
  return suite;
}

double dr_ratio(const Functional& a, const CubeFamily& family, const Cube& q, double r, const Weight* mu,
                const Functional* top) {
  auto measure = [&](const Cube& c) { return mu ? mu->mass(c) : c.measure(); };
  std::vector<double> terms;
  terms.reserve(family.size());
  for (const Cube& c : family) terms.push_back(std::pow(a(c), r) * measure(c));
  const double num = std::pow(pairwise_sum(terms), 1.0 / r);
  const double den = (top ? (*top)(q) : a(q)) * std::pow(measure(q), 1.0 / r);
  if (den == 0) return num == 0 ? 0.0 : kInfinity;
  return num / den;
}

ConditionReport estimate_condition(const Functional& a, ConditionKind kind, double r, const Weight* mu,
                                   const ProbeSuite& suite, const Functional* bar, double cap) {
  if ((kind == ConditionKind::d_r || kind == ConditionKind::pair_d_q) && suite.families.empty())
    throw ParameterError("estimate_condition: no probe families");
  if (kind == ConditionKind::pair_d_q && !bar) throw ParameterError("pair-D_q needs the bar functional");
  if ((kind == ConditionKind::d_r || kind == ConditionKind::pair_d_q) && !(r >= 1))
    throw ParameterError("D_r needs r >= 1");
  ConditionReport rep;
  rep.kind = kind;
  rep.r = r;
  rep.weighted = mu != nullptr;
  rep.seed = suite.seed;
  rep.family_count = suite.count;
  rep.strategy = to_string(suite.strategy);
  rep.cap = cap;
  auto ratio = [](double num, double den) { return den == 0 ? (num == 0 ? 0.0 : kInfinity) : num / den; };
  std::vector<std::pair<double, Cube>> worst;
  switch (kind) {
    case ConditionKind::d_r:
    case ConditionKind::pair_d_q: {
      worst.resize(suite.tops.size(), {0.0, Cube()});
      parallel_for(suite.tops.size(), [&](std::size_t i) {
        const Cube& q = suite.tops[i];
        double best = 0;
        for (const CubeFamily& fam : suite.families[i])
          best = std::max(best, dr_ratio(a, fam, q, r, mu, kind == ConditionKind::pair_d_q ? bar : nullptr));
        worst[i] = {best, q};
      });
      for (const auto& fams : suite.families) rep.probes += fams.size();
      break;
    }
    case ConditionKind::d_infinity:
    case ConditionKind::d_zero: {
      worst.resize(suite.pairs.size(), {0.0, Cube()});
      parallel_for(suite.pairs.size(), [&](std::size_t i) {
        const auto& [R, Q] = suite.pairs[i];
        if (kind == ConditionKind::d_zero && Q.side_cells() > 4 * R.side_cells()) return;
        worst[i] = {ratio(a(R), a(Q)), R};
      });
      rep.probes = suite.pairs.size();
      break;
    }
    case ConditionKind::doubling: {
      worst.resize(suite.pairs.size(), {0.0, Cube()});
      parallel_for(suite.pairs.size(), [&](std::size_t i) {
        const Cube& R = suite.pairs[i].first;
        worst[i] = {ratio(a(dilated(R, 2)), a(R)), R};
      });
      rep.probes = suite.pairs.size();
      break;
    }
  }
  double best = 1;
  for (const auto& [v, q] : worst)
    if (v > best || (std::isinf(v) && !std::isinf(best))) {
      best = v;
      rep.worst = q;
    }
  rep.measured_constant = best;
  rep.passed = std::isfinite(best) && best <= cap;
  return rep;
}

}  // namespace oscillab
