#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "oscillab/cube.hpp"
#include "oscillab/cubes.hpp"
#include "oscillab/family.hpp"
#include "oscillab/field.hpp"
#include "oscillab/sequence.hpp"
#include "oscillab/weight.hpp"

namespace oscillab {

enum class FunctionalKind {
  bmo_lipschitz,      // l(Q)^alpha = |Q|^{alpha/n}
  fractional,         // l(Q)^alpha (u(Q)/|Q|)^{1/s}
  reduced_poincare,   // l(Q) (avg_Q h^s)^{1/s}
  expanded_poincare,  // sum_k gamma_k l(2^k Q) (avg_{2^k Q} h^s)^{1/s}
  tilde_of,           // sum_{k>=1} gamma~_k a(2^k Q)
  bar_of,             // expanded form with gamma-bar coefficients
  constant,
  custom_table,       // explicit values per cube
  measured            // evaluated by a supplied rule, e.g. a measured oscillation
};

std::string to_string(FunctionalKind kind);

// Periodic summed-area table in long double for O(1) cube sums.
class BoxTable {
 public:
  BoxTable() = default;
  BoxTable(int dimension, int resolution, const std::vector<double>& values);
  long double sum(const Cube& q) const;

 private:
  int dim_ = 1;
  int m_ = 1;
  std::vector<long double> table_;
};

class Functional {
 public:
  struct Impl;

  static Functional constant(double c);
  static Functional bmo_lipschitz(double alpha);
  static Functional fractional(double alpha, double s, std::shared_ptr<const Weight> u);
  static Functional reduced_poincare(std::shared_ptr<const RealField> h, double s,
                                     std::shared_ptr<const Weight> w = {});
  static Functional expanded_poincare(std::shared_ptr<const RealField> h, double s, Sequence gamma,
                                      std::shared_ptr<const Weight> w = {});
  static Functional custom_table(std::vector<std::pair<Cube, double>> rows);
  static Functional measured(std::string name, std::function<double(const Cube&)> rule);

  FunctionalKind kind() const;
  double operator()(const Cube& q) const;
  std::string describe() const;

  // Expanded structure (expanded-poincare, bar-of and collapsed tilde-of).
  bool expanded() const;
  const Sequence& coefficients() const;
  double s() const;
  const std::shared_ptr<const RealField>& h() const;
  const std::shared_ptr<const Weight>& weight() const;
  // Base functional of a non-collapsed tilde-of.
  const Functional* base() const;

  // Builders used by tilde_expand / bar_expand.
  static Functional expanded_like(const Functional& shape, FunctionalKind kind, Sequence coefficients);
  static Functional tilde_of(const Functional& base, Sequence gamma_tilde);

 private:
  explicit Functional(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

inline double eval(const Functional& a, const Cube& q) { return a(q); }

// gamma~ from the profile: gamma~_1 = 1, gamma~_2 = max{1, a2, a3}, gamma~_3 = max{a2, a3, a4},
// gamma~_4 = max{a3, a4, a5, b2}, and for k >= 5
// gamma~_k = max{a_{k-2}, 2^{kn/p0} a_{k-1}, 2^{kn/p0} a_k, a_{k+1}, b_{k-3}, b_{k-2}}.
Sequence tilde_coefficients(const OffDiagonalProfile& profile);
// Exponential-theorem weights: eta_1 = 1, eta_k = a_k (k = 2, 3, 4), eta_k = max{a_k, a_{k-3}}.
Sequence exponential_weights(const OffDiagonalProfile& profile);
// Alternative-theorem weights: eta_1 = 1, eta_k = a_k 2^{kn/p0}.
Sequence alternative_weights(const OffDiagonalProfile& profile);

Functional tilde_expand(const Functional& a, const OffDiagonalProfile& profile);
Functional bar_expand(const Functional& a, double q, double theta, int dimension);
// sum_{k >= 1} eta_k a(2^k Q), collapsing onto the torus after saturation.
double expanded_sum(const Functional& a, const Sequence& eta, const Cube& q);

enum class ConditionKind { d_r, d_infinity, d_zero, doubling, pair_d_q };
std::string to_string(ConditionKind kind);

struct ProbeSuite {
  std::vector<Cube> tops;
  std::vector<std::vector<CubeFamily>> families;  // per top cube
  std::vector<std::pair<Cube, Cube>> pairs;        // (R, Q) with R inside Q
  std::uint64_t seed = 0;
  int count = 0;
  FamilyStrategy strategy = FamilyStrategy::dyadic_packing;
};

// Families from sample_disjoint_families for each top cube, plus nested pairs
// (R, Q) with R a dyadic descendant of Q up to `pair_generations` below.
ProbeSuite make_probe_suite(const std::vector<Cube>& tops, int count, std::uint64_t seed, FamilyStrategy strategy,
                            const RealField* field = nullptr, int pair_generations = 3);

struct ConditionReport {
  ConditionKind kind = ConditionKind::d_r;
  double r = 1;
  double measured_constant = 1;
  bool weighted = false;
  std::uint64_t seed = 0;
  int family_count = 0;
  std::size_t probes = 0;
  std::string strategy;
  double cap = 0;
  bool passed = false;
  Cube worst;
};

// Measured constant of the requested condition on the probe suite (floored at 1).
// pair_d_q evaluates `a` (the tilde functional) on the family and `bar` on Q.
ConditionReport estimate_condition(const Functional& a, ConditionKind kind, double r, const Weight* mu,
                                   const ProbeSuite& suite, const Functional* bar = nullptr, double cap = 1e6);

// (sum_i a(Q_i)^r mu(Q_i))^{1/r} / (a(Q) mu(Q)^{1/r}) for a single family.
double dr_ratio(const Functional& a, const CubeFamily& family, const Cube& q, double r, const Weight* mu,
                const Functional* top = nullptr);

}  // namespace oscillab
