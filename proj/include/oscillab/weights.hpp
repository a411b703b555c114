#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "oscillab/cubes.hpp"
#include "oscillab/weight.hpp"

namespace oscillab {

struct WeightReport {
  std::map<double, double> ap;  // p -> measured A_p constant (p = 1 uses the ess-inf form)
  std::map<double, double> rh;  // p -> measured RH_p constant
  double theta = 1;
  std::size_t cubes_sampled = 0;
  std::uint64_t seed = 0;
};

double ap_ratio(const Weight& w, const Cube& q, double p);
double rh_ratio(const Weight& w, const Cube& q, double p);

// Maxima of the A_p / RH_p ratios over the sample (floored at 1) and the
// largest theta with w(S)/w(Q) <= 4 (|S|/|Q|)^theta on sampled subsets S.
WeightReport weight_report(const Weight& w, const std::vector<double>& ps, const std::vector<Cube>& cubes,
                           std::uint64_t seed);

// Subsets S used for theta: the heaviest-child chain, dyadic descendants down to 3 generations
// and seeded sub-boxes.
std::vector<Cube> theta_subsets(const Weight& w, const Cube& q, std::uint64_t seed);

struct RhSubsetCheck {
  double lhs;
  double rhs;
  bool holds() const { return lhs <= rhs * (1 + 1e-12); }
};

// (w(E)/w(Q), C (|E|/|Q|)^{1/p'}).
RhSubsetCheck rh_subset_check(const Weight& w, const Cube& q, const CellSet& e, double p, double constant);

}  // namespace oscillab
