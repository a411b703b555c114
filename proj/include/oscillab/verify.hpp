#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oscillab/config.hpp"
#include "oscillab/cubes.hpp"
#include "oscillab/family.hpp"
#include "oscillab/functionals.hpp"
#include "oscillab/weights.hpp"

namespace oscillab {

struct CubeRow {
  Cube cube;
  double numerator = 0;
  double denominator = 0;
  double ratio = 0;
};

// num / den with 0/0 = 0 and x/0 = inf.
double safe_ratio(double numerator, double denominator);

// Constants finite and max/min across rungs within `slack` (all-zero passes).
bool ladder_stable(const std::vector<double>& values, double slack = 2);

struct HypothesisReport {
  double constant = 0;         // sup over (Q, k)
  double k0_constant = 0;
  double k1_constant = 0;
  double higher_constant = 0;  // sup over k >= 1
  int k_max = 0;
  bool side_reduction = false;
  double dp0_constant = 0;
  double side_reduction_bound = 0;  // k0_constant * ||a||_{D_p0}
  std::vector<CubeRow> rows;        // per cube, worst k
  Cube worst;
  int worst_k = 0;
};

// One rung of the resolution ladder with everything the harnesses share.
struct Rung {
  int resolution = 0;
  ComplexField f;
  std::shared_ptr<const Weight> weight;
  OscillationFamily family;
  std::shared_ptr<const Functional> a;
  std::vector<Cube> cubes;
  std::vector<ComplexField> patterns;
  AuditReport audit;
  std::optional<WeightReport> weight_report;
  double theta = 1;
  std::optional<HypothesisReport> hypothesis;
  std::optional<ConditionReport> dp0;
};

struct Experiment {
  ExperimentConfig config;
  std::vector<Rung> rungs;
};

// All dyadic cubes with at least `min_side_cells` cells per side (largest first),
// then seeded off-dyadic cubes with power-of-two sides.
std::vector<Cube> sample_cubes(int dimension, int resolution, const SampleSpec& spec, std::uint64_t seed);
std::vector<Cube> profile_cubes(int dimension, int resolution, const ProfileSpec& spec, std::uint64_t seed);
// Tops for condition probes: dyadic cubes of the sample with children, evenly strided.
std::vector<Cube> condition_tops(const std::vector<Cube>& cubes, int max_tops);

Functional build_functional(const Json& spec, const ComplexField& f, const OscillationFamily& family,
                            std::shared_ptr<const Weight> weight, const std::vector<Cube>& cubes,
                            const std::string& path = "functional");

Rung build_rung(const ExperimentConfig& config, int resolution, bool weighted = true);
// With `hypotheses`, every rung also carries its hypothesis report.
Experiment prepare(const ExperimentConfig& config, bool weighted = true, bool hypotheses = true);

// Calls fn(i, B_{Q_i} f) in parallel; side-determined families share one field per side.
void for_each_oscillation(const OscillationFamily& F, const ComplexField& f, const std::vector<Cube>& cubes,
                          const std::function<void(std::size_t, const ComplexField&)>& fn);

// sup of (avg_{2^k Q} |B_Q f|^p0)^{1/p0} / a(2^k Q) over the sample and k <= k_max
// (k_max < 0: up to saturation, the saturated dilation being the torus).
HypothesisReport check_hypothesis(const OscillationFamily& F, const ComplexField& f, const Functional& a, double p0,
                                  const std::vector<Cube>& cubes, int k_max = -1,
                                  const ConditionReport* dp0 = nullptr);

struct RungReport {
  int resolution = 0;
  double hypothesis_constant = 0;
  double constant = 0;
  Cube worst;
  std::vector<CubeRow> rows;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
  std::optional<ConditionReport> condition;
  std::optional<HypothesisReport> hypothesis;
};

struct VerifyReport {
  std::string harness;
  std::string variant;
  double hypothesis_constant = 0;
  double conclusion_constant = 0;
  std::vector<RungReport> per_resolution;
  bool passed = false;
  std::string failure;
};

// The denominator of the conclusion for a variant together with the functional whose
// D_q (or pair) condition the theorem requires.
struct Denominator {
  std::function<double(const Cube&)> value;
  std::shared_ptr<const Functional> condition_functional;
  std::shared_ptr<const Functional> bar;  // pair variant
  std::string description;
};
Denominator make_denominator(const Rung& rung, Variant variant, double q);

ConditionReport condition_for(const Rung& rung, const ExperimentConfig& config, const Denominator& den, double r,
                              const Weight* mu);

VerifyReport verify_hypothesis(const Experiment& e);
VerifyReport verify_weak(const Experiment& e);
VerifyReport verify_strong(const Experiment& e, double r);
VerifyReport verify_exponential(const Experiment& e);

struct GoodLambdaRow {
  Cube cube;
  double t = 0;
  double lhs = 0;
  double structural = 0;
  double tail = 0;
  double c = 0;
  bool whitney_branch = false;
  std::size_t whitney_cubes = 0;
  std::size_t floor_cubes = 0;
  bool whitney_ok = true;
};

struct GoodLambdaRung {
  int resolution = 0;
  double c = 0;
  double c0 = 0;
  double bq2_defect = 0;
  std::vector<GoodLambdaRow> rows;
};

struct GoodLambdaReport {
  double s = 0;
  double lambda = 0;
  std::vector<GoodLambdaRung> per_resolution;
  bool trivial_branch = false;
  bool whitney_branch = false;
  bool whitney_invariants = true;
  std::size_t decompositions = 0;
  std::size_t floor_cubes = 0;
  bool passed = false;
  std::string failure;
};

GoodLambdaReport verify_good_lambda(const Experiment& e, double s, double lambda, int points);

struct BmoRow {
  std::string field;
  double alpha = 0;
  std::vector<double> seminorms;  // per p
  double ratio = 1;               // max/min over p
  bool monotone = true;
  std::vector<double> jn2;        // measured constant per p
};

struct BmoRung {
  int resolution = 0;
  std::vector<BmoRow> rows;
};

struct BmoReport {
  std::vector<double> ps;
  std::string situation;
  std::vector<BmoRung> per_resolution;
  bool monotone = true;
  bool passed = false;
  std::string failure;
};

BmoReport verify_bmo_equivalence(const Experiment& e, const std::vector<double>& ps);

struct RhSetReport {
  double p = 0;
  double constant = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = 0;  // max lhs / rhs
};

RhSetReport rh_set_check(const Rung& rung, double p, std::uint64_t seed, std::size_t max_cubes = 32);

}  // namespace oscillab
