#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oscillab/cubes.hpp"
#include "oscillab/elliptic.hpp"
#include "oscillab/family.hpp"
#include "oscillab/field.hpp"
#include "oscillab/sequence.hpp"
#include "oscillab/weight.hpp"

namespace oscillab {

using Json = nlohmann::json;

struct OperatorSpec {
  std::string coefficients = "identity";  // identity | constant | sinusoidal
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
  double mean = 1.25;
  double amplitude = 0.75;
  SolverKind solver = SolverKind::automatic;
  std::optional<std::pair<double, double>> exponent_range;
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::classical_average;
  Exponents exponents;
  int N = 1;
  OperatorSpec op;
};

struct SampleSpec {
  int min_side_cells = 8;
  int off_dyadic = 32;
  int max_cubes = 0;  // 0: keep all
};

struct ProfileSpec {
  double sidelength = 1.0 / 64;
  int cubes = 4;
  int patterns = 2;
  int fit_first = 3;
  int fit_last = -1;
};

struct ConditionSpec {
  int families = 16;
  FamilyStrategy strategy = FamilyStrategy::dyadic_packing;
  double cap = 1e6;
  int pair_generations = 3;
  int max_tops = 64;
};

struct GoodLambdaSpec {
  double s = 8;
  double lambda = 0.5;
  int points = 20;
  int cubes = 4;
};

struct BmoSpec {
  std::vector<double> ps{1, 2, 4};
  std::vector<Json> fields;
  std::vector<double> alphas{0};
  double jn2_s = 0;  // 0: twice the largest p
};

enum class Variant { classical, tilde, pair, alternative, alternative_bis, weighted };

Variant parse_variant(const std::string& name);
std::string to_string(Variant v);

struct ExperimentConfig {
  std::string name;
  int dimension = 1;
  std::vector<int> ladder;
  std::uint64_t seed = 1;
  Json field;
  Json weight;  // null: unweighted
  Json functional;
  FamilySpec family;
  double q = 2;
  double r = 1.5;
  std::vector<std::string> harnesses;
  Variant variant = Variant::tilde;
  SampleSpec sample;
  ProfileSpec profile;
  ConditionSpec condition;
  GoodLambdaSpec good_lambda;
  BmoSpec bmo;
  double rh_p = 1.5;
  double theta = 0;  // 0: measured from the weight
  int hypothesis_kmax = -1;
  Json source;

  bool wants(const std::string& harness) const;
};

// Throws ConfigError naming the offending key path.
ExperimentConfig parse_config(const Json& doc);
// `overrides` are dotted-path assignments key=value; values parse as JSON when possible.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
void apply_override(Json& doc, const std::string& assignment);

double parse_exponent(const Json& value, const std::string& path);

ComplexField build_field(const Json& spec, int dimension, int resolution, std::uint64_t seed,
                         const std::string& path = "field");
std::shared_ptr<const Weight> build_weight(const Json& spec, int dimension, int resolution,
                                           const std::string& path = "weight");
std::shared_ptr<const EllipticOperator> build_operator(const OperatorSpec& spec, int dimension, int resolution);
Sequence build_sequence(const Json& spec, const std::string& path);
// |grad f| by centered periodic differences.
RealField gradient_modulus(const ComplexField& f);

}  // namespace oscillab
