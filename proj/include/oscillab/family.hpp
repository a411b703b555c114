#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oscillab/cube.hpp"
#include "oscillab/elliptic.hpp"
#include "oscillab/field.hpp"
#include "oscillab/norms.hpp"

namespace oscillab {

enum class FamilyKind { classical_average, extended_average, semigroup };

FamilyKind parse_family_kind(const std::string& name);
std::string to_string(FamilyKind kind);

struct Exponents {
  double p0 = 1;
  double q0 = kInfinity;
};

struct DecayFit {
  bool valid = false;
  double C = 0;          // envelope: alpha_k <= C exp(-c 4^k) on the fitted range
  double c = 0;
  double intercept = 0;  // least-squares log C
  double residual = 0;   // ||y - yhat|| / ||y||, y = log alpha_k
  int k_first = 0;
  int k_last = 0;
};

struct OffDiagonalProfile {
  Exponents exponents;
  int dimension = 1;
  // Indexed by k; entries 0 and 1 are unused and zero.
  std::vector<double> alpha;
  std::vector<double> beta;
  std::string probe_description;
  std::size_t cubes = 0;
  std::size_t probes = 0;
  DecayFit fit;

  double alpha_at(int k) const { return k >= 0 && k < static_cast<int>(alpha.size()) ? alpha[k] : 0.0; }
  double beta_at(int k) const { return k >= 0 && k < static_cast<int>(beta.size()) ? beta[k] : 0.0; }
};

class OscillationFamily {
 public:
  FamilyKind kind() const { return kind_; }
  const Exponents& exponents() const { return exponents_; }
  int power() const { return power_; }
  const std::shared_ptr<const EllipticOperator>& op() const { return op_; }
  // B_Q depends only on l(Q).
  bool side_determined() const { return kind_ == FamilyKind::semigroup; }
  const std::optional<OffDiagonalProfile>& profile() const { return profile_; }
  OscillationFamily with_profile(OffDiagonalProfile p) const;
  OscillationFamily with_exponents(Exponents e) const;

  ComplexField apply_b(const ComplexField& f, const Cube& q) const;
  ComplexField apply_a(const ComplexField& f, const Cube& q) const;
  // B for side-determined families, by sidelength in cells.
  ComplexField apply_b_side(const ComplexField& f, int side_cells) const;

  friend OscillationFamily make_family(FamilyKind, Exponents, std::shared_ptr<const EllipticOperator>, int);

 private:
  FamilyKind kind_ = FamilyKind::classical_average;
  Exponents exponents_;
  std::shared_ptr<const EllipticOperator> op_;
  int power_ = 1;
  std::optional<OffDiagonalProfile> profile_;
};

OscillationFamily make_family(FamilyKind kind, Exponents exponents, std::shared_ptr<const EllipticOperator> op = {},
                              int N = 1);

// Mean of f over the cells of Q (pairwise sums of real and imaginary parts).
Complex cube_mean(const ComplexField& f, const Cube& q);
ComplexField restrict_to(const ComplexField& f, const Cube& q);
ComplexField restrict_outside(const ComplexField& f, const Cube& q);

// M#_{B,p} f (x) = sup_{Q containing x} l(Q)^{-alpha} (avg_Q |B_Q f|^p)^{1/p} over the
// restricted cube family of maximal_function. One field per requested p.
std::vector<RealField> sharp_maximal(const OscillationFamily& F, const ComplexField& f, const std::vector<double>& ps,
                                     double alpha = 0);
RealField sharp_maximal(const OscillationFamily& F, const ComplexField& f, double p, double alpha = 0);

struct ProfileOptions {
  int fit_first = 3;
  int fit_last = -1;  // -1: last positive entry before saturation
};

// Probe patterns (e.g. the constant 1 and random signs) are restricted to the
// regions 4Q and 2^K Q \ 2^{K-1} Q; alpha_2 from 4Q into 2Q, alpha_K as the max over
// targets 2^j Q (1 <= j <= K-2), beta_K from nested R in Q into 2R.
OffDiagonalProfile measure_offdiagonal(const OscillationFamily& F, const std::vector<ComplexField>& patterns,
                                       const std::vector<Cube>& cubes, const ProfileOptions& options = {});

// Constant one plus `random_signs` seeded +-1 fields.
std::vector<ComplexField> default_probe_patterns(int dimension, int resolution, int random_signs, std::uint64_t seed);

// Source regions used by the profiler: index K -> (region cell set as cube pair, averaging cube 2^K Q).
struct ProbeRegion {
  int k;
  Cube outer;                  // 2^K Q (4Q for K = 2)
  std::optional<Cube> inner;   // 2^{K-1} Q removed for K >= 3
};
std::vector<ProbeRegion> probe_regions(const Cube& q);

DecayFit fit_decay(const std::vector<double>& alpha, int first, int last);

struct AuditReport {
  FamilyKind kind;
  double commutator = 0;      // max ||B_Q B_R f - B_R B_Q f||_{p0} / ||f||_{p0}
  double uniform_bound = 0;   // max ||B_Q f||_{p0} / ||f||_{p0}
  bool localization = false;  // A_Q f = chi_2Q A_Q(f chi_2Q)
  double localization_defect = 0;
  bool replace_comm = false;  // A_R A_Q f = A_Q f on 2R for R in Q
  double replace_comm_defect = 0;
  bool side_determined = false;
  std::size_t pairs = 0;
  std::size_t probes = 0;
};

AuditReport audit_family(const OscillationFamily& F, const std::vector<ComplexField>& probes,
                         const std::vector<std::pair<Cube, Cube>>& pairs);

}  // namespace oscillab
