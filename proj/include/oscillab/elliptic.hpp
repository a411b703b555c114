#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oscillab/field.hpp"

namespace oscillab {

using CoefficientMatrix = Eigen::Matrix2cd;

enum class SolverKind { automatic, spectral, crank_nicolson, eigendecomposition };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

struct Ellipticity {
  double lambda = 0;  // min over cells of the smallest eigenvalue of Re A = (A + A^*)/2
  double Lambda = 0;  // max over cells of the operator norm of A
};

// L = -div(A grad) on the torus, A(x) an n x n complex matrix per cell.
//
// Discretisation (finite differences, conservative): L = sum_ab D_a^T C_ab D_b, with
// D_a face differences (cell pairs) for the diagonal entries and vertex gradients for
// the mixed entries, coefficients averaged onto faces / vertices. Rows sum to zero.
//
// Semigroup routes: spectral (constant A, exact multiplier exp(-t 4 pi^2 k.Ak)),
// Crank-Nicolson with sparse LU, or a dense eigendecomposition of a Hermitian L.
class EllipticOperator {
 public:
  EllipticOperator(int dimension, int resolution, std::vector<CoefficientMatrix> coefficients,
                   SolverKind solver = SolverKind::automatic);

  static EllipticOperator constant(int dimension, int resolution, const CoefficientMatrix& a,
                                   SolverKind solver = SolverKind::automatic);
  static EllipticOperator laplacian(int dimension, int resolution, SolverKind solver = SolverKind::automatic);

  template <typename Fn>
  static EllipticOperator from_function(int dimension, int resolution, Fn&& a_of_x,
                                        SolverKind solver = SolverKind::automatic) {
    std::size_t n = dimension == 1 ? resolution : static_cast<std::size_t>(resolution) * resolution;
    std::vector<CoefficientMatrix> coeffs(n);
    for (std::size_t i = 0; i < n; ++i) coeffs[i] = a_of_x(ComplexField::center(dimension, resolution, i));
    return EllipticOperator(dimension, resolution, std::move(coeffs), solver);
  }

  int dimension() const;
  int resolution() const;
  bool constant_coefficients() const;
  bool hermitian() const;
  bool real_symmetric() const;
  Ellipticity ellipticity() const;
  SolverKind solver() const;  // resolved route

  // Configured (p_-, p_+) range; metadata only.
  std::optional<std::pair<double, double>> exponent_range() const;
  EllipticOperator with_exponent_range(double p_minus, double p_plus) const;
  EllipticOperator with_solver(SolverKind solver) const;

  // The same L on the grid (finite-difference matrix).
  const Eigen::SparseMatrix<Complex>& matrix() const;

  // e^{-tL} f along the resolved route.
  ComplexField semigroup(double t, const ComplexField& f) const;
  // L f, consistent with the route used by semigroup().
  ComplexField generator(const ComplexField& f) const;

  // Upper bound on |spectrum| of L along the resolved route (symbol maximum or Gershgorin).
  double spectral_bound() const;

  // Number of Crank-Nicolson step refinements triggered by positivity violations.
  std::size_t positivity_refinements() const;

  struct State;

 private:
  explicit EllipticOperator(std::shared_ptr<State> state);
  std::shared_ptr<State> state_;
};

ComplexField semigroup_apply(const EllipticOperator& L, double t, const ComplexField& f);

// U_s f = ( (1/s) int_0^s e^{-lambda L} d lambda )^N f by composite Gauss-Legendre, 16 nodes
// per panel, panels [s 2^{-j-1}, s 2^{-j}] graded toward 0 until s 2^{-P} spectral_bound() <= 4.
std::vector<std::pair<double, double>> u_s_nodes(const EllipticOperator& L, double s);
ComplexField u_s_apply(const EllipticOperator& L, double s, int N, const ComplexField& f);

// Gauss-Legendre nodes and weights on [-1, 1].
const std::vector<std::pair<double, double>>& gauss_legendre_16();

}  // namespace oscillab
