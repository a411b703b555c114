#include "oscillab/elliptic.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <unsupported/Eigen/FFT>

namespace oscillab {

namespace {

using SparseC = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;

std::size_t cells(int dim, int m) { return dim == 1 ? m : static_cast<std::size_t>(m) * m; }

void fft_lines(std::vector<Complex>& data, int dim, int m, bool inverse) {
  thread_local Eigen::FFT<double> fft;
  std::vector<Complex> in(m), out(m);
  auto run = [&](std::size_t start, std::size_t stride) {
    for (int i = 0; i < m; ++i) in[i] = data[start + i * stride];
    if (inverse)
      fft.inv(out, in);
    else
      fft.fwd(out, in);
    for (int i = 0; i < m; ++i) data[start + i * stride] = out[i];
  };
  if (dim == 1) {
    run(0, 1);
    return;
  }
  for (int y = 0; y < m; ++y) run(static_cast<std::size_t>(y) * m, 1);
  for (int x = 0; x < m; ++x) run(static_cast<std::size_t>(x), static_cast<std::size_t>(m));
}

int frequency(int k, int m) { return k <= m / 2 ? (k == m / 2 ? -k : k) : k - m; }

// Builds D^T diag(c) D' as triplets, given rows of D and D' (same row set).
struct DifferenceRow {
  std::vector<std::pair<std::size_t, double>> entries;
};

void accumulate(std::vector<Triplet>& out, const std::vector<DifferenceRow>& da, const std::vector<DifferenceRow>& db,
                const std::vector<Complex>& c) {
  for (std::size_t r = 0; r < da.size(); ++r) {
    if (c[r] == Complex(0)) continue;
    for (auto [i, wa] : da[r].entries)
      for (auto [j, wb] : db[r].entries) out.emplace_back(i, j, wa * c[r] * wb);
  }
}

SparseC build_matrix(int dim, int m, const std::vector<CoefficientMatrix>& a) {
  const double h = 1.0 / m;
  const std::size_t n = cells(dim, m);
  std::vector<Triplet> trip;
  auto idx = [&](int x, int y) {
    x = ((x % m) + m) % m;
    y = ((y % m) + m) % m;
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(m) * (dim == 2 ? y : 0);
  };
  if (dim == 1) {
    std::vector<DifferenceRow> d(m);
    std::vector<Complex> c(m);
    for (int x = 0; x < m; ++x) {
      d[x].entries = {{idx(x + 1, 0), 1.0 / h}, {idx(x, 0), -1.0 / h}};
      c[x] = 0.5 * (a[idx(x, 0)](0, 0) + a[idx(x + 1, 0)](0, 0));
    }
    accumulate(trip, d, d, c);
  } else {
    std::vector<DifferenceRow> dx(n), dy(n), gx(n), gy(n);
    std::vector<Complex> c11(n), c22(n), c12(n), c21(n);
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x) {
        const std::size_t r = idx(x, y);
        // Face (x+1/2, y), face (x, y+1/2), vertex (x+1/2, y+1/2).
        dx[r].entries = {{idx(x + 1, y), 1.0 / h}, {idx(x, y), -1.0 / h}};
        dy[r].entries = {{idx(x, y + 1), 1.0 / h}, {idx(x, y), -1.0 / h}};
        c11[r] = 0.5 * (a[idx(x, y)](0, 0) + a[idx(x + 1, y)](0, 0));
        c22[r] = 0.5 * (a[idx(x, y)](1, 1) + a[idx(x, y + 1)](1, 1));
        const double q = 0.5 / h;
        gx[r].entries = {{idx(x + 1, y), q}, {idx(x + 1, y + 1), q}, {idx(x, y), -q}, {idx(x, y + 1), -q}};
        gy[r].entries = {{idx(x, y + 1), q}, {idx(x + 1, y + 1), q}, {idx(x, y), -q}, {idx(x + 1, y), -q}};
        const std::size_t v[4] = {idx(x, y), idx(x + 1, y), idx(x, y + 1), idx(x + 1, y + 1)};
        c12[r] = 0.25 * (a[v[0]](0, 1) + a[v[1]](0, 1) + a[v[2]](0, 1) + a[v[3]](0, 1));
        c21[r] = 0.25 * (a[v[0]](1, 0) + a[v[1]](1, 0) + a[v[2]](1, 0) + a[v[3]](1, 0));
      }
    accumulate(trip, dx, dx, c11);
    accumulate(trip, dy, dy, c22);
    // -d_x(A12 d_y u) - d_y(A21 d_x u): the row operator is the transpose of the left gradient.
    accumulate(trip, gx, gy, c12);
    accumulate(trip, gy, gx, c21);
  }
  SparseC L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  L.setFromTriplets(trip.begin(), trip.end());
  L.makeCompressed();
  return L;
}

}  // namespace

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "automatic" || name == "auto") return SolverKind::automatic;
  if (name == "spectral") return SolverKind::spectral;
  if (name == "crank-nicolson") return SolverKind::crank_nicolson;
  if (name == "eigendecomposition") return SolverKind::eigendecomposition;
  throw ParameterError("unknown solver '" + name + "'");
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::automatic: return "automatic";
    case SolverKind::spectral: return "spectral";
    case SolverKind::crank_nicolson: return "crank-nicolson";
    case SolverKind::eigendecomposition: return "eigendecomposition";
  }
  return "?";
}

struct Core {
  int dim = 1;
  int m = 1;
  std::vector<CoefficientMatrix> coeffs;
  bool constant = false;
  bool hermitian = false;
  bool real_symmetric = false;
  Ellipticity ellipticity;
  SparseC L;
  std::vector<double> symbol_re;  // spectral symbol (constant coefficients only)
  std::vector<double> symbol_im;

  std::once_flag eigen_once;
  Eigen::MatrixXd eig_vectors_real;
  Eigen::MatrixXcd eig_vectors_complex;
  Eigen::VectorXd eig_values;

  std::mutex lu_mutex;
  std::map<double, std::shared_ptr<Eigen::SparseLU<SparseC>>> lu_cache;
  std::atomic<std::size_t> refinements{0};

  void build_eigen() {
    std::call_once(eigen_once, [&] {
      if (real_symmetric) {
        Eigen::MatrixXd dense = Eigen::MatrixXd(L.real());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
        eig_vectors_real = es.eigenvectors();
        eig_values = es.eigenvalues();
      } else {
        Eigen::MatrixXcd dense = Eigen::MatrixXcd(L);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
        if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
        eig_vectors_complex = es.eigenvectors();
        eig_values = es.eigenvalues();
      }
    });
  }

  std::shared_ptr<Eigen::SparseLU<SparseC>> factor(double delta) {
    std::lock_guard<std::mutex> lock(lu_mutex);
    auto it = lu_cache.find(delta);
    if (it != lu_cache.end()) return it->second;
    SparseC I(L.rows(), L.cols());
    I.setIdentity();
    SparseC M = I + (0.5 * delta) * L;
    auto lu = std::make_shared<Eigen::SparseLU<SparseC>>();
    lu->analyzePattern(M);
    lu->factorize(M);
    if (lu->info() != Eigen::Success) throw NumericError("Crank-Nicolson factorisation failed");
    if (lu_cache.size() > 16) lu_cache.clear();
    lu_cache.emplace(delta, lu);
    return lu;
  }
};

struct EllipticOperator::State {
  std::shared_ptr<Core> core;
  SolverKind route = SolverKind::automatic;
  std::optional<std::pair<double, double>> range;
};

EllipticOperator::EllipticOperator(std::shared_ptr<State> state) : state_(std::move(state)) {}

EllipticOperator::EllipticOperator(int dimension, int resolution, std::vector<CoefficientMatrix> coefficients,
                                   SolverKind solver) {
  if (dimension != 1 && dimension != 2) throw ParameterError("operator dimension must be 1 or 2");
  if (!is_power_of_two(resolution)) throw ParameterError("operator resolution must be a power of two");
  const std::size_t n = cells(dimension, resolution);
  if (coefficients.size() != n) throw DataError("coefficient field has the wrong number of cells");
  auto core = std::make_shared<Core>();
  core->dim = dimension;
  core->m = resolution;
  core->coeffs = std::move(coefficients);
  core->constant = true;
  core->hermitian = true;
  core->real_symmetric = true;
  double lam = std::numeric_limits<double>::infinity();
  double Lam = 0;
  for (std::size_t i = 0; i < n; ++i) {
    CoefficientMatrix a = core->coeffs[i];
    if (dimension == 1) a(0, 1) = a(1, 0) = a(1, 1) = 0;
    core->coeffs[i] = a;
    if (!a.allFinite()) throw DataError("coefficient at cell " + std::to_string(i) + " is not finite");
    const int d = dimension;
    Eigen::MatrixXcd ad = a.topLeftCorner(d, d);
    Eigen::MatrixXcd re = 0.5 * (ad + ad.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(re);
    lam = std::min(lam, es.eigenvalues().minCoeff());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ad);
    Lam = std::max(Lam, svd.singularValues()(0));
    if ((ad - ad.adjoint()).cwiseAbs().maxCoeff() > 1e-14) core->hermitian = false;
    if (ad.imag().cwiseAbs().maxCoeff() != 0 || (ad - ad.transpose()).cwiseAbs().maxCoeff() > 1e-14)
      core->real_symmetric = false;
    if (i > 0 && (a - core->coeffs[0]).cwiseAbs().maxCoeff() != 0) core->constant = false;
  }
  if (!(lam > 0)) throw DataError("coefficients are not elliptic (lambda = " + std::to_string(lam) + ")");
  core->ellipticity = {lam, Lam};
  core->L = build_matrix(dimension, resolution, core->coeffs);
  if (core->constant) {
    const CoefficientMatrix& a = core->coeffs[0];
    core->symbol_re.resize(n);
    core->symbol_im.resize(n);
    const double c = 4.0 * M_PI * M_PI;
    for (std::size_t i = 0; i < n; ++i) {
      const double k0 = frequency(static_cast<int>(i % resolution), resolution);
      const double k1 = dimension == 2 ? frequency(static_cast<int>(i / resolution), resolution) : 0.0;
      // The Nyquist mode is its own conjugate; its mixed term is averaged to zero.
      const bool nyquist = 2 * (i % resolution) == static_cast<std::size_t>(resolution) ||
                           (dimension == 2 && 2 * (i / resolution) == static_cast<std::size_t>(resolution));
      const double mixed = nyquist ? 0.0 : k0 * k1;
      Complex s = c * (a(0, 0) * k0 * k0 + (a(0, 1) + a(1, 0)) * mixed + a(1, 1) * k1 * k1);
      core->symbol_re[i] = s.real();
      core->symbol_im[i] = s.imag();
    }
  }
  SolverKind route = solver;
  if (route == SolverKind::automatic) {
    if (core->constant)
      route = SolverKind::spectral;
    else if (core->hermitian && n <= 2048)
      route = SolverKind::eigendecomposition;
    else
      route = SolverKind::crank_nicolson;
  }
  if (route == SolverKind::spectral && !core->constant)
    throw ParameterError("spectral route requires constant coefficients");
  if (route == SolverKind::eigendecomposition && !core->hermitian)
    throw ParameterError("eigendecomposition route requires Hermitian coefficients");
  state_ = std::make_shared<State>(State{core, route, std::nullopt});
}

EllipticOperator EllipticOperator::constant(int dimension, int resolution, const CoefficientMatrix& a,
                                            SolverKind solver) {
  return EllipticOperator(dimension, resolution, std::vector<CoefficientMatrix>(cells(dimension, resolution), a),
                          solver);
}

EllipticOperator EllipticOperator::laplacian(int dimension, int resolution, SolverKind solver) {
  return constant(dimension, resolution, CoefficientMatrix::Identity(), solver);
}

int EllipticOperator::dimension() const { return state_->core->dim; }
int EllipticOperator::resolution() const { return state_->core->m; }
bool EllipticOperator::constant_coefficients() const { return state_->core->constant; }
bool EllipticOperator::hermitian() const { return state_->core->hermitian; }
bool EllipticOperator::real_symmetric() const { return state_->core->real_symmetric; }
Ellipticity EllipticOperator::ellipticity() const { return state_->core->ellipticity; }
SolverKind EllipticOperator::solver() const { return state_->route; }
std::optional<std::pair<double, double>> EllipticOperator::exponent_range() const { return state_->range; }
const Eigen::SparseMatrix<Complex>& EllipticOperator::matrix() const { return state_->core->L; }
std::size_t EllipticOperator::positivity_refinements() const { return state_->core->refinements.load(); }

EllipticOperator EllipticOperator::with_exponent_range(double p_minus, double p_plus) const {
  if (!(1 <= p_minus && p_minus < p_plus)) throw ParameterError("exponent range requires 1 <= p_- < p_+");
  auto s = std::make_shared<State>(*state_);
  s->range = std::make_pair(p_minus, p_plus);
  return EllipticOperator(s);
}

EllipticOperator EllipticOperator::with_solver(SolverKind solver) const {
  const Core& c = *state_->core;
  EllipticOperator fresh(c.dim, c.m, c.coeffs, solver);
  fresh.state_->range = state_->range;
  return fresh;
}

namespace {

ComplexField spectral_multiply(const Core& c, const ComplexField& f, double t, bool generator) {
  std::vector<Complex> data(f.values().data(), f.values().data() + f.size());
  fft_lines(data, c.dim, c.m, false);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Complex s(c.symbol_re[i], c.symbol_im[i]);
    data[i] *= generator ? s : std::exp(-t * s);
  }
  fft_lines(data, c.dim, c.m, true);
  return ComplexField(c.dim, c.m, Eigen::Map<ComplexField::Vector>(data.data(), static_cast<Eigen::Index>(data.size())));
}

ComplexField eigen_apply(Core& c, const ComplexField& f, double t) {
  c.build_eigen();
  const Eigen::ArrayXd decay = (-t * c.eig_values.array()).exp();
  ComplexField::Vector out;
  if (c.real_symmetric) {
    const Eigen::MatrixXd& V = c.eig_vectors_real;
    Eigen::VectorXd re = f.values().real(), im = f.values().imag();
    Eigen::VectorXd cre = (V.transpose() * re).array() * decay;
    Eigen::VectorXd cim = (V.transpose() * im).array() * decay;
    out = (V * cre).cast<Complex>() + Complex(0, 1) * (V * cim).cast<Complex>();
  } else {
    const Eigen::MatrixXcd& V = c.eig_vectors_complex;
    Eigen::VectorXcd coef = (V.adjoint() * f.values()).array() * decay.cast<Complex>();
    out = V * coef;
  }
  return ComplexField(c.dim, c.m, std::move(out));
}

ComplexField crank_nicolson(Core& c, const ComplexField& f, double t, int refine) {
  const double h = 1.0 / c.m;
  const double delta0 = std::min(t / 16.0, 0.5 * h * h);
  long long steps = static_cast<long long>(std::ceil(t / delta0 - 1e-9));
  steps <<= refine;
  const double delta = t / static_cast<double>(steps);
  auto lu = c.factor(delta);
  Eigen::VectorXcd u = f.values();
  for (long long s = 0; s < steps; ++s) {
    Eigen::VectorXcd rhs = u - (0.5 * delta) * (c.L * u);
    u = lu->solve(rhs);
    if (lu->info() != Eigen::Success) throw NumericError("Crank-Nicolson solve failed");
    const double rn = rhs.norm();
    const double residual = (u + (0.5 * delta) * (c.L * u) - rhs).norm();
    if (rn > 0 && residual > 1e-10 * rn)
      throw NumericError("Crank-Nicolson residual " + std::to_string(residual / rn) + " exceeds 1e-10");
  }
  return ComplexField(c.dim, c.m, std::move(u));
}

}  // namespace

ComplexField EllipticOperator::semigroup(double t, const ComplexField& f) const {
  Core& c = *state_->core;
  if (!f.same_grid(c.dim, c.m)) throw ParameterError("field and operator grids differ");
  if (!(t >= 0)) throw ParameterError("semigroup time must be nonnegative");
  if (t == 0) return f;
  switch (state_->route) {
    case SolverKind::spectral: return spectral_multiply(c, f, t, false);
    case SolverKind::eigendecomposition: return eigen_apply(c, f, t);
    default: break;
  }
  ComplexField out = crank_nicolson(c, f, t, 0);
  if (c.real_symmetric && f.values().imag().cwiseAbs().maxCoeff() == 0 && f.values().real().minCoeff() >= 0) {
    const double bound = -1e-10 * f.values().real().maxCoeff();
    for (int refine = 1; refine <= 4 && out.values().real().minCoeff() < bound; ++refine) {
      c.refinements.fetch_add(1);
      out = crank_nicolson(c, f, t, refine);
    }
  }
  return out;
}

ComplexField EllipticOperator::generator(const ComplexField& f) const {
  const Core& c = *state_->core;
  if (!f.same_grid(c.dim, c.m)) throw ParameterError("field and operator grids differ");
  if (state_->route == SolverKind::spectral) return spectral_multiply(c, f, 0, true);
  return ComplexField(c.dim, c.m, c.L * f.values());
}

ComplexField semigroup_apply(const EllipticOperator& L, double t, const ComplexField& f) { return L.semigroup(t, f); }

const std::vector<std::pair<double, double>>& gauss_legendre_16() {
  static const std::vector<std::pair<double, double>> nodes = [] {
    const int n = 16;
    std::vector<std::pair<double, double>> out;
    for (int i = 1; i <= n; ++i) {
      double x = std::cos(M_PI * (i - 0.25) / (n + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      out.emplace_back(x, 2.0 / ((1 - x * x) * dp * dp));
    }
    return out;
  }();
  return nodes;
}

double EllipticOperator::spectral_bound() const {
  const Core& c = *state_->core;
  double bound = 0;
  if (state_->route == SolverKind::spectral) {
    for (std::size_t i = 0; i < c.symbol_re.size(); ++i) bound = std::max(bound, std::hypot(c.symbol_re[i], c.symbol_im[i]));
    return bound;
  }
  std::vector<double> rows(static_cast<std::size_t>(c.L.rows()), 0.0);
  for (Eigen::Index k = 0; k < c.L.outerSize(); ++k)
    for (SparseC::InnerIterator it(c.L, k); it; ++it) rows[static_cast<std::size_t>(it.row())] += std::abs(it.value());
  for (double r : rows) bound = std::max(bound, r);
  return bound;
}

std::vector<std::pair<double, double>> u_s_nodes(const EllipticOperator& L, double s) {
  const double bound = L.spectral_bound();
  int panels = 0;
  while (panels < 60 && std::ldexp(s, -panels) * bound > 4) ++panels;
  std::vector<std::pair<double, double>> out;
  auto panel = [&](double a, double b) {
    for (const auto& [x, w] : gauss_legendre_16()) out.emplace_back(a + 0.5 * (b - a) * (1 + x), 0.5 * (b - a) * w / s);
  };
  panel(0, std::ldexp(s, -panels));
  for (int j = panels - 1; j >= 0; --j) panel(std::ldexp(s, -j - 1), std::ldexp(s, -j));
  return out;
}

ComplexField u_s_apply(const EllipticOperator& L, double s, int N, const ComplexField& f) {
  if (!(s > 0)) throw ParameterError("u_s_apply requires s > 0");
  if (N < 1) throw ParameterError("u_s_apply requires N >= 1");
  const auto nodes = u_s_nodes(L, s);
  ComplexField g = f;
  for (int r = 0; r < N; ++r) {
    ComplexField::Vector acc = ComplexField::Vector::Zero(static_cast<Eigen::Index>(g.size()));
    for (const auto& [lambda, w] : nodes) acc += w * L.semigroup(lambda, g).values();
    g = ComplexField(g.dimension(), g.resolution(), std::move(acc));
  }
  return g;
}

}  // namespace oscillab
