#include "oscillab/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oscillab/common.hpp"

namespace oscillab {

namespace {

constexpr int kMaxTerms = 20000;

}  // namespace

struct Sequence::Impl {
  virtual ~Impl() = default;
  virtual double term(int k) const = 0;
  virtual int last_index() const { return INT_MAX; }
  virtual bool nonincreasing() const { return false; }
  virtual std::string describe() const = 0;

  virtual double weighted_tail(int from, double base, int shift) const {
    from = std::max(from, 0);
    const int last = last_index();
    double sum = 0;
    int small = 0;
    for (int k = from; k <= last; ++k) {
      if (k - from > kMaxTerms)
        throw ParameterError("coefficient series diverges (no convergence by k = " + std::to_string(k) + ")");
      const double t = term(k);
      const double w = t == 0 ? 0.0 : t * std::pow(base, k - shift);
      if (!std::isfinite(w)) throw ParameterError("coefficient series diverges at k = " + std::to_string(k));
      sum += w;
      if (last != INT_MAX) continue;
      small = (w <= 1e-18 * sum || (w == 0 && k > from + 64)) ? small + 1 : 0;
      if (small >= 8) break;
    }
    return sum;
  }
};

namespace {

struct Finite : Sequence::Impl {
  std::vector<double> terms;
  int first = 0;
  double term(int k) const override {
    const int i = k - first;
    return i >= 0 && i < static_cast<int>(terms.size()) ? terms[i] : 0.0;
  }
  int last_index() const override {
    for (int i = static_cast<int>(terms.size()) - 1; i >= 0; --i)
      if (terms[i] != 0) return first + i;
    return -1;
  }
  bool nonincreasing() const override {
    if (first > 0 && !terms.empty() && terms.front() > 0) return false;
    for (std::size_t i = 1; i < terms.size(); ++i)
      if (terms[i] > terms[i - 1]) return false;
    return true;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "finite(first=" << first << ", " << terms.size() << " terms)";
    return os.str();
  }
};

struct Geometric : Sequence::Impl {
  double scale = 1, ratio = 0.5;
  int first = 0;
  double term(int k) const override { return k < first ? 0.0 : scale * std::pow(ratio, k); }
  bool nonincreasing() const override { return ratio <= 1 && first == 0; }
  double weighted_tail(int from, double base, int shift) const override {
    from = std::max(from, first);
    if (scale == 0) return 0;
    if (ratio * base >= 1)
      throw ParameterError("coefficient series diverges at k = " + std::to_string(from) + " (ratio " +
                           std::to_string(ratio * base) + " >= 1)");
    if (ratio == 0) return from == 0 ? scale * std::pow(base, -shift) : 0.0;
    const double log_first = from * std::log(ratio) + (from - shift) * std::log(base);
    return scale * std::exp(log_first) / (1 - ratio * base);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "geometric(scale=" << scale << ", ratio=" << ratio << ", first=" << first << ")";
    return os.str();
  }
};

struct SuperExponential : Sequence::Impl {
  double scale = 1, c = 1;
  int first = 0;
  double term(int k) const override { return k < first ? 0.0 : scale * std::exp(-c * std::ldexp(1.0, 2 * k)); }
  bool nonincreasing() const override { return c >= 0 && first == 0; }
  std::string describe() const override {
    std::ostringstream os;
    os << "super-exponential(scale=" << scale << ", c=" << c << ", first=" << first << ")";
    return os.str();
  }
};

struct Convolution : Sequence::Impl {
  Sequence left, right;
  double term(int J) const override {
    const int last = std::min(J, left.last_index());
    double s = 0;
    for (int k = 0; k <= last; ++k) {
      const double l = left[k];
      if (l != 0) s += l * right[J - k];
    }
    return s;
  }
  int last_index() const override {
    const int a = left.last_index(), b = right.last_index();
    if (a == INT_MAX || b == INT_MAX) return INT_MAX;
    return a < 0 || b < 0 ? -1 : a + b;
  }
  double weighted_tail(int from, double base, int shift) const override {
    const int last = left.last_index();
    if (last == INT_MAX) return Sequence::Impl::weighted_tail(from, base, shift);
    double s = 0;
    for (int k = 0; k <= last; ++k) {
      const double l = left[k];
      if (l == 0) continue;
      s += l * std::pow(base, k) * right.weighted_tail(std::max(0, from - k), base, shift);
    }
    return s;
  }
  std::string describe() const override { return "convolution(" + left.describe() + ", " + right.describe() + ")"; }
};

struct Bar : Sequence::Impl {
  Sequence gamma;
  double exponent = 0;
  double term(int k) const override {
    if (k < 0) return 0;
    if (k == 0) return gamma[0];
    return gamma.weighted_tail(k - 1, std::exp2(exponent), k);
  }
  int last_index() const override {
    const int g = gamma.last_index();
    return g == INT_MAX || g < 0 ? g : g + 1;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "bar(" << gamma.describe() << ", exponent=" << exponent << ")";
    return os.str();
  }
};

}  // namespace

Sequence::Sequence() : Sequence(finite({}, 0)) {}
Sequence::Sequence(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Sequence Sequence::finite(std::vector<double> terms, int first) {
  for (double t : terms)
    if (!(t >= 0) || !std::isfinite(t)) throw ParameterError("sequence terms must be finite and nonnegative");
  if (first < 0) throw ParameterError("sequence first index must be >= 0");
  auto impl = std::make_shared<Finite>();
  impl->terms = std::move(terms);
  impl->first = first;
  return Sequence(impl);
}

Sequence Sequence::geometric(double scale, double ratio, int first) {
  if (!(scale >= 0) || !(ratio >= 0)) throw ParameterError("geometric sequence needs scale, ratio >= 0");
  auto impl = std::make_shared<Geometric>();
  impl->scale = scale;
  impl->ratio = ratio;
  impl->first = std::max(first, 0);
  return Sequence(impl);
}

Sequence Sequence::super_exponential(double scale, double c, int first) {
  if (!(scale >= 0) || !(c > 0)) throw ParameterError("super-exponential sequence needs scale >= 0, c > 0");
  auto impl = std::make_shared<SuperExponential>();
  impl->scale = scale;
  impl->c = c;
  impl->first = std::max(first, 0);
  return Sequence(impl);
}

Sequence Sequence::convolution(const Sequence& left, const Sequence& right) {
  auto impl = std::make_shared<Convolution>();
  impl->left = left;
  impl->right = right;
  return Sequence(impl);
}

Sequence Sequence::bar(const Sequence& gamma, double exponent) {
  if (!(exponent >= 0)) throw ParameterError("bar exponent must be >= 0");
  // Validates convergence of the inner sums up front.
  gamma.weighted_tail(0, std::exp2(exponent), 0);
  auto impl = std::make_shared<Bar>();
  impl->gamma = gamma;
  impl->exponent = exponent;
  return Sequence(impl);
}

Sequence Sequence::nonincreasing_envelope() const {
  if (impl_->nonincreasing()) return *this;
  const int last = last_index();
  if (last == INT_MAX) throw ParameterError("nonincreasing envelope needs a finite or nonincreasing sequence");
  std::vector<double> t(static_cast<std::size_t>(std::max(last + 1, 0)));
  double run = 0;
  for (int k = last; k >= 0; --k) {
    run = std::max(run, (*this)[k]);
    t[k] = run;
  }
  return finite(std::move(t), 0);
}

double Sequence::operator[](int k) const { return k < 0 ? 0.0 : impl_->term(k); }
double Sequence::tail(int from) const { return impl_->weighted_tail(from, 1.0, 0); }
double Sequence::weighted_tail(int from, double base, int shift) const {
  return impl_->weighted_tail(from, base, shift);
}
int Sequence::last_index() const { return impl_->last_index(); }
std::string Sequence::describe() const { return impl_->describe(); }

std::vector<double> Sequence::head(int count) const {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back((*this)[k]);
  return out;
}

}  // namespace oscillab
