#pragma once

#include <climits>
#include <memory>
#include <string>
#include <vector>

namespace oscillab {

// Nonnegative coefficient sequence (gamma_k)_{k >= 0} with exact or closed-form tails where available.
class Sequence {
 public:
  struct Impl;

  Sequence();
  // terms[i] is gamma_{first + i}; zero elsewhere.
  static Sequence finite(std::vector<double> terms, int first = 0);
  // scale * ratio^k for k >= first.
  static Sequence geometric(double scale, double ratio, int first = 0);
  // scale * exp(-c 4^k) for k >= first.
  static Sequence super_exponential(double scale, double c, int first = 0);
  // (left * right)_J = sum_k left_k right_{J-k}.
  static Sequence convolution(const Sequence& left, const Sequence& right);
  // bar_0 = gamma_0, bar_k = 2^{-k e} sum_{l >= k-1} gamma_l 2^{l e}.
  static Sequence bar(const Sequence& gamma, double exponent);
  // gamma_k <- sup_{j >= k} gamma_j (finite sequences, or already nonincreasing ones).
  Sequence nonincreasing_envelope() const;

  double operator[](int k) const;
  // sum_{k >= from} gamma_k.
  double tail(int from) const;
  // sum_{k >= from} gamma_k base^{k - shift}; parameter error naming k when divergent.
  double weighted_tail(int from, double base, int shift = 0) const;
  double sum() const { return tail(0); }
  // Last index with a nonzero term, INT_MAX for infinite sequences.
  int last_index() const;
  std::string describe() const;
  std::vector<double> head(int count) const;

 private:
  explicit Sequence(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace oscillab
