#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace oscillab {

using Complex = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments: exponent windows, depths, mismatched resolutions.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Invalid input data: non-finite samples, nonpositive weights.
class DataError : public Error {
 public:
  using Error::Error;
};

// Operation undefined on its input, e.g. Whitney on the full torus.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Solver failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Configuration validation failures; carries the dotted path of the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline bool is_power_of_two(long long m) { return m > 0 && (m & (m - 1)) == 0; }

inline int log2_exact(long long m) {
  int k = 0;
  while ((1LL << k) < m) ++k;
  return k;
}

inline double magnitude(double x) { return x < 0 ? -x : x; }
inline double magnitude(const Complex& z) { return std::abs(z); }

// Fixed-order pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);
long double pairwise_sum(std::span<const long double> values);

// Worker count used by parallel_for. 1 runs everything on the calling thread.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, count). Each index is processed exactly once and
// callers write into index-owned slots, so results never depend on scheduling.
// The first exception (lowest index) is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Counter-based generator: the value stream is a pure function of (seed, stream).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double sign() { return (next() >> 63) ? 1.0 : -1.0; }
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace oscillab
