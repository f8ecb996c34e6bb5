#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rough_transport {

/// Neumaier compensated accumulator. Summation order is the caller's order,
/// so results are reproducible for a fixed traversal.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// Running composite trapezoid integral on a uniform grid; out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> values, double dt);

/// Composite Simpson weights for `intervals` uniform intervals of width dt.
/// Falls back to trapezoid weights when `intervals` is odd.
std::vector<double> simpson_weights(int intervals, double dt);

/// Composite Simpson rule for a scalar function on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int intervals = 1024);

/// 16-point Gauss-Legendre nodes/weights on [-1, 1], full (not half) arrays.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre_16();

/// Gauss-Legendre integral over [a, b] with the 16-point rule.
double gauss_integrate(const std::function<double(double)>& f, double a, double b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Seeded generator with a platform-independent double conversion.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// Format a double with 17 significant digits, '.' decimal separator.
std::string format_double(double value);

}  // namespace rough_transport
