#include "rough_transport/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "rough_transport/parallel.hpp"

namespace rough_transport {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

std::vector<double> cumulative_trapezoid(std::span<const double> values, double dt) {
  std::vector<double> out(values.size(), 0.0);
  CompensatedSum acc;
  for (std::size_t k = 1; k < values.size(); ++k) {
    acc.add(0.5 * dt * (values[k - 1] + values[k]));
    out[k] = acc.value();
  }
  return out;
}

std::vector<double> simpson_weights(int intervals, double dt) {
  if (intervals <= 0) return {0.0};
  std::vector<double> w(static_cast<std::size_t>(intervals) + 1, 0.0);
  if (intervals % 2 != 0) {
    for (auto& x : w) x = dt;
    w.front() = w.back() = 0.5 * dt;
    return w;
  }
  for (int k = 0; k <= intervals; ++k) {
    double c = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    w[static_cast<std::size_t>(k)] = c * dt / 3.0;
  }
  return w;
}

double integrate(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  const auto w = simpson_weights(intervals, h);
  CompensatedSum s;
  for (int k = 0; k <= intervals; ++k) s.add(w[static_cast<std::size_t>(k)] * f(a + k * h));
  return s.value();
}

const GaussRule& gauss_legendre_16() {
  static const GaussRule rule = [] {
    using G = boost::math::quadrature::gauss<double, 16>;
    const auto& abscissa = G::abscissa();
    const auto& weights = G::weights();
    GaussRule r;
    // boost stores the nonnegative half; mirror it in ascending order.
    for (std::size_t i = abscissa.size(); i-- > 0;) {
      r.nodes.push_back(-abscissa[i]);
      r.weights.push_back(weights[i]);
    }
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      r.nodes.push_back(abscissa[i]);
      r.weights.push_back(weights[i]);
    }
    return r;
  }();
  return rule;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b) {
  const auto& g = gauss_legendre_16();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  CompensatedSum s;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s.add(g.weights[i] * f(mid + half * g.nodes[i]));
  return half * s.value();
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("ROUGH_TRANSPORT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<int>(n, static_cast<int>(cap));
  }
  return n;
}

}  // namespace rough_transport
