#include "rough_transport/renormalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rough_transport/errors.hpp"
#include "rough_transport/field_library.hpp"
#include "rough_transport/numerics.hpp"

namespace rough_transport {

Renormalizer make_beta_arctan(double M) {
  if (!(M > 0.0)) throw Error("make_beta_arctan: M must be positive");
  Renormalizer r;
  r.label = "arctan(M=" + format_double(M) + ")";
  r.beta = [M](double x) { return M * std::atan(x / M); };
  r.beta_prime = [M](double x) {
    const double q = x / M;
    return 1.0 / (1.0 + q * q);
  };
  r.sup_beta = M * std::numbers::pi / 2.0;
  r.sup_rbeta_prime = M;
  return r;
}

Renormalizer make_beta_log(double delta) {
  if (!(delta > 0.0)) throw Error("make_beta_log: delta must be positive");
  Renormalizer r;
  r.label = "log(delta=" + format_double(delta) + ")";
  r.beta = [delta](double x) {
    const double a = std::atan(x);
    return std::log1p(a * a / delta);
  };
  r.beta_prime = [delta](double x) {
    const double a = std::atan(x);
    return 2.0 * a / ((1.0 + x * x) * (delta + a * a));
  };
  r.sup_beta = std::log1p(std::numbers::pi * std::numbers::pi / (4.0 * delta));
  r.sup_rbeta_prime = 2.0;
  return r;
}

Renormalizer make_renormalizer(std::string label, std::function<double(double)> beta,
                               std::function<double(double)> beta_prime, double sup_beta, double sup_rbeta_prime) {
  Renormalizer r;
  r.label = std::move(label);
  r.beta = std::move(beta);
  r.beta_prime = std::move(beta_prime);
  r.sup_beta = sup_beta;
  r.sup_rbeta_prime = sup_rbeta_prime;
  return r;
}

double arctan_contraction_gap(double r1, double r2, double M) {
  const auto b = make_beta_arctan(M);
  return std::abs(b.beta(r1) - b.beta(r2)) - std::abs(r1 * b.beta_prime(r1) - r2 * b.beta_prime(r2));
}

const std::vector<double>& standard_sweep() {
  static const std::vector<double> sweep = [] {
    constexpr int kHalf = 50000;
    std::vector<double> s;
    s.reserve(2 * kHalf + 1);
    s.push_back(0.0);
    for (int i = 0; i < kHalf; ++i) {
      const double r = std::pow(10.0, -6.0 + 12.0 * i / (kHalf - 1));
      s.push_back(r);
      s.push_back(-r);
    }
    return s;
  }();
  return sweep;
}

std::pair<double, double> sweep_sup_rbeta_prime(const Renormalizer& r) {
  double best = 0.0, arg = 0.0;
  for (double x : standard_sweep()) {
    const double v = std::abs(x * r.beta_prime(x));
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  return {best, arg};
}

AdmissibilityReport check_admissible(const Renormalizer& r) {
  AdmissibilityReport rep;
  rep.vanishes_at_zero.value = r.beta(0.0);
  rep.vanishes_at_zero.passed = rep.vanishes_at_zero.value == 0.0;

  double sup_b = 0.0, arg_b = 0.0;
  for (double x : standard_sweep()) {
    const double v = std::abs(r.beta(x));
    if (!(v <= sup_b)) {
      sup_b = v;
      arg_b = x;
    }
  }
  rep.bounded = {std::isfinite(r.sup_beta) && sup_b <= r.sup_beta, arg_b, sup_b};

  const auto [sup_rb, arg_rb] = sweep_sup_rbeta_prime(r);
  rep.rbeta_prime_bounded = {std::isfinite(r.sup_rbeta_prime) && sup_rb <= r.sup_rbeta_prime, arg_rb, sup_rb};

  double worst = 0.0, arg_fd = 0.0;
  for (double x : standard_sweep()) {
    if (x == 0.0 || std::abs(x) > 1e3) continue;
    const double h = 1e-5 * std::abs(x);
    const double fd = (r.beta(x + h) - r.beta(x - h)) / (2.0 * h);
    const double exact = r.beta_prime(x);
    const double err = std::abs(fd - exact) / (std::abs(exact) + 1e-300);
    if (std::abs(fd - exact) > 1e-12 && err > worst) {
      worst = err;
      arg_fd = x;
    }
  }
  rep.derivative_consistent = {worst <= 1e-6, arg_fd, worst};
  return rep;
}

// ---------------------------------------------------------------------------
// phi_R

namespace {

// int_a^inf s^{d-1} / (1+s)^{d+1} ds, a >= 0.
double radial_tail(int d, double a) {
  const double q = 1.0 / (1.0 + a);
  switch (d) {
    case 1:
      return q;
    case 2:
      return q - 0.5 * q * q;
    case 3:
      return q - q * q + q * q * q / 3.0;
    default:
      throw Error("phi_R: dimension must be 1..3");
  }
}

}  // namespace

TestFunctionPhiR::TestFunctionPhiR(double R, int dimension) : R_(R), d_(dimension) {
  if (!(R > 0.0)) throw Error("make_phi_R: R must be positive");
  if (dimension < 1 || dimension > 3) throw Error("make_phi_R: dimension must be 1..3");
}

double TestFunctionPhiR::eval_radial(double r) const {
  if (r < R_) return std::pow(2.0, -(d_ + 1));
  return std::pow(R_ / (R_ + r), d_ + 1);
}

double TestFunctionPhiR::grad_radial(double r) const {
  if (r < R_) return 0.0;
  return -(d_ + 1) * std::pow(R_, d_ + 1) / std::pow(R_ + r, d_ + 2);
}

double TestFunctionPhiR::eval(const Vec& x) const { return eval_radial(x.norm()); }

Vec TestFunctionPhiR::eval_grad(const Vec& x) const {
  const double r = x.norm();
  Vec g(d_);
  if (r < R_) return g;
  const double dr = grad_radial(r);
  for (int i = 0; i < d_; ++i) g[i] = dr * x[i] / r;
  return g;
}

double TestFunctionPhiR::decay_constant() const {
  return (d_ + 1) * std::max({std::pow(2.0 * R_, d_ + 1), std::pow(2.0, d_ + 1), 1.0 / R_});
}

double TestFunctionPhiR::l1_norm() const {
  return std::pow(2.0, -(d_ + 1)) * ball_volume(d_, R_) + unit_sphere_area(d_) * std::pow(R_, d_) * radial_tail(d_, 1.0);
}

double TestFunctionPhiR::tail_mass(double rho) const {
  if (rho <= R_) {
    const double inner = std::pow(2.0, -(d_ + 1)) * ball_volume(d_, std::max(rho, 0.0));
    return l1_norm() - inner;
  }
  return unit_sphere_area(d_) * std::pow(R_, d_) * radial_tail(d_, rho / R_);
}

TestFunctionPhiR make_phi_R(double R, int dimension) { return TestFunctionPhiR(R, dimension); }

bool PhiRCheck::passed() const {
  return max_branch_error <= 1e-15 && continuity_gap <= 1e-15 && max_decay_ratio <= 1.0 &&
         max_grad_decay_ratio <= 1.0 && max_grad_bound_ratio <= 1.0 + 1e-12 && max_inner_grad == 0.0;
}

PhiRCheck check_phi_R(const TestFunctionPhiR& phi, int samples) {
  PhiRCheck out;
  const int d = phi.dimension();
  const double R = phi.R();
  const double C = phi.decay_constant();
  out.continuity_gap = std::abs(std::pow(2.0, -(d + 1)) - std::pow(R / (R + R), d + 1));
  for (int j = 0; j < samples; ++j) {
    // Radii from 1e-3 R to 1e4 R, log-spaced, along a fixed direction.
    const double r = R * std::pow(10.0, -3.0 + 7.0 * j / (samples - 1));
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = r / std::sqrt(static_cast<double>(d));
    const double v = phi.eval(x);
    const double rr = x.norm();
    const double closed = rr < R ? std::pow(2.0, -(d + 1)) : std::pow(R, d + 1) / std::pow(R + rr, d + 1);
    out.max_branch_error = std::max(out.max_branch_error, std::abs(v - closed));
    const double g = phi.eval_grad(x).norm();
    out.max_decay_ratio = std::max(out.max_decay_ratio, v * std::pow(1.0 + rr, d + 1) / C);
    out.max_grad_decay_ratio = std::max(out.max_grad_decay_ratio, g * std::pow(1.0 + rr, d + 2) / C);
    if (rr > R) out.max_grad_bound_ratio = std::max(out.max_grad_bound_ratio, g * (R + rr) / ((d + 1) * v));
    if (rr < R) out.max_inner_grad = std::max(out.max_inner_grad, g);
  }
  return out;
}

double phi_R_l1_quadrature(const TestFunctionPhiR& phi) {
  const int d = phi.dimension();
  const double R = phi.R();
  const double area = unit_sphere_area(d);
  auto radial = [&](double r) { return area * std::pow(r, d - 1) * phi.eval_radial(r); };
  CompensatedSum s;
  s.add(gauss_integrate(radial, 0.0, R));
  // Geometric panels on [R, 1e3 R].
  for (double lo = R; lo < 1e3 * R;) {
    const double hi = std::min(1e3 * R, lo * 1.25);
    s.add(gauss_integrate(radial, lo, hi));
    lo = hi;
  }
  s.add(phi.tail_mass(1e3 * R));
  return s.value();
}

}  // namespace rough_transport
