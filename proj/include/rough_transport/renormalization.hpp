#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rough_transport/vec.hpp"

namespace rough_transport {

struct Renormalizer {
  std::string label;
  std::function<double(double)> beta;
  std::function<double(double)> beta_prime;
  double sup_beta = 0.0;         ///< declared bound on |beta|
  double sup_rbeta_prime = 0.0;  ///< declared bound on |r beta'(r)|
};

/// beta_M(r) = M arctan(r / M).
Renormalizer make_beta_arctan(double M);

/// beta_delta(r) = log(1 + arctan(r)^2 / delta). The declared bound on
/// |r beta'| is 2, its supremum over delta > 0.
Renormalizer make_beta_log(double delta);

/// Unchecked constructor, for tests and experiments.
Renormalizer make_renormalizer(std::string label, std::function<double(double)> beta,
                               std::function<double(double)> beta_prime, double sup_beta, double sup_rbeta_prime);

/// |beta_M(r1) - beta_M(r2)| - |r1 beta_M'(r1) - r2 beta_M'(r2)|.
double arctan_contraction_gap(double r1, double r2, double M);

/// 10^5 log-spaced points in +-[1e-6, 1e6], plus 0.
const std::vector<double>& standard_sweep();

/// sup over the standard sweep of |r beta'(r)|, with its argmax.
std::pair<double, double> sweep_sup_rbeta_prime(const Renormalizer& r);

struct ConditionResult {
  bool passed = true;
  double witness = 0.0;  ///< worst sweep point
  double value = 0.0;    ///< value that decided the condition
};

struct AdmissibilityReport {
  ConditionResult vanishes_at_zero;
  ConditionResult bounded;
  ConditionResult rbeta_prime_bounded;
  ConditionResult derivative_consistent;
  bool passed() const {
    return vanishes_at_zero.passed && bounded.passed && rbeta_prime_bounded.passed && derivative_consistent.passed;
  }
};

/// beta(0) = 0; |beta| <= sup_beta < inf and |r beta'| <= sup_rbeta_prime < inf
/// on the standard sweep; beta' matches central differences within 1e-6
/// relative on |r| <= 1e3.
AdmissibilityReport check_admissible(const Renormalizer& r);

class TestFunctionPhiR {
 public:
  TestFunctionPhiR(double R, int dimension);

  double R() const { return R_; }
  int dimension() const { return d_; }
  /// 2^{-(d+1)} inside B_R, R^{d+1} / (R + |x|)^{d+1} on and outside.
  double eval(const Vec& x) const;
  /// Zero inside B_R; gradient of the outer branch on and outside.
  Vec eval_grad(const Vec& x) const;
  double eval_radial(double r) const;
  double grad_radial(double r) const;  ///< signed d/dr of the profile
  /// Constant C with phi <= C (1+|x|)^{-(d+1)} and |grad phi| <= C (1+|x|)^{-(d+2)}.
  double decay_constant() const;
  /// Closed-form integral over R^d.
  double l1_norm() const;
  /// Closed-form integral over {|x| > rho}.
  double tail_mass(double rho) const;

 private:
  double R_;
  int d_;
};

TestFunctionPhiR make_phi_R(double R, int dimension);

struct PhiRCheck {
  double max_branch_error = 0.0;      ///< |eval - closed form|
  double continuity_gap = 0.0;        ///< |inner - outer| at |x| = R
  double max_decay_ratio = 0.0;       ///< max phi (1+|x|)^{d+1} / C
  double max_grad_decay_ratio = 0.0;  ///< max |grad| (1+|x|)^{d+2} / C
  double max_grad_bound_ratio = 0.0;  ///< max |grad| (R+|x|) / ((d+1) phi), |x| > R
  double max_inner_grad = 0.0;
  bool passed() const;
};

/// Checks the closed form, continuity, decay and gradient bounds on a radial sample.
PhiRCheck check_phi_R(const TestFunctionPhiR& phi, int samples = 4000);

/// Radial quadrature of phi_R up to 1e3 R plus the closed-form tail.
double phi_R_l1_quadrature(const TestFunctionPhiR& phi);

}  // namespace rough_transport
