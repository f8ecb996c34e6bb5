#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rough_transport/field_library.hpp"
#include "rough_transport/renormalization.hpp"
#include "rough_transport/solution_rep.hpp"

namespace rough_transport {

enum class TailPolicy {
  /// u is required to vanish on the outer node layer; nothing is added.
  zero_outside_box,
  /// sup|beta| times the test-function mass beyond the box is added to Gamma.
  analytic_bound,
};

/// Midpoint rule on the cell centres of [-rho, rho]^d, composite Simpson in time
/// (trapezoid when the interval count is odd).
struct SpaceTimeQuadrature {
  int dimension = 1;
  double half_width = 0.0;
  int per_axis = 0;
  double spacing = 0.0;
  double cell_volume = 0.0;
  std::vector<Vec> nodes;
  std::vector<double> times;
  std::vector<double> time_weights;
  TailPolicy tail_policy = TailPolicy::zero_outside_box;

  double horizon() const { return times.back(); }
  double time_step() const { return times[1] - times[0]; }
  /// cell_volume * #nodes * sum(time_weights); equals (2 rho)^d T.
  double weight_sum() const;
};

SpaceTimeQuadrature make_quadrature(int dimension, double half_width, int per_axis, double horizon, int time_intervals,
                                    TailPolicy policy = TailPolicy::zero_outside_box);

/// phi(t, x) with analytic time derivative and gradient.
struct SpaceTimeTestFunction {
  std::string label;
  std::function<double(double, const Vec&)> eval;
  std::function<double(double, const Vec&)> dt;
  std::function<Vec(double, const Vec&)> grad;
  /// Radius of the spatial support; +inf for phi_R.
  double support_radius = kInf;
  /// Integral over {|x| > rho} of sup_t |phi(t, x)|.
  std::function<double(double)> tail_mass;
};

/// cos^2(pi t / 2T) (1 - |x|^2 / a^2)^4_+, vanishing at t = T.
SpaceTimeTestFunction make_compact_test(double a, double horizon);
/// Time-independent phi_R.
SpaceTimeTestFunction make_static_test(const TestFunctionPhiR& phi);

struct WeakResidualRow {
  double h = 0.0;
  double tau = 0.0;
  double residual = 0.0;
};

struct WeakResidualReport {
  double residual = 0.0;  ///< absolute value of the weak-form sum
  double signed_residual = 0.0;
  double phi_mass = 0.0;  ///< discrete int phi(0, x) dx
  /// Upper bound on the part of the integrals lost outside the box.
  double tail_allowance = 0.0;
  std::vector<WeakResidualRow> history;
  /// Least-squares slope of log residual against log h over the history.
  double order = 0.0;
};

/// Discrete value of
///   int phi(0) beta(u0) - int phi(T) beta(u(T)) + iint [phi_t + grad phi . b] beta(u)
///   + iint phi [div b (beta(u) - u beta'(u)) + c u beta'(u)].
/// u must be sampled on quad.nodes at quad.times. c is set to 0 within eta of
/// its singular set. Throws SupportOverflow when phi is not contained in the box
/// under the quadrature's tail policy.
WeakResidualReport weak_residual(const DensityRepresentation& u, const Renormalizer& beta,
                                 const SpaceTimeTestFunction& phi, const VelocityFieldSpec& field,
                                 const DampingFieldSpec& damping, const InitialDatum& u0,
                                 const SpaceTimeQuadrature& quad, double eta = 0.0);

struct RefinementLevel {
  int per_axis = 0;
  int time_intervals = 0;
};

/// Builds u on each level with `make_u`, evaluates weak_residual and fits the order.
WeakResidualReport weak_residual_study(std::span<const RefinementLevel> levels, double half_width,
                                       const std::function<DensityRepresentation(const SpaceTimeQuadrature&)>& make_u,
                                       const Renormalizer& beta, const SpaceTimeTestFunction& phi,
                                       const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                                       const InitialDatum& u0, TailPolicy policy = TailPolicy::zero_outside_box);

struct GammaTrace {
  std::vector<double> times;
  std::vector<double> gamma;  ///< sum phi beta(u) cell_volume (+ tail allowance)
  std::vector<double> rhs;    ///< discrete d/dt Gamma from the renormalized equation
  std::vector<double> bound;  ///< empty unless a bound was attached
  double tail_allowance = 0.0;
  /// max |(Gamma_{k+1} - Gamma_k)/tau - (rhs_k + rhs_{k+1})/2|.
  double consistency = 0.0;
};

GammaTrace gamma_trace(const DensityRepresentation& u, const Renormalizer& beta, const SpaceTimeTestFunction& phi,
                       const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                       const SpaceTimeQuadrature& quad, double eta = 0.0);

struct EnergyCurve {
  std::vector<double> times;
  std::vector<double> l2;        ///< sum u^2 cell_volume
  std::vector<double> envelope;  ///< l2[0] exp(int (2 ||c||_inf + ||div b||_inf))
  double max_ratio = 0.0;        ///< max l2 / envelope
  bool passed(double slack = 0.05) const { return max_ratio <= 1.0 + slack; }
};

/// Throws UnboundedDamping if c has a singular set or no sup norm.
EnergyCurve l2_energy_diagnostic(const DensityRepresentation& u, const VelocityFieldSpec& field,
                                 const DampingFieldSpec& damping, const SpaceTimeQuadrature& quad);

struct GronwallReport {
  double delta = 0.0;
  double R = 0.0;
  GammaTrace trace;
  std::vector<double> A, B, C;  ///< cumulative integrals of a, b_R, c_R
  double K = 0.0;               ///< bound on |u beta'(u)|
  double max_ratio = 0.0;       ///< max Gamma / bound over time nodes
  bool passed() const { return max_ratio <= 1.0; }
};

/// Gamma_{delta,R}(t) <= exp(A)(Gamma(0) + B_R + log(1 + pi^2/(4 delta)) C_R) * (1 + slack)
/// with a = ||div b||_inf + (d+1) b2, b_R = K (||c||_{L^1} + ||div b||_inf ||phi_R||_{L^1}),
/// c_R = (d+1) int_{|x|>R} b1 and K = sup |r beta_delta'(r)|.
GronwallReport gronwall_log_diagnostic(const DensityRepresentation& u, double delta, double R,
                                       const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                                       const SpaceTimeQuadrature& quad, double slack = 0.1, double eta = 0.0);

/// Coarse minus fine pointwise representation on the quadrature nodes; the
/// fine run uses twice as many RK4 steps. Vanishes identically at t = 0.
DensityRepresentation twin_difference(const InitialDatum& u0, const VelocityFieldSpec& field,
                                      const DampingFieldSpec& damping, const SpaceTimeQuadrature& quad,
                                      int coarse_steps_per_interval = 1, double eta = 0.0);

struct UniquenessBoundData {
  int dimension = 1;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  /// C_R at the largest available R, standing in for R -> infinity.
  double C_limit = 0.0;
};

UniquenessBoundData uniqueness_bound_data(const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                                          std::span<const double> times, double R, double R_limit, double K = 2.0);

struct UniquenessRow {
  double delta = 0.0;
  double lhs = 0.0;  ///< m / 2^{d+1}
  double rhs = 0.0;  ///< exp(A)(B + log(1+pi^2/(4 delta)) C) / log(1 + gamma/delta)
  bool holds = true;
};

struct UniquenessReport {
  double m = 0.0;  ///< worst-case measure of {x in B_R0 : arctan^2 u > gamma}
  double limit_bound = 0.0;  ///< exp(A) C_limit 2^{d+1}
  std::vector<UniquenessRow> rows;
  std::string verdict;  ///< "forces_zero", "trivially_consistent" or "inconclusive"
};

UniquenessReport uniqueness_probe(const DensityRepresentation& u, double gamma_level, double R0,
                                  std::span<const double> delta_list, const UniquenessBoundData& bound);

}  // namespace rough_transport
