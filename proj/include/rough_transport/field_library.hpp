#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rough_transport/vec.hpp"

namespace rough_transport {

using VectorFn = std::function<Vec(double t, const Vec& x)>;
using ScalarFn = std::function<double(double t, const Vec& x)>;
using TimeFn = std::function<double(double t)>;
using Datum = std::function<double(const Vec& x)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Regularity { smooth, lipschitz, bv_nonsmooth };

const char* to_string(Regularity r);

/// |b(t,x)| / (1 + |x|) <= b1(t,x) + b2(t).
struct GrowthSplit {
  ScalarFn b1;
  TimeFn b2;
  /// Integral of b1(t, .) over {|x| > R}. Must be exact or an upper bound.
  std::function<double(double t, double R)> b1_tail_l1;
};

/// div b = d1 + d2 with d1 bounded and d2(t, .) supported in B_{support_radius}.
struct DivergenceSplit {
  TimeFn d1_sup;
  ScalarFn d2;
  double support_radius = 0.0;
};

struct VelocityFieldSpec {
  std::string name;
  int dimension = 1;
  double horizon = 1.0;
  Regularity regularity = Regularity::smooth;
  /// b does not depend on t.
  bool autonomous = true;
  VectorFn eval_b;
  ScalarFn eval_div_b;
  /// sup_x |div b(t, x)|; may return +inf.
  TimeFn div_sup;
  std::optional<GrowthSplit> split;
  std::optional<DivergenceSplit> div_split;
  /// Closed-form flow X(t, x0), when known.
  std::function<Vec(double t, const Vec& x0)> exact_flow;
};

struct DampingFieldSpec {
  std::string name;
  ScalarFn eval_c;
  /// Points where c is unbounded.
  std::vector<Vec> singular_set;
  /// Analytic double integral of |c| over (0,T) x R^d, if known.
  std::optional<double> l1_norm_hint;
  /// ||c(t, .)||_{L^1}.
  TimeFn l1_slice;
  /// ||c(t, .)||_{L^inf}; empty when c is unbounded.
  TimeFn sup_norm;
  bool is_bounded() const { return singular_set.empty() && static_cast<bool>(sup_norm); }
};

struct InitialDatum {
  std::string name;
  int dimension = 1;
  Datum eval;
  double l1 = 0.0;        ///< integral of |u0|
  double l2_squared = 0.0;  ///< integral of u0^2
  double support_radius = kInf;
};

struct FieldSample {
  Vec b;
  double divb = 0.0;
  double c = 0.0;
};

/// Evaluates (b, div b, c) at (t, x). Throws SingularPoint when x is a member
/// of damping.singular_set; Error when t lies outside [0, T].
FieldSample evaluate_field(const VelocityFieldSpec& spec, const DampingFieldSpec& damping, double t, const Vec& x);

/// Distance from x to the nearest singular point; +inf if the set is empty.
double distance_to_singular_set(const DampingFieldSpec& damping, const Vec& x);

// ---------------------------------------------------------------------------
// Mollification

struct QuadratureNode {
  Vec z;
  double weight = 0.0;  ///< measure weight, kernel not included
};

/// Kernel eps^{-d-1} rho1(s/eps) rho2(y/eps) together with the quadrature
/// used for the convolution integrals.
struct MollifierSpec {
  double eps = 0.1;
  int dimension = 1;
  std::function<double(double)> rho1;
  std::function<double(const Vec&)> rho2;
  /// Gauss-Legendre rule on [-1, 1] used in time (rescaled to clipped intervals).
  std::vector<double> time_nodes;
  std::vector<double> time_weights;
  /// Nodes on the unit ball, stored in antipodal pairs.
  std::vector<QuadratureNode> space_nodes;
  /// Closed-form primitive of rho1 on [-1, 1]; optional, used for autonomous fields.
  std::function<double(double)> rho1_cdf;
};

/// Polynomial bump kernels (1 - s^2)^4, normalized, with 16-point
/// Gauss-Legendre rules per axis (polar/spherical in d = 2, 3).
MollifierSpec make_mollifier(double eps, int dimension);

/// Kernel integrals under the stored quadrature: {int rho1, int rho2}.
std::pair<double, double> kernel_integrals(const MollifierSpec& moll);

/// Space-time convolution of b with b extended by zero outside [0, T].
/// The result carries the time-mollified div_sup and no growth split.
/// Throws BadKernel if a kernel integral is off from 1 by more than 1e-8.
VelocityFieldSpec mollify(const VelocityFieldSpec& spec, const MollifierSpec& moll);

/// Integral of eps^{-1} rho1((t - s)/eps) over s in [0, T].
double time_cutoff(const MollifierSpec& moll, double t, double horizon);

// ---------------------------------------------------------------------------
// Invariant checks

/// Verifies the growth split on `samples` random points in [0,T] x [-box, box]^d.
/// Throws SplitViolation with the first failing point.
GrowthSplit growth_split(const VelocityFieldSpec& spec, int samples = 10000, double box = 10.0,
                         std::uint64_t seed = 12345);

struct DivergenceCheck {
  double max_relative_error = 0.0;  ///< |div - FD div| / (1 + |div|)
  double max_sup_violation = 0.0;   ///< max(|div| - div_sup, 0)
  Vec worst_point;
};

/// Central finite-difference check of eval_div_b at random points.
DivergenceCheck check_divergence(const VelocityFieldSpec& spec, int samples = 1000, double box = 2.0,
                                 std::uint64_t seed = 777);

// ---------------------------------------------------------------------------
// Catalog

VelocityFieldSpec zero_field(int dimension, double horizon);
VelocityFieldSpec constant_field(const Vec& v, double horizon);
/// b(x) = a x in one dimension.
VelocityFieldSpec linear_field(double a, double horizon);
/// b(x, y) = (-y, x).
VelocityFieldSpec rotation_field(double horizon);
/// b(x, y) = (sign y, 0) with sign(0) = 0.
VelocityFieldSpec shear_field(double horizon);
/// b(x) = (1 - x^2)^3 on |x| < 1, zero outside.
VelocityFieldSpec compact_bump_field(double horizon);
/// b(x) = x (1 - log|x|) on |x| <= 1, sign(x) outside; div b = log(1/|x|) on B_1.
VelocityFieldSpec log_lipschitz_field(double horizon);

// Damping constructors take the horizon only to fill l1_norm_hint.
DampingFieldSpec zero_damping(int dimension, double horizon = 1.0);
DampingFieldSpec constant_damping(double c0, int dimension, double horizon = 1.0);
/// c = 1 on |x|_inf <= 1.
DampingFieldSpec indicator_damping(int dimension, double horizon = 1.0);
/// c(x) = |x|^{-1/2} on |x| <= 1, singular at 0 (d = 1).
DampingFieldSpec inverse_sqrt_damping(double horizon = 1.0);

InitialDatum zero_datum(int dimension);
/// exp(-|x|^2).
InitialDatum gaussian_datum(int dimension);
/// (1 - |x|^2)^4 on the unit ball.
InitialDatum bump_datum(int dimension);
/// Indicator of (0, 1) (d = 1).
InitialDatum unit_interval_datum();
InitialDatum constant_datum(double value, int dimension);

/// Lookup by identifier; throws Error for unknown ids.
VelocityFieldSpec make_velocity_field(const std::string& id, int dimension, double horizon);
DampingFieldSpec make_damping_field(const std::string& id, int dimension, double horizon = 1.0);
InitialDatum make_initial_datum(const std::string& id, int dimension);

std::vector<std::string> velocity_field_ids();
std::vector<std::string> damping_field_ids();
std::vector<std::string> initial_datum_ids();

/// Surface area of the unit sphere in R^d.
double unit_sphere_area(int d);
/// Volume of the ball of radius r in R^d.
double ball_volume(int d, double r);

}  // namespace rough_transport
