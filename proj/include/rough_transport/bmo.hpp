#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rough_transport/field_library.hpp"
#include "rough_transport/weak_form.hpp"

namespace rough_transport {

// Mean-oscillation tools in one space dimension.

struct Ball {
  double center = 0.0;
  double radius = 0.0;
};

/// Centers on the sub-grid (M / center_divisions) Z, radii M 2^{-k} for
/// k < levels, keeping every ball inside [-2M, 2M].
std::vector<Ball> dyadic_ball_family(double M, int levels = 7, int center_divisions = 4);

/// Midpoint samples on `cells` uniform cells of [-2M, 2M].
struct SampledFunction {
  double lower = 0.0;
  double spacing = 0.0;
  std::vector<double> values;

  double x(std::size_t i) const { return lower + (static_cast<double>(i) + 0.5) * spacing; }
  std::size_t size() const { return values.size(); }
};

SampledFunction sample_on_grid(const std::function<double(double)>& f, double M, std::size_t cells = std::size_t{1} << 22);

struct BMOProfile {
  int dimension = 1;
  double M = 0.0;
  SampledFunction f;
  std::vector<Ball> balls;
  std::vector<double> averages;
  std::vector<double> oscillations;
  double norm_star = 0.0;  ///< max oscillation over the family
  std::size_t argmax = 0;

  /// Cell average of f over the cells whose centers lie in [c - r, c + r].
  double ball_average(double center, double radius) const;
};

/// Throws EmptyBall when a ball contains no cell center, Error when a ball
/// leaves the sampled interval.
BMOProfile bmo_norm(SampledFunction f, double M, std::span<const Ball> family);
BMOProfile bmo_norm(const std::function<double(double)>& f, double M, std::span<const Ball> family,
                    std::size_t cells = std::size_t{1} << 22);

struct JNFit {
  std::vector<double> etas;
  std::vector<double> measures;  ///< Leb{x in B_M : |f - (f)_{B_M}| > eta}
  double decay_rate = 0.0;       ///< fitted exponent per unit eta
  double c_fit = 0.0;            ///< decay_rate * norm_star
  double C_fit = 0.0;            ///< max measure exp(c_fit eta / norm_star) / |B_M|
  double r_squared = 0.0;
  bool trivially_decayed = false;  ///< every superlevel is empty
};

/// norm_star * (1 + j/2), j = 0..10.
std::vector<double> default_eta_grid(double norm_star);

/// Least-squares fit of log-measure against eta on the nonempty superlevels.
/// Throws DegenerateFit when norm_star is zero or 1-2 superlevels are nonempty.
JNFit jn_decay_check(const BMOProfile& profile, std::span<const double> etas);

struct Lemma52Report {
  double average = 0.0;        ///< (f)_{B_M}
  double average_bound = 0.0;  ///< 2^{d+1} norm_star
  bool average_holds = false;
  std::vector<double> lambdas;
  std::vector<double> T;      ///< int (f - lambda norm_star)_+
  std::vector<double> bound;  ///< C norm_star exp(-c lambda) with the fitted pair
  double slope = 0.0;         ///< of log T against lambda on the nonzero range
  double r_squared = 0.0;
  double c = 0.0;  ///< -slope
  double C = 0.0;  ///< smallest constant making bound >= T at every lambda
  bool monotone = false;
  bool convex = false;

  bool passed() const { return average_holds && monotone && convex && (c > 0.0 || T.back() == 0.0); }
};

/// Throws NegativeInput on negative samples, Error when f is nonzero outside
/// B_M, LambdaTooSmall when some lambda <= 2^{d+2}.
Lemma52Report lemma52_checks(const BMOProfile& profile, std::span<const double> lambdas);

/// BMO part of div b, analysed once for an autonomous field.
struct BmoDivergenceData {
  double M = 0.0;
  BMOProfile profile;  ///< of d2(0, .)
  JNFit jn;
  Lemma52Report lemma;
  TimeFn d1_sup;
  TimeFn sigma;  ///< ||d2(t, .)||_*
};

/// Throws BadSplit when the field has no divergence split, when d2 is not
/// supported in B_M, or when M is smaller than the declared support radius.
BmoDivergenceData analyze_bmo_divergence(const VelocityFieldSpec& field, double M, std::span<const double> lambdas,
                                         std::size_t cells = std::size_t{1} << 22);

/// Largest tau0 <= T with int_0^tau0 sigma = fraction * c (or T when the whole
/// horizon stays below the 0.5 c ceiling). fraction must lie in [0.4, 0.5].
double choose_tau0(const BmoDivergenceData& data, double horizon, double fraction = 0.45);

struct BmoGronwallReport {
  double delta = 0.0;
  double R = 0.0;
  double lambda = 0.0;
  double tau0 = 0.0;
  GammaTrace trace;                ///< restricted to t <= tau0, with bound
  std::vector<double> A, B, C, D;  ///< cumulative integrals of a_lambda, b_{lambda,R}, c_R, d_lambda
  double K = 0.0;
  double decay_product = 0.0;  ///< exp(A(tau0)) D(tau0)
  double max_ratio = 0.0;
  bool passed() const { return max_ratio <= 1.0; }
};

/// Gamma(t) <= exp(A)(Gamma(0) + B + log(1 + pi^2/(4 delta))(C + D)) (1 + slack) on [0, tau0], with
///   a = ||d1|| + lambda sigma + (d+1) b2,
///   b = K (||d1|| + lambda sigma) ||phi_R||_1 + K C sigma e^{-c lambda} + K ||c||_1,
///   c_R = (d+1) int_{|x|>R} b1,  d = C sigma e^{-c lambda},
/// where (C, c) are the fitted lemma constants and K = sup |r beta_delta'|.
BmoGronwallReport bmo_gronwall_diagnostic(const DensityRepresentation& u, double delta, double R, double lambda,
                                          const BmoDivergenceData& data, const VelocityFieldSpec& field,
                                          const DampingFieldSpec& damping, const SpaceTimeQuadrature& quad,
                                          double tau0_fraction = 0.45, double slack = 0.1);

}  // namespace rough_transport
