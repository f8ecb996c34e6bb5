#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rough_transport/field_library.hpp"
#include "rough_transport/vec.hpp"

namespace rough_transport {

/// Cell-centred uniform grid on [-r, r]^d. With an even count per axis no
/// seed lies on a coordinate hyperplane.
struct SeedGrid {
  int dimension = 1;
  int per_axis = 0;
  double bounding_radius = 0.0;
  double spacing = 0.0;
  double cell_volume = 0.0;
  std::vector<Vec> points;

  std::size_t size() const { return points.size(); }
  /// Multi-index of seed i (axis 0 fastest).
  std::array<int, Vec::kMaxDim> index(std::size_t i) const;
  bool on_boundary_layer(std::size_t i) const;
};

SeedGrid make_seed_grid(int dimension, int per_axis, double radius);

enum class Direction { forward, backward };

/// Trajectories sampled on a uniform time grid, stored in time order.
/// A backward map holds, for each arrival point x_i, the path
/// s -> X(s, X^{-1}(t_K, x_i)), so position(i, 0) is the inverse image and
/// position(i, K) = x_i.
class FlowMap {
 public:
  FlowMap() = default;
  FlowMap(int dimension, std::size_t seeds, std::vector<double> time_grid, Direction direction);

  int dimension() const { return dim_; }
  std::size_t seeds() const { return seeds_; }
  std::size_t steps() const { return times_.empty() ? 0 : times_.size() - 1; }
  Direction direction() const { return direction_; }
  const std::vector<double>& time_grid() const { return times_; }
  double end_time() const { return times_.back(); }

  Vec position(std::size_t seed, std::size_t k) const;
  void set_position(std::size_t seed, std::size_t k, const Vec& x);
  /// Sample at t_K.
  Vec final_position(std::size_t seed) const { return position(seed, steps()); }
  /// Sample at t_0.
  Vec initial_position(std::size_t seed) const { return position(seed, 0); }

 private:
  int dim_ = 1;
  std::size_t seeds_ = 0;
  std::vector<double> times_;
  Direction direction_ = Direction::forward;
  std::vector<double> data_;  // [seed][k][dim]
};

struct FlowOptions {
  /// Escape threshold on |X|; <= 0 selects 1e3 * bounding radius.
  double escape_radius = 0.0;
  /// End of the time interval; <= 0 selects the field horizon.
  double end_time = 0.0;
};

/// Classical RK4 with uniform step end_time / steps. Parallel over seeds.
/// Throws StepBlowup naming the first seed whose trajectory leaves the
/// escape ball or becomes non-finite.
FlowMap integrate_flow(const VelocityFieldSpec& field, std::span<const Vec> points, double bounding_radius,
                       int steps, Direction direction, const FlowOptions& options = {});
FlowMap integrate_flow(const VelocityFieldSpec& field, const SeedGrid& seeds, int steps, Direction direction,
                       const FlowOptions& options = {});

struct JacobianTrack {
  std::size_t seeds = 0;
  std::size_t samples = 0;  ///< time nodes per seed
  std::vector<double> div_path_integral;  ///< [seed][k]
  std::vector<double> jx;                 ///< [seed][k]
  /// Trapezoid of div_sup over the flow's time grid.
  double L = 0.0;

  double path(std::size_t seed, std::size_t k) const { return div_path_integral[seed * samples + k]; }
  double jacobian(std::size_t seed, std::size_t k) const { return jx[seed * samples + k]; }
  double final_jacobian(std::size_t seed) const { return jacobian(seed, samples - 1); }
};

/// JX = exp(composite trapezoid of div b along each sampled trajectory).
/// Works on either direction since trajectories are stored in time order.
/// Throws DivergenceUnbounded when |path integral| > 10 L max(T, 1).
JacobianTrack jacobian(const VelocityFieldSpec& field, const FlowMap& flow);

/// Largest violation of e^{-L} <= jx <= e^{L}; <= 0 means the bounds hold.
double jacobian_bound_violation(const JacobianTrack& track);

struct JacobianOdeResidual {
  double jx = 0.0;      ///< max |D jx - avg(jx div b)|
  double inv_jx = 0.0;  ///< max |D (1/jx) + avg(div b / jx)|
};

/// Forward difference of jx against the trapezoidal average of its
/// right-hand side over each step.
JacobianOdeResidual jacobian_ode_residual(const VelocityFieldSpec& field, const FlowMap& flow,
                                          const JacobianTrack& track);

struct TestIntegrand {
  std::function<double(const Vec&)> eval;
  /// Reference value of the integral over R^d.
  double integral = 0.0;
  /// Integral of |phi| over {|y| > rho}.
  std::function<double(double rho)> tail_mass;
};

/// |sum_i phi(X(t_k, x_i)) jx(t_k, x_i) cell_volume - int phi|.
/// Throws DomainTooSmall when phi carries more than 1e-8 of its mass outside
/// the largest ball contained in the image of the seed box.
double change_of_variables_residual(const SeedGrid& seeds, const FlowMap& flow, const JacobianTrack& track,
                                    const TestIntegrand& phi, std::size_t k);

/// Empirical compressibility constant: probe cells are blocks of
/// `block` x ... x `block` seed cells; returns the largest ratio of mass
/// mapped into a probe cell to its volume at time index k.
double compressibility_estimate(const SeedGrid& seeds, const FlowMap& flow, int block, std::size_t k);

/// cell_volume * max_k #{i : |x_i| < r, |X(t_k, x_i)| > R}.
double superlevel_escape(const SeedGrid& seeds, const FlowMap& flow, double r, double R);

/// max_i |X^{-1}(T, X(T, x_i)) - x_i|.
double composition_error(const VelocityFieldSpec& field, const SeedGrid& seeds, int steps);

struct ConvergenceRow {
  double eps = 0.0;
  double flow_discrepancy = 0.0;      ///< mean |X^eps(T) - X^{eps/2}(T)|
  double jacobian_discrepancy = 0.0;  ///< mean |JX^eps(T) - JX^{eps/2}(T)|
};

/// Mollifies at each eps and eps/2, integrates identically and compares
/// endpoints. eps_list must be strictly decreasing.
std::vector<ConvergenceRow> flow_convergence_study(const VelocityFieldSpec& field, std::span<const double> eps_list,
                                                   const SeedGrid& seeds, int steps);

}  // namespace rough_transport
