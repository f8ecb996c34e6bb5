#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rough_transport/field_library.hpp"
#include "rough_transport/lagrangian_flow.hpp"

namespace rough_transport {

/// D(t_k, x_i) = int_0^{t_k} c(tau, X(tau, x_i)) dtau along each trajectory.
struct DampingAccumulator {
  std::size_t seeds = 0;
  std::size_t samples = 0;
  std::vector<double> D;  ///< [seed][k]
  double eta = 0.0;
  std::size_t truncated_nodes = 0;
  /// Sum over seeds of cell_volume * int_0^T |c(t, X(t, x_i))| dt.
  double total_l1 = 0.0;
  /// Same quadrature with the seeds held fixed: a discrete ||c||_{L^1}.
  double reference_l1 = 0.0;

  double at(std::size_t seed, std::size_t k) const { return D[seed * samples + k]; }
  double final_value(std::size_t seed) const { return at(seed, samples - 1); }
};

/// Trapezoid rule in time; c is replaced by 0 at nodes within eta of the
/// singular set. Throws AllTruncated when a whole trajectory is excluded.
DampingAccumulator damping_integral(const DampingFieldSpec& damping, const FlowMap& flow, double eta,
                                    double cell_volume = 1.0);

/// total_l1 <= compressibility * reference_l1 * (1 + slack).
bool damping_l1_bound_holds(const DampingAccumulator& acc, double compressibility, double slack = 0.2);

enum class RepresentationMode { pointwise, pushforward };

const char* to_string(RepresentationMode m);

/// Density samples u(t_k, x_i) on a fixed point set.
struct DensityRepresentation {
  RepresentationMode mode = RepresentationMode::pointwise;
  int dimension = 1;
  std::vector<double> times;
  std::vector<Vec> points;
  double cell_volume = 0.0;
  std::vector<double> values;  ///< [k][i]
  /// Pushforward only: fraction of particle mass clamped onto the target boundary.
  double out_of_domain_fraction = 0.0;
  /// Pushforward only: sum of particle weights.
  double total_weight = 0.0;

  double at(std::size_t k, std::size_t i) const { return values[k * points.size() + i]; }
  double& at(std::size_t k, std::size_t i) { return values[k * points.size() + i]; }
  double mass(std::size_t k) const;
};

/// u = u0(X^{-1}) / JX(., X^{-1}) * exp(D(., X^{-1})) at the arrival points of
/// a backward flow; track and acc must be built on that same backward flow.
/// Throws JacobianVanished on a non-positive or non-finite Jacobian.
DensityRepresentation represent_pointwise(const InitialDatum& u0, const FlowMap& backward, const JacobianTrack& track,
                                          const DampingAccumulator& acc, double cell_volume = 0.0);

/// Pointwise representation at every node of `times` (uniform, times[0] = 0),
/// each computed by a backward flow with `steps_per_interval` RK4 steps per
/// time interval.
DensityRepresentation represent_pointwise_history(const InitialDatum& u0, const VelocityFieldSpec& field,
                                                  const DampingFieldSpec& damping, std::span<const Vec> points,
                                                  double cell_volume, std::span<const double> times,
                                                  int steps_per_interval = 1, double eta = 0.0);

/// Uniform node lattice used for deposition: nodes lower + j * spacing.
struct TargetGrid {
  int dimension = 1;
  int per_axis = 0;
  double lower = 0.0;
  double spacing = 0.0;
  std::vector<Vec> nodes;
};

/// Nodes at the cell centres of [-r, r]^d with `per_axis` cells per axis.
TargetGrid make_target_grid(int dimension, int per_axis, double radius);

struct CicDeposit {
  std::vector<double> density;  ///< mass per node divided by the node cell volume
  double total_weight = 0.0;
  double clamped_weight = 0.0;  ///< weight of points outside the node box, clamped onto it
};

/// Cloud-in-cell deposition of point weights onto the target nodes. Offsets
/// within 1e-9 cells of a node snap to it; per-node sums are compensated.
CicDeposit deposit_cic(const TargetGrid& target, std::span<const Vec> positions, std::span<const double> weights);

/// Particles x_i with weights u0(x_i) exp(D(t_k, x_i)) cell_volume are moved
/// to X(t_k, x_i) and deposited with multilinear cloud-in-cell weights.
/// Particles outside the lattice are clamped to its boundary nodes.
DensityRepresentation represent_pushforward(const InitialDatum& u0, const SeedGrid& seeds, const FlowMap& forward,
                                            const DampingAccumulator& acc, const TargetGrid& target, std::size_t k);

/// Sum of |u_a - u_b| * cell_volume over matching points of the last time slice.
double l1_distance(const DensityRepresentation& a, const DensityRepresentation& b);

struct IntegrabilityProbe {
  std::string verdict;  ///< "divergent", "convergent" or "inconclusive"
  std::vector<double> etas;
  std::vector<double> integrals;
  std::vector<double> ratios;  ///< integrals[j+1] / integrals[j]
};

/// I_eta = int_{eta <= |x| <= 1} u0(x) exp(t c(x)) dx for each eta (b = 0, d = 1).
/// Divergent when every consecutive ratio is >= 10 or an integral overflows;
/// convergent when the last increment is below 1e-8.
IntegrabilityProbe integrability_probe(const InitialDatum& u0, const DampingFieldSpec& damping, double t,
                                       std::span<const double> etas);

}  // namespace rough_transport
