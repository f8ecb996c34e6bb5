#include "rough_transport/solution_rep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rough_transport/errors.hpp"
#include "rough_transport/numerics.hpp"
#include "rough_transport/parallel.hpp"

namespace rough_transport {

DampingAccumulator damping_integral(const DampingFieldSpec& damping, const FlowMap& flow, double eta,
                                    double cell_volume) {
  if (!(eta >= 0.0)) throw Error("damping_integral: eta must be nonnegative");
  const std::size_t n = flow.steps() + 1;
  const auto& times = flow.time_grid();
  const double dt = n > 1 ? times[1] - times[0] : 0.0;
  const bool singular = !damping.singular_set.empty();

  DampingAccumulator acc;
  acc.seeds = flow.seeds();
  acc.samples = n;
  acc.eta = eta;
  acc.D.assign(acc.seeds * n, 0.0);
  std::vector<std::size_t> truncated(acc.seeds, 0);
  std::vector<double> moving_l1(acc.seeds, 0.0), static_l1(acc.seeds, 0.0);

  parallel_for(acc.seeds, [&](std::size_t i) {
    std::vector<double> c(n), c_abs(n), c_static(n);
    const Vec x0 = flow.position(i, 0);
    const bool x0_excluded = singular && distance_to_singular_set(damping, x0) <= eta;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec x = flow.position(i, k);
      if (singular && distance_to_singular_set(damping, x) <= eta) {
        c[k] = 0.0;
        ++truncated[i];
      } else {
        c[k] = damping.eval_c(times[k], x);
      }
      c_abs[k] = std::abs(c[k]);
      c_static[k] = x0_excluded ? 0.0 : std::abs(damping.eval_c(times[k], x0));
    }
    const auto D = cumulative_trapezoid(c, dt);
    std::copy(D.begin(), D.end(), acc.D.begin() + static_cast<std::ptrdiff_t>(i * n));
    moving_l1[i] = cell_volume * cumulative_trapezoid(c_abs, dt).back();
    static_l1[i] = cell_volume * cumulative_trapezoid(c_static, dt).back();
  });

  for (std::size_t i = 0; i < acc.seeds; ++i) {
    if (truncated[i] == n) {
      std::ostringstream msg;
      msg << "damping_integral: every node of trajectory " << i << " lies within eta = " << eta
          << " of the singular set";
      throw AllTruncated(msg.str(), i);
    }
    acc.truncated_nodes += truncated[i];
  }
  acc.total_l1 = compensated_sum(moving_l1);
  acc.reference_l1 = compensated_sum(static_l1);
  return acc;
}

bool damping_l1_bound_holds(const DampingAccumulator& acc, double compressibility, double slack) {
  return acc.total_l1 <= compressibility * acc.reference_l1 * (1.0 + slack);
}

const char* to_string(RepresentationMode m) {
  return m == RepresentationMode::pointwise ? "pointwise" : "pushforward";
}

double DensityRepresentation::mass(std::size_t k) const {
  CompensatedSum s;
  for (std::size_t i = 0; i < points.size(); ++i) s.add(at(k, i) * cell_volume);
  return s.value();
}

namespace {

double compose(double u0, double jx, double D) {
  if (!(jx > 0.0) || !std::isfinite(jx)) {
    std::ostringstream msg;
    msg << "represent_pointwise: Jacobian " << jx << " is not positive and finite";
    throw JacobianVanished(msg.str());
  }
  if (u0 == 0.0) return 0.0;
  return u0 / jx * std::exp(D);
}

}  // namespace

DensityRepresentation represent_pointwise(const InitialDatum& u0, const FlowMap& backward, const JacobianTrack& track,
                                          const DampingAccumulator& acc, double cell_volume) {
  if (track.seeds != backward.seeds() || acc.seeds != backward.seeds())
    throw Error("represent_pointwise: track/accumulator do not match the flow");
  DensityRepresentation rep;
  rep.mode = RepresentationMode::pointwise;
  rep.dimension = backward.dimension();
  rep.times = {backward.end_time()};
  rep.cell_volume = cell_volume;
  rep.points.resize(backward.seeds());
  rep.values.resize(backward.seeds());
  for (std::size_t i = 0; i < backward.seeds(); ++i) {
    rep.points[i] = backward.final_position(i);
    rep.values[i] = compose(u0.eval(backward.initial_position(i)), track.final_jacobian(i), acc.final_value(i));
  }
  return rep;
}

DensityRepresentation represent_pointwise_history(const InitialDatum& u0, const VelocityFieldSpec& field,
                                                  const DampingFieldSpec& damping, std::span<const Vec> points,
                                                  double cell_volume, std::span<const double> times,
                                                  int steps_per_interval, double eta) {
  if (times.empty() || times.front() != 0.0) throw Error("represent_pointwise_history: times must start at 0");
  if (steps_per_interval < 1) throw Error("represent_pointwise_history: steps_per_interval must be positive");
  DensityRepresentation rep;
  rep.mode = RepresentationMode::pointwise;
  rep.dimension = field.dimension;
  rep.times.assign(times.begin(), times.end());
  rep.points.assign(points.begin(), points.end());
  rep.cell_volume = cell_volume;
  rep.values.assign(times.size() * points.size(), 0.0);
  double radius = 0.0;
  for (const Vec& p : points) radius = std::max(radius, p.norm());
  radius = std::max(radius, 1.0);

  for (std::size_t i = 0; i < points.size(); ++i) rep.at(0, i) = u0.eval(points[i]);
  for (std::size_t k = 1; k < times.size(); ++k) {
    FlowOptions opt;
    opt.end_time = times[k];
    const FlowMap back =
        integrate_flow(field, points, radius, static_cast<int>(k) * steps_per_interval, Direction::backward, opt);
    const JacobianTrack track = jacobian(field, back);
    const DampingAccumulator acc = damping_integral(damping, back, eta, cell_volume);
    for (std::size_t i = 0; i < points.size(); ++i)
      rep.at(k, i) = compose(u0.eval(back.initial_position(i)), track.final_jacobian(i), acc.final_value(i));
  }
  return rep;
}

TargetGrid make_target_grid(int dimension, int per_axis, double radius) {
  const SeedGrid g = make_seed_grid(dimension, per_axis, radius);
  TargetGrid t;
  t.dimension = dimension;
  t.per_axis = per_axis;
  t.spacing = g.spacing;
  t.lower = -radius + 0.5 * g.spacing;
  t.nodes = g.points;
  return t;
}

CicDeposit deposit_cic(const TargetGrid& target, std::span<const Vec> positions, std::span<const double> weights) {
  if (positions.size() != weights.size()) throw Error("deposit_cic: positions and weights differ in length");
  const int d = target.dimension;
  const int n = target.per_axis;
  const double cell = std::pow(target.spacing, d);
  std::vector<CompensatedSum> mass(target.nodes.size());
  CompensatedSum total, clamped;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    total.add(w);
    const Vec& x = positions[i];
    std::array<int, Vec::kMaxDim> base{};
    std::array<double, Vec::kMaxDim> frac{};
    bool outside = false;
    for (int a = 0; a < d; ++a) {
      double s = (x[a] - target.lower) / target.spacing;
      const double r = std::round(s);
      if (std::abs(s - r) < 1e-9) s = r;
      if (s <= 0.0) {
        outside = outside || s < 0.0;
        base[a] = 0;
        frac[a] = 0.0;
      } else if (s >= n - 1) {
        outside = outside || s > n - 1;
        base[a] = n - 1;
        frac[a] = 0.0;
      } else {
        base[a] = static_cast<int>(std::floor(s));
        frac[a] = s - base[a];
      }
    }
    if (outside) clamped.add(w);
    for (int corner = 0; corner < (1 << d); ++corner) {
      double weight = 1.0;
      std::size_t flat = 0, stride = 1;
      for (int a = 0; a < d; ++a) {
        const int bit = (corner >> a) & 1;
        weight *= bit ? frac[a] : 1.0 - frac[a];
        flat += static_cast<std::size_t>(base[a] + bit) * stride;
        stride *= static_cast<std::size_t>(n);
      }
      if (weight == 0.0) continue;
      mass[flat].add(weight * w);
    }
  }
  CicDeposit out;
  out.density.resize(mass.size());
  for (std::size_t j = 0; j < mass.size(); ++j) out.density[j] = mass[j].value() / cell;
  out.total_weight = total.value();
  out.clamped_weight = clamped.value();
  return out;
}

DensityRepresentation represent_pushforward(const InitialDatum& u0, const SeedGrid& seeds, const FlowMap& forward,
                                            const DampingAccumulator& acc, const TargetGrid& target, std::size_t k) {
  if (forward.seeds() != seeds.size() || acc.seeds != seeds.size())
    throw Error("represent_pushforward: flow/accumulator do not match the seed grid");
  if (k > forward.steps()) throw Error("represent_pushforward: time index out of range");
  std::vector<Vec> positions(seeds.size());
  std::vector<double> weights(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const double u = u0.eval(seeds.points[i]);
    weights[i] = u == 0.0 ? 0.0 : u * std::exp(acc.at(i, k)) * seeds.cell_volume;
    positions[i] = forward.position(i, k);
  }
  const CicDeposit dep = deposit_cic(target, positions, weights);

  DensityRepresentation rep;
  rep.mode = RepresentationMode::pushforward;
  rep.dimension = target.dimension;
  rep.times = {forward.time_grid()[k]};
  rep.points = target.nodes;
  rep.cell_volume = std::pow(target.spacing, target.dimension);
  rep.values = dep.density;
  rep.total_weight = dep.total_weight;
  rep.out_of_domain_fraction = dep.total_weight > 0.0 ? dep.clamped_weight / dep.total_weight : 0.0;
  return rep;
}

double l1_distance(const DensityRepresentation& a, const DensityRepresentation& b) {
  if (a.points.size() != b.points.size()) throw Error("l1_distance: point sets differ");
  const std::size_t ka = a.times.size() - 1, kb = b.times.size() - 1;
  CompensatedSum s;
  for (std::size_t i = 0; i < a.points.size(); ++i) s.add(std::abs(a.at(ka, i) - b.at(kb, i)) * a.cell_volume);
  return s.value();
}

IntegrabilityProbe integrability_probe(const InitialDatum& u0, const DampingFieldSpec& damping, double t,
                                       std::span<const double> etas) {
  IntegrabilityProbe probe;
  auto integrand = [&](double x) {
    const Vec p{x};
    const double u = u0.eval(p);
    return u == 0.0 ? 0.0 : u * std::exp(t * damping.eval_c(t, p));
  };
  bool overflow = false;
  for (double eta : etas) {
    if (!(eta > 0.0 && eta < 1.0)) throw Error("integrability_probe: eta must lie in (0, 1)");
    CompensatedSum s;
    // Geometric panels resolve the growth near the singularity at 0.
    for (double lo = eta; lo < 1.0;) {
      const double hi = std::min(1.0, lo * 1.1);
      s.add(gauss_integrate(integrand, lo, hi));
      s.add(gauss_integrate(integrand, -hi, -lo));
      lo = hi;
    }
    const double value = s.value();
    probe.etas.push_back(eta);
    probe.integrals.push_back(value);
    if (!std::isfinite(value)) overflow = true;
  }
  for (std::size_t j = 1; j < probe.integrals.size(); ++j)
    probe.ratios.push_back(probe.integrals[j] / probe.integrals[j - 1]);

  const bool all_large = !probe.ratios.empty() &&
                         std::all_of(probe.ratios.begin(), probe.ratios.end(), [](double r) { return r >= 10.0; });
  if (overflow || all_large) {
    probe.verdict = "divergent";
  } else if (probe.integrals.size() >= 2 &&
             std::abs(probe.integrals.back() - probe.integrals[probe.integrals.size() - 2]) < 1e-8) {
    probe.verdict = "convergent";
  } else {
    probe.verdict = "inconclusive";
  }
  return probe;
}

}  // namespace rough_transport
