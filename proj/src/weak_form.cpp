#include "rough_transport/weak_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rough_transport/errors.hpp"
#include "rough_transport/numerics.hpp"
#include "rough_transport/parallel.hpp"

namespace rough_transport {

namespace {

constexpr double kPi = std::numbers::pi;

// Marks nodes on the outer layer of a cell-centred grid.
bool outer_layer(const SpaceTimeQuadrature& q, std::size_t i) {
  for (int a = 0; a < q.dimension; ++a) {
    const auto j = static_cast<int>(i % static_cast<std::size_t>(q.per_axis));
    i /= static_cast<std::size_t>(q.per_axis);
    if (j == 0 || j == q.per_axis - 1) return true;
  }
  return false;
}

void check_shape(const DensityRepresentation& u, const SpaceTimeQuadrature& quad, const char* who) {
  if (u.points.size() != quad.nodes.size() || u.times.size() != quad.times.size()) {
    std::ostringstream msg;
    msg << who << ": density is sampled on " << u.points.size() << " x " << u.times.size()
        << " nodes, quadrature has " << quad.nodes.size() << " x " << quad.times.size();
    throw Error(msg.str());
  }
}

// Returns the allowance for test-function mass outside the box, or throws.
double support_allowance(const SpaceTimeTestFunction& phi, const DensityRepresentation& u,
                         const SpaceTimeQuadrature& quad, double sup_beta, const char* who) {
  if (phi.support_radius <= quad.half_width) return 0.0;
  if (quad.tail_policy == TailPolicy::analytic_bound) {
    if (!phi.tail_mass) throw SupportOverflow(std::string(who) + ": test function has no tail bound");
    return sup_beta * phi.tail_mass(quad.half_width);
  }
  for (std::size_t k = 0; k < u.times.size(); ++k)
    for (std::size_t i = 0; i < quad.nodes.size(); ++i)
      if (outer_layer(quad, i) && u.at(k, i) != 0.0) {
        std::ostringstream msg;
        msg << who << ": test function support (radius " << phi.support_radius << ") exceeds the box of half-width "
            << quad.half_width << " and u does not vanish on the outer layer (t = " << u.times[k] << ")";
        throw SupportOverflow(msg.str());
      }
  return 0.0;
}

double damping_at(const DampingFieldSpec& damping, double t, const Vec& x, double eta) {
  if (!damping.singular_set.empty() && distance_to_singular_set(damping, x) <= eta) return 0.0;
  return damping.eval_c(t, x);
}

struct SliceSums {
  double gamma = 0.0;  // sum phi beta(u) dx
  double rhs = 0.0;    // sum [(phi_t + grad phi . b) beta + phi (div (beta - u beta') + c u beta')] dx
};

SliceSums slice(const DensityRepresentation& u, std::size_t k, const Renormalizer& beta,
                const SpaceTimeTestFunction& phi, const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                const SpaceTimeQuadrature& quad, double eta) {
  const double t = quad.times[k];
  CompensatedSum g, r;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const Vec& x = quad.nodes[i];
    const double p = phi.eval(t, x);
    const Vec gp = phi.grad(t, x);
    const double pt = phi.dt(t, x);
    if (p == 0.0 && pt == 0.0 && gp.norm2() == 0.0) continue;
    const double v = u.at(k, i);
    const double bv = beta.beta(v);
    g.add(p * bv * quad.cell_volume);
    if (v == 0.0 && bv == 0.0) continue;
    const double ub = v * beta.beta_prime(v);
    double term = (pt + gp.dot(field.eval_b(t, x))) * bv;
    if (p != 0.0) term += p * (field.eval_div_b(t, x) * (bv - ub) + damping_at(damping, t, x, eta) * ub);
    r.add(term * quad.cell_volume);
  }
  return {g.value(), r.value()};
}

}  // namespace

double SpaceTimeQuadrature::weight_sum() const {
  return cell_volume * static_cast<double>(nodes.size()) * compensated_sum(time_weights);
}

SpaceTimeQuadrature make_quadrature(int dimension, double half_width, int per_axis, double horizon, int time_intervals,
                                    TailPolicy policy) {
  if (time_intervals < 1) throw Error("make_quadrature: time_intervals must be positive");
  if (!(horizon > 0.0)) throw Error("make_quadrature: horizon must be positive");
  const SeedGrid g = make_seed_grid(dimension, per_axis, half_width);
  SpaceTimeQuadrature q;
  q.dimension = dimension;
  q.half_width = half_width;
  q.per_axis = per_axis;
  q.spacing = g.spacing;
  q.cell_volume = g.cell_volume;
  q.nodes = g.points;
  q.times.resize(static_cast<std::size_t>(time_intervals) + 1);
  for (int k = 0; k <= time_intervals; ++k) q.times[static_cast<std::size_t>(k)] = horizon * k / time_intervals;
  q.times.back() = horizon;
  q.time_weights = simpson_weights(time_intervals, horizon / time_intervals);
  q.tail_policy = policy;
  return q;
}

SpaceTimeTestFunction make_compact_test(double a, double horizon) {
  if (!(a > 0.0) || !(horizon > 0.0)) throw Error("make_compact_test: a and horizon must be positive");
  SpaceTimeTestFunction f;
  f.label = "compact(a=" + format_double(a) + ")";
  auto eta = [horizon](double t) {
    const double c = std::cos(0.5 * kPi * t / horizon);
    return c * c;
  };
  auto eta_dt = [horizon](double t) { return -0.5 * kPi / horizon * std::sin(kPi * t / horizon); };
  auto psi = [a](const Vec& x) {
    const double q = 1.0 - x.norm2() / (a * a);
    return q > 0.0 ? q * q * q * q : 0.0;
  };
  f.eval = [=](double t, const Vec& x) { return eta(t) * psi(x); };
  f.dt = [=](double t, const Vec& x) { return eta_dt(t) * psi(x); };
  f.grad = [=](double t, const Vec& x) {
    const double q = 1.0 - x.norm2() / (a * a);
    Vec g(x.dim());
    if (q <= 0.0) return g;
    return x * (eta(t) * 4.0 * q * q * q * (-2.0 / (a * a)));
  };
  f.support_radius = a;
  f.tail_mass = [a](double rho) { return rho >= a ? 0.0 : kInf; };
  return f;
}

SpaceTimeTestFunction make_static_test(const TestFunctionPhiR& phi) {
  SpaceTimeTestFunction f;
  f.label = "phi_R(R=" + format_double(phi.R()) + ")";
  f.eval = [phi](double, const Vec& x) { return phi.eval(x); };
  f.dt = [](double, const Vec&) { return 0.0; };
  f.grad = [phi](double, const Vec& x) { return phi.eval_grad(x); };
  f.support_radius = kInf;
  f.tail_mass = [phi](double rho) { return phi.tail_mass(rho); };
  return f;
}

WeakResidualReport weak_residual(const DensityRepresentation& u, const Renormalizer& beta,
                                 const SpaceTimeTestFunction& phi, const VelocityFieldSpec& field,
                                 const DampingFieldSpec& damping, const InitialDatum& u0,
                                 const SpaceTimeQuadrature& quad, double eta) {
  check_shape(u, quad, "weak_residual");
  WeakResidualReport rep;
  rep.tail_allowance = support_allowance(phi, u, quad, beta.sup_beta, "weak_residual");

  const std::size_t K = quad.times.size();
  std::vector<double> rhs(K);
  parallel_for(K, [&](std::size_t k) { rhs[k] = slice(u, k, beta, phi, field, damping, quad, eta).rhs; });

  CompensatedSum total, mass;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const double p0 = phi.eval(0.0, quad.nodes[i]);
    total.add(p0 * beta.beta(u0.eval(quad.nodes[i])) * quad.cell_volume);
    mass.add(p0 * quad.cell_volume);
    const double pT = phi.eval(quad.horizon(), quad.nodes[i]);
    if (pT != 0.0) total.add(-pT * beta.beta(u.at(K - 1, i)) * quad.cell_volume);
  }
  for (std::size_t k = 0; k < K; ++k) total.add(quad.time_weights[k] * rhs[k]);
  rep.signed_residual = total.value();
  rep.residual = std::abs(rep.signed_residual);
  rep.phi_mass = mass.value();
  rep.history.push_back({quad.spacing, quad.time_step(), rep.residual});
  return rep;
}

WeakResidualReport weak_residual_study(std::span<const RefinementLevel> levels, double half_width,
                                       const std::function<DensityRepresentation(const SpaceTimeQuadrature&)>& make_u,
                                       const Renormalizer& beta, const SpaceTimeTestFunction& phi,
                                       const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                                       const InitialDatum& u0, TailPolicy policy) {
  if (levels.empty()) throw Error("weak_residual_study: no refinement levels");
  WeakResidualReport last;
  std::vector<WeakResidualRow> history;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (j > 0 && !(levels[j].per_axis > levels[j - 1].per_axis && levels[j].time_intervals > levels[j - 1].time_intervals))
      throw Error("weak_residual_study: levels must be strictly refining");
    const auto quad = make_quadrature(field.dimension, half_width, levels[j].per_axis, field.horizon,
                                      levels[j].time_intervals, policy);
    last = weak_residual(make_u(quad), beta, phi, field, damping, u0, quad);
    history.push_back(last.history.front());
  }
  last.history = history;
  if (history.size() >= 2) {
    std::vector<double> lh, lr;
    for (const auto& row : history) {
      lh.push_back(std::log(row.h));
      lr.push_back(std::log(std::max(row.residual, 1e-300)));
    }
    last.order = fit_line(lh, lr).slope;
  }
  return last;
}

GammaTrace gamma_trace(const DensityRepresentation& u, const Renormalizer& beta, const SpaceTimeTestFunction& phi,
                       const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                       const SpaceTimeQuadrature& quad, double eta) {
  check_shape(u, quad, "gamma_trace");
  GammaTrace tr;
  tr.tail_allowance = support_allowance(phi, u, quad, beta.sup_beta, "gamma_trace");
  const std::size_t K = quad.times.size();
  tr.times = quad.times;
  tr.gamma.resize(K);
  tr.rhs.resize(K);
  parallel_for(K, [&](std::size_t k) {
    const SliceSums s = slice(u, k, beta, phi, field, damping, quad, eta);
    tr.gamma[k] = s.gamma + tr.tail_allowance;
    tr.rhs[k] = s.rhs;
  });
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double tau = quad.times[k + 1] - quad.times[k];
    const double fd = (tr.gamma[k + 1] - tr.gamma[k]) / tau;
    tr.consistency = std::max(tr.consistency, std::abs(fd - 0.5 * (tr.rhs[k] + tr.rhs[k + 1])));
  }
  return tr;
}

EnergyCurve l2_energy_diagnostic(const DensityRepresentation& u, const VelocityFieldSpec& field,
                                 const DampingFieldSpec& damping, const SpaceTimeQuadrature& quad) {
  if (!damping.is_bounded())
    throw UnboundedDamping("l2_energy_diagnostic: damping '" + damping.name + "' is not bounded");
  check_shape(u, quad, "l2_energy_diagnostic");
  EnergyCurve e;
  const std::size_t K = quad.times.size();
  e.times = quad.times;
  e.l2.resize(K);
  std::vector<double> rate(K);
  for (std::size_t k = 0; k < K; ++k) {
    CompensatedSum s;
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) s.add(u.at(k, i) * u.at(k, i) * quad.cell_volume);
    e.l2[k] = s.value();
    rate[k] = 2.0 * damping.sup_norm(quad.times[k]) + field.div_sup(quad.times[k]);
  }
  const auto integral = cumulative_trapezoid(rate, quad.time_step());
  e.envelope.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    e.envelope[k] = e.l2[0] * std::exp(integral[k]);
    const double ratio = e.envelope[k] > 0.0 ? e.l2[k] / e.envelope[k] : (e.l2[k] > 0.0 ? kInf : 0.0);
    e.max_ratio = std::max(e.max_ratio, ratio);
  }
  return e;
}

namespace {

struct GronwallTerms {
  std::vector<double> A, B, C;
};

GronwallTerms gronwall_terms(const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                             std::span<const double> times, double R, double K) {
  if (!field.split) throw Error("gronwall: field '" + field.name + "' declares no growth split");
  const GrowthSplit& split = *field.split;
  const int d = field.dimension;
  const double phi_l1 = make_phi_R(R, d).l1_norm();
  const std::size_t n = times.size();
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = times[k];
    const double div = field.div_sup(t);
    a[k] = div + (d + 1) * split.b2(t);
    b[k] = K * (damping.l1_slice(t) + div * phi_l1);
    c[k] = (d + 1) * split.b1_tail_l1(t, R);
  }
  const double dt = n > 1 ? times[1] - times[0] : 0.0;
  return {cumulative_trapezoid(a, dt), cumulative_trapezoid(b, dt), cumulative_trapezoid(c, dt)};
}

}  // namespace

GronwallReport gronwall_log_diagnostic(const DensityRepresentation& u, double delta, double R,
                                       const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                                       const SpaceTimeQuadrature& quad, double slack, double eta) {
  GronwallReport rep;
  rep.delta = delta;
  rep.R = R;
  const Renormalizer beta = make_beta_log(delta);
  const TestFunctionPhiR phi = make_phi_R(R, field.dimension);
  rep.trace = gamma_trace(u, beta, make_static_test(phi), field, damping, quad, eta);
  rep.K = beta.sup_rbeta_prime;
  auto terms = gronwall_terms(field, damping, quad.times, R, rep.K);
  rep.A = std::move(terms.A);
  rep.B = std::move(terms.B);
  rep.C = std::move(terms.C);
  const double gamma0 = rep.trace.gamma.front();
  rep.trace.bound.resize(quad.times.size());
  for (std::size_t k = 0; k < quad.times.size(); ++k) {
    const double bound = std::exp(rep.A[k]) * (gamma0 + rep.B[k] + beta.sup_beta * rep.C[k]) * (1.0 + slack);
    rep.trace.bound[k] = bound;
    const double g = rep.trace.gamma[k];
    const double ratio = bound > 0.0 ? g / bound : (g > 0.0 ? kInf : 0.0);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

DensityRepresentation twin_difference(const InitialDatum& u0, const VelocityFieldSpec& field,
                                      const DampingFieldSpec& damping, const SpaceTimeQuadrature& quad,
                                      int coarse_steps_per_interval, double eta) {
  const auto coarse = represent_pointwise_history(u0, field, damping, quad.nodes, quad.cell_volume, quad.times,
                                                  coarse_steps_per_interval, eta);
  auto fine = represent_pointwise_history(u0, field, damping, quad.nodes, quad.cell_volume, quad.times,
                                          2 * coarse_steps_per_interval, eta);
  for (std::size_t j = 0; j < fine.values.size(); ++j) fine.values[j] = coarse.values[j] - fine.values[j];
  return fine;
}

UniquenessBoundData uniqueness_bound_data(const VelocityFieldSpec& field, const DampingFieldSpec& damping,
                                          std::span<const double> times, double R, double R_limit, double K) {
  const auto at_R = gronwall_terms(field, damping, times, R, K);
  const auto at_limit = gronwall_terms(field, damping, times, R_limit, K);
  UniquenessBoundData data;
  data.dimension = field.dimension;
  data.A = at_R.A.back();
  data.B = at_R.B.back();
  data.C = at_R.C.back();
  data.C_limit = at_limit.C.back();
  return data;
}

UniquenessReport uniqueness_probe(const DensityRepresentation& u, double gamma_level, double R0,
                                  std::span<const double> delta_list, const UniquenessBoundData& bound) {
  UniquenessReport rep;
  for (std::size_t k = 0; k < u.times.size(); ++k) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < u.points.size(); ++i) {
      const double a = std::atan(u.at(k, i));
      if (u.points[i].norm() < R0 && a * a > gamma_level) ++count;
    }
    rep.m = std::max(rep.m, static_cast<double>(count) * u.cell_volume);
  }
  const double two_d1 = std::pow(2.0, bound.dimension + 1);
  const double eA = std::exp(bound.A);
  for (double delta : delta_list) {
    UniquenessRow row;
    row.delta = delta;
    row.lhs = rep.m / two_d1;
    row.rhs = eA * (bound.B + std::log1p(kPi * kPi / (4.0 * delta)) * bound.C) / std::log1p(gamma_level / delta);
    row.holds = row.lhs <= row.rhs;
    rep.rows.push_back(row);
  }
  rep.limit_bound = eA * bound.C_limit * two_d1;
  if (rep.m == 0.0)
    rep.verdict = "trivially_consistent";
  else if (rep.limit_bound < rep.m)
    rep.verdict = "forces_zero";
  else
    rep.verdict = "inconclusive";
  return rep;
}

}  // namespace rough_transport
