#include "rough_transport/field_library.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "rough_transport/errors.hpp"
#include "rough_transport/numerics.hpp"

namespace rough_transport {

namespace {

constexpr double kPi = std::numbers::pi;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double beta_fn(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

// Normalized (1 - s^2)^4 in one variable.
constexpr double kRho1Norm = 315.0 / 256.0;

double rho1_poly(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return kRho1Norm * q * q * q * q;
}

double rho1_primitive(double s) {
  s = std::clamp(s, -1.0, 1.0);
  const double s2 = s * s;
  const double poly = s * (1.0 + s2 * (-4.0 / 3.0 + s2 * (6.0 / 5.0 + s2 * (-4.0 / 7.0 + s2 / 9.0))));
  return kRho1Norm * poly + 0.5;
}

// Constant making (1 - |z|^2)^4 a probability density on the unit ball of R^d.
double rho2_norm(int d) { return 2.0 / (unit_sphere_area(d) * beta_fn(0.5 * d, 5.0)); }

GrowthSplit bounded_split(double bound) {
  GrowthSplit s;
  s.b1 = [](double, const Vec&) { return 0.0; };
  s.b2 = [bound](double) { return bound; };
  s.b1_tail_l1 = [](double, double) { return 0.0; };
  return s;
}

}  // namespace

const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::smooth:
      return "smooth";
    case Regularity::lipschitz:
      return "lipschitz";
    case Regularity::bv_nonsmooth:
      return "bv_nonsmooth";
  }
  return "unknown";
}

double unit_sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }

double ball_volume(int d, double r) { return unit_sphere_area(d) / d * std::pow(r, d); }

double distance_to_singular_set(const DampingFieldSpec& damping, const Vec& x) {
  double best = kInf;
  for (const Vec& p : damping.singular_set) best = std::min(best, distance(p, x));
  return best;
}

FieldSample evaluate_field(const VelocityFieldSpec& spec, const DampingFieldSpec& damping, double t, const Vec& x) {
  if (!(t >= 0.0 && t <= spec.horizon)) {
    std::ostringstream msg;
    msg << "evaluate_field: t = " << t << " outside [0, " << spec.horizon << "]";
    throw Error(msg.str());
  }
  for (const Vec& p : damping.singular_set) {
    if (p == x) {
      std::ostringstream msg;
      msg << "evaluate_field: " << x << " is a singular point of damping '" << damping.name << "'";
      throw SingularPoint(msg.str());
    }
  }
  FieldSample s;
  s.b = spec.eval_b(t, x);
  s.divb = spec.eval_div_b(t, x);
  s.c = damping.eval_c(t, x);
  return s;
}

// ---------------------------------------------------------------------------
// Mollification

MollifierSpec make_mollifier(double eps, int dimension) {
  if (!(eps > 0.0)) throw Error("make_mollifier: eps must be positive");
  if (dimension < 1 || dimension > Vec::kMaxDim) throw Error("make_mollifier: dimension must be 1..3");
  MollifierSpec m;
  m.eps = eps;
  m.dimension = dimension;
  m.rho1 = rho1_poly;
  m.rho1_cdf = rho1_primitive;
  const double c2 = rho2_norm(dimension);
  m.rho2 = [c2](const Vec& z) {
    const double r2 = z.norm2();
    if (r2 >= 1.0) return 0.0;
    const double q = 1.0 - r2;
    return c2 * q * q * q * q;
  };
  const GaussRule& g = gauss_legendre_16();
  m.time_nodes = g.nodes;
  m.time_weights = g.weights;

  // Each node is pushed together with its exact negation.
  auto push_pair = [&m](const Vec& z, double w) {
    m.space_nodes.push_back({z, w});
    m.space_nodes.push_back({-z, w});
  };
  const std::size_t half = g.nodes.size() / 2;
  if (dimension == 1) {
    for (std::size_t i = half; i < g.nodes.size(); ++i) push_pair(Vec{g.nodes[i]}, g.weights[i]);
  } else {
    constexpr int kAngles = 16;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double r = 0.5 * (1.0 + g.nodes[i]);
      const double wr = 0.5 * g.weights[i];
      if (dimension == 2) {
        for (int j = 0; j < kAngles / 2; ++j) {
          const double th = (j + 0.5) * 2.0 * kPi / kAngles;
          push_pair(Vec{r * std::cos(th), r * std::sin(th)}, wr * r * (2.0 * kPi / kAngles));
        }
      } else {
        for (std::size_t k = 0; k < g.nodes.size(); ++k) {
          const double mu = g.nodes[k];
          const double st = std::sqrt(1.0 - mu * mu);
          for (int j = 0; j < kAngles / 2; ++j) {
            if (mu < 0.0) continue;  // the negation covers the lower hemisphere
            const double ph = (j + 0.5) * 2.0 * kPi / kAngles;
            const double w = wr * r * r * g.weights[k] * (2.0 * kPi / kAngles);
            push_pair(Vec{r * st * std::cos(ph), r * st * std::sin(ph), r * mu}, w);
            // Companion azimuth ph + pi with the same polar angle.
            push_pair(Vec{-r * st * std::cos(ph), -r * st * std::sin(ph), r * mu}, w);
          }
        }
      }
    }
  }
  return m;
}

std::pair<double, double> kernel_integrals(const MollifierSpec& moll) {
  CompensatedSum s1;
  for (std::size_t j = 0; j < moll.time_nodes.size(); ++j) s1.add(moll.time_weights[j] * moll.rho1(moll.time_nodes[j]));
  CompensatedSum s2;
  for (const auto& n : moll.space_nodes) s2.add(n.weight * moll.rho2(n.z));
  return {s1.value(), s2.value()};
}

double time_cutoff(const MollifierSpec& moll, double t, double horizon) {
  const double lo = std::max(-1.0, (t - horizon) / moll.eps);
  const double hi = std::min(1.0, t / moll.eps);
  if (hi <= lo) return 0.0;
  if (moll.rho1_cdf) return moll.rho1_cdf(hi) - moll.rho1_cdf(lo);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  CompensatedSum s;
  for (std::size_t j = 0; j < moll.time_nodes.size(); ++j)
    s.add(moll.time_weights[j] * moll.rho1(mid + half * moll.time_nodes[j]));
  return half * s.value();
}

namespace {

struct Convolver {
  MollifierSpec moll;
  std::vector<double> space_kernel_weights;  // weight * rho2(z), one per node
  double horizon = 1.0;
  bool autonomous = true;

  Convolver(const MollifierSpec& m, double T, bool auton) : moll(m), horizon(T), autonomous(auton) {
    for (const auto& n : moll.space_nodes) space_kernel_weights.push_back(n.weight * moll.rho2(n.z));
  }

  // int rho2(z) f(x - eps z) dz with antipodal nodes summed pairwise first.
  template <class T, class F>
  T space(const F& f, double t, const Vec& x, T zero) const {
    T acc = zero;
    for (std::size_t k = 0; k + 1 < moll.space_nodes.size(); k += 2) {
      const Vec& z = moll.space_nodes[k].z;
      T pair = f(t, x - moll.eps * z);
      pair += f(t, x + moll.eps * z);
      acc += space_kernel_weights[k] * pair;
    }
    return acc;
  }

  template <class T, class F>
  T spacetime(const F& f, double t, const Vec& x, T zero) const {
    if (autonomous) {
      T v = space(f, 0.0, x, zero);
      v *= time_cutoff(moll, t, horizon);
      return v;
    }
    const double lo = std::max(-1.0, (t - horizon) / moll.eps);
    const double hi = std::min(1.0, t / moll.eps);
    T acc = zero;
    if (hi <= lo) return acc;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t j = 0; j < moll.time_nodes.size(); ++j) {
      const double s = mid + half * moll.time_nodes[j];
      const double w = half * moll.time_weights[j] * moll.rho1(s);
      const double tau = std::clamp(t - moll.eps * s, 0.0, horizon);
      T v = space(f, tau, x, zero);
      acc += w * v;
    }
    return acc;
  }
};

}  // namespace

VelocityFieldSpec mollify(const VelocityFieldSpec& spec, const MollifierSpec& moll) {
  if (moll.dimension != spec.dimension) throw Error("mollify: kernel dimension does not match field");
  if (!(moll.eps > 0.0)) throw Error("mollify: eps must be positive");
  const auto [i1, i2] = kernel_integrals(moll);
  if (std::abs(i1 - 1.0) > 1e-8 || std::abs(i2 - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "mollify: kernel integrals (" << i1 << ", " << i2 << ") deviate from 1";
    throw BadKernel(msg.str());
  }
  if (moll.space_nodes.size() % 2 != 0) throw BadKernel("mollify: space nodes must come in antipodal pairs");

  auto conv = std::make_shared<const Convolver>(moll, spec.horizon, spec.autonomous);
  const VectorFn b = spec.eval_b;
  const ScalarFn divb = spec.eval_div_b;
  const TimeFn div_sup = spec.div_sup;
  const int d = spec.dimension;
  const double T = spec.horizon;

  VelocityFieldSpec out;
  std::ostringstream name;
  name << spec.name << "@eps=" << moll.eps;
  out.name = name.str();
  out.dimension = d;
  out.horizon = T;
  out.regularity = Regularity::smooth;
  out.autonomous = false;
  out.eval_b = [conv, b, d](double t, const Vec& x) { return conv->spacetime(b, t, x, Vec(d)); };
  out.eval_div_b = [conv, divb](double t, const Vec& x) { return conv->spacetime(divb, t, x, 0.0); };
  out.div_sup = [conv, div_sup, T](double t) {
    const Convolver& c = *conv;
    if (c.autonomous) return time_cutoff(c.moll, t, T) * div_sup(0.0);
    const double lo = std::max(-1.0, (t - T) / c.moll.eps);
    const double hi = std::min(1.0, t / c.moll.eps);
    if (hi <= lo) return 0.0;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    CompensatedSum s;
    for (std::size_t j = 0; j < c.moll.time_nodes.size(); ++j) {
      const double sj = mid + half * c.moll.time_nodes[j];
      s.add(half * c.moll.time_weights[j] * c.moll.rho1(sj) * div_sup(std::clamp(t - c.moll.eps * sj, 0.0, T)));
    }
    return s.value();
  };
  return out;
}

// ---------------------------------------------------------------------------
// Invariant checks

GrowthSplit growth_split(const VelocityFieldSpec& spec, int samples, double box, std::uint64_t seed) {
  if (!spec.split) throw Error("growth_split: field '" + spec.name + "' declares no growth split");
  const GrowthSplit& split = *spec.split;
  Rng rng(seed);
  for (int n = 0; n < samples; ++n) {
    const double t = rng.uniform(0.0, spec.horizon);
    Vec x(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) x[i] = rng.uniform(-box, box);
    const double b1 = split.b1(t, x);
    const double b2 = split.b2(t);
    if (b1 < 0.0 || b2 < 0.0) throw SplitViolation("growth_split: negative b1 or b2", t, x);
    const double lhs = spec.eval_b(t, x).norm() / (1.0 + x.norm());
    if (lhs > b1 + b2 + 1e-12) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "growth_split: |b|/(1+|x|) = " << lhs << " exceeds b1 + b2 = " << b1 + b2 << " at t = " << t
          << ", x = " << x;
      throw SplitViolation(msg.str(), t, x);
    }
  }
  return split;
}

DivergenceCheck check_divergence(const VelocityFieldSpec& spec, int samples, double box, std::uint64_t seed) {
  DivergenceCheck out;
  Rng rng(seed);
  const int d = spec.dimension;
  for (int n = 0; n < samples; ++n) {
    const double t = rng.uniform(0.0, spec.horizon);
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(-box, box);
    const double div = spec.eval_div_b(t, x);
    double fd = 0.0;
    for (int i = 0; i < d; ++i) {
      const double h = 1e-5 * (1.0 + std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd += (spec.eval_b(t, xp)[i] - spec.eval_b(t, xm)[i]) / (2.0 * h);
    }
    const double rel = std::abs(div - fd) / (1.0 + std::abs(div));
    if (rel > out.max_relative_error) {
      out.max_relative_error = rel;
      out.worst_point = x;
    }
    out.max_sup_violation = std::max(out.max_sup_violation, std::abs(div) - spec.div_sup(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Velocity catalog

VelocityFieldSpec zero_field(int dimension, double horizon) {
  VelocityFieldSpec f;
  f.name = "zero";
  f.dimension = dimension;
  f.horizon = horizon;
  f.eval_b = [dimension](double, const Vec&) { return Vec(dimension); };
  f.eval_div_b = [](double, const Vec&) { return 0.0; };
  f.div_sup = [](double) { return 0.0; };
  f.split = bounded_split(0.0);
  f.exact_flow = [](double, const Vec& x0) { return x0; };
  return f;
}

VelocityFieldSpec constant_field(const Vec& v, double horizon) {
  VelocityFieldSpec f;
  f.name = "constant";
  f.dimension = v.dim();
  f.horizon = horizon;
  f.eval_b = [v](double, const Vec&) { return v; };
  f.eval_div_b = [](double, const Vec&) { return 0.0; };
  f.div_sup = [](double) { return 0.0; };
  f.split = bounded_split(v.norm());
  f.exact_flow = [v](double t, const Vec& x0) { return x0 + t * v; };
  return f;
}

VelocityFieldSpec linear_field(double a, double horizon) {
  VelocityFieldSpec f;
  f.name = a >= 0.0 ? "linear_expand" : "linear_contract";
  f.dimension = 1;
  f.horizon = horizon;
  f.eval_b = [a](double, const Vec& x) { return Vec{a * x[0]}; };
  f.eval_div_b = [a](double, const Vec&) { return a; };
  f.div_sup = [a](double) { return std::abs(a); };
  f.split = bounded_split(std::abs(a));
  f.exact_flow = [a](double t, const Vec& x0) { return Vec{x0[0] * std::exp(a * t)}; };
  return f;
}

VelocityFieldSpec rotation_field(double horizon) {
  VelocityFieldSpec f;
  f.name = "rotation";
  f.dimension = 2;
  f.horizon = horizon;
  f.eval_b = [](double, const Vec& x) { return Vec{-x[1], x[0]}; };
  f.eval_div_b = [](double, const Vec&) { return 0.0; };
  f.div_sup = [](double) { return 0.0; };
  f.split = bounded_split(1.0);
  f.exact_flow = [](double t, const Vec& x0) {
    const double c = std::cos(t), s = std::sin(t);
    return Vec{c * x0[0] - s * x0[1], s * x0[0] + c * x0[1]};
  };
  return f;
}

VelocityFieldSpec shear_field(double horizon) {
  VelocityFieldSpec f;
  f.name = "shear";
  f.dimension = 2;
  f.horizon = horizon;
  f.regularity = Regularity::bv_nonsmooth;
  f.eval_b = [](double, const Vec& x) { return Vec{sign(x[1]), 0.0}; };
  f.eval_div_b = [](double, const Vec&) { return 0.0; };
  f.div_sup = [](double) { return 0.0; };
  f.split = bounded_split(1.0);
  f.exact_flow = [](double t, const Vec& x0) { return Vec{x0[0] + t * sign(x0[1]), x0[1]}; };
  return f;
}

VelocityFieldSpec compact_bump_field(double horizon) {
  VelocityFieldSpec f;
  f.name = "compact_bump";
  f.dimension = 1;
  f.horizon = horizon;
  f.regularity = Regularity::lipschitz;
  f.eval_b = [](double, const Vec& x) {
    const double q = 1.0 - x[0] * x[0];
    return Vec{q > 0.0 ? q * q * q : 0.0};
  };
  f.eval_div_b = [](double, const Vec& x) {
    const double q = 1.0 - x[0] * x[0];
    return q > 0.0 ? -6.0 * x[0] * q * q : 0.0;
  };
  const double sup = 96.0 / (25.0 * std::sqrt(5.0));
  f.div_sup = [sup](double) { return sup; };
  GrowthSplit s;
  s.b1 = [](double, const Vec& x) { return std::abs(x[0]) < 1.0 ? 1.0 : 0.0; };
  s.b2 = [](double) { return 0.0; };
  s.b1_tail_l1 = [](double, double R) { return 2.0 * std::max(0.0, 1.0 - R); };
  f.split = s;
  return f;
}

VelocityFieldSpec log_lipschitz_field(double horizon) {
  VelocityFieldSpec f;
  f.name = "log_lipschitz";
  f.dimension = 1;
  f.horizon = horizon;
  f.regularity = Regularity::bv_nonsmooth;
  f.eval_b = [](double, const Vec& x) {
    const double a = std::abs(x[0]);
    if (a == 0.0) return Vec{0.0};
    if (a > 1.0) return Vec{sign(x[0])};
    return Vec{x[0] * (1.0 - std::log(a))};
  };
  auto div = [](double, const Vec& x) {
    const double a = std::abs(x[0]);
    if (a == 0.0) return kInf;
    return a <= 1.0 ? -std::log(a) : 0.0;
  };
  f.eval_div_b = div;
  f.div_sup = [](double) { return kInf; };
  f.split = bounded_split(1.0);
  DivergenceSplit ds;
  ds.d1_sup = [](double) { return 0.0; };
  ds.d2 = div;
  ds.support_radius = 1.0;
  f.div_split = ds;
  f.exact_flow = [](double t, const Vec& x0) {
    const double a = std::abs(x0[0]);
    if (a == 0.0) return Vec{0.0};
    if (a >= 1.0) return Vec{x0[0] + t * sign(x0[0])};
    // log|X| - 1 = (log a - 1) e^{-t} until |X| reaches 1 at t* = log(1 - log a).
    const double t_exit = std::log1p(-std::log(a));
    if (t >= t_exit) return Vec{sign(x0[0]) * (1.0 + (t - t_exit))};
    return Vec{sign(x0[0]) * std::exp(1.0 + (std::log(a) - 1.0) * std::exp(-t))};
  };
  return f;
}

// ---------------------------------------------------------------------------
// Damping catalog

DampingFieldSpec zero_damping(int, double) {
  DampingFieldSpec c;
  c.name = "zero";
  c.eval_c = [](double, const Vec&) { return 0.0; };
  c.l1_norm_hint = 0.0;
  c.l1_slice = [](double) { return 0.0; };
  c.sup_norm = [](double) { return 0.0; };
  return c;
}

DampingFieldSpec constant_damping(double c0, int, double) {
  DampingFieldSpec c;
  c.name = "constant";
  c.eval_c = [c0](double, const Vec&) { return c0; };
  c.l1_norm_hint = c0 == 0.0 ? 0.0 : kInf;
  c.l1_slice = [c0](double) { return c0 == 0.0 ? 0.0 : kInf; };
  c.sup_norm = [c0](double) { return std::abs(c0); };
  return c;
}

DampingFieldSpec indicator_damping(int dimension, double horizon) {
  DampingFieldSpec c;
  c.name = "indicator";
  c.eval_c = [](double, const Vec& x) {
    for (int i = 0; i < x.dim(); ++i)
      if (std::abs(x[i]) > 1.0) return 0.0;
    return 1.0;
  };
  const double vol = std::pow(2.0, dimension);
  c.l1_norm_hint = vol * horizon;
  c.l1_slice = [vol](double) { return vol; };
  c.sup_norm = [](double) { return 1.0; };
  return c;
}

DampingFieldSpec inverse_sqrt_damping(double horizon) {
  DampingFieldSpec c;
  c.name = "inverse_sqrt";
  c.eval_c = [](double, const Vec& x) {
    const double a = std::abs(x[0]);
    if (a == 0.0) return kInf;
    return a <= 1.0 ? 1.0 / std::sqrt(a) : 0.0;
  };
  c.singular_set = {Vec{0.0}};
  c.l1_norm_hint = 4.0 * horizon;
  c.l1_slice = [](double) { return 4.0; };
  return c;
}

// ---------------------------------------------------------------------------
// Initial data

InitialDatum zero_datum(int dimension) {
  InitialDatum u;
  u.name = "zero";
  u.dimension = dimension;
  u.eval = [](const Vec&) { return 0.0; };
  u.support_radius = 0.0;
  return u;
}

InitialDatum gaussian_datum(int dimension) {
  InitialDatum u;
  u.name = "gaussian";
  u.dimension = dimension;
  u.eval = [](const Vec& x) { return std::exp(-x.norm2()); };
  u.l1 = std::pow(kPi, 0.5 * dimension);
  u.l2_squared = std::pow(0.5 * kPi, 0.5 * dimension);
  return u;
}

InitialDatum bump_datum(int dimension) {
  InitialDatum u;
  u.name = "bump";
  u.dimension = dimension;
  u.eval = [](const Vec& x) {
    const double q = 1.0 - x.norm2();
    return q > 0.0 ? q * q * q * q : 0.0;
  };
  u.l1 = 0.5 * unit_sphere_area(dimension) * beta_fn(0.5 * dimension, 5.0);
  u.l2_squared = 0.5 * unit_sphere_area(dimension) * beta_fn(0.5 * dimension, 9.0);
  u.support_radius = 1.0;
  return u;
}

InitialDatum unit_interval_datum() {
  InitialDatum u;
  u.name = "unit_interval";
  u.dimension = 1;
  u.eval = [](const Vec& x) { return (x[0] > 0.0 && x[0] < 1.0) ? 1.0 : 0.0; };
  u.l1 = 1.0;
  u.l2_squared = 1.0;
  u.support_radius = 1.0;
  return u;
}

InitialDatum constant_datum(double value, int dimension) {
  InitialDatum u;
  u.name = "constant";
  u.dimension = dimension;
  u.eval = [value](const Vec&) { return value; };
  u.l1 = value == 0.0 ? 0.0 : kInf;
  u.l2_squared = u.l1;
  return u;
}

// ---------------------------------------------------------------------------
// Registry

std::vector<std::string> velocity_field_ids() {
  return {"zero", "linear_expand", "linear_contract", "rotation", "shear", "compact_bump", "log_lipschitz"};
}
std::vector<std::string> damping_field_ids() { return {"zero", "unit", "indicator", "inverse_sqrt"}; }
std::vector<std::string> initial_datum_ids() { return {"zero", "gaussian", "bump", "unit_interval"}; }

namespace {
void require_dim(const std::string& id, int got, int want) {
  if (got != want) {
    std::ostringstream msg;
    msg << "'" << id << "' is defined in dimension " << want << ", requested " << got;
    throw Error(msg.str());
  }
}
}  // namespace

VelocityFieldSpec make_velocity_field(const std::string& id, int dimension, double horizon) {
  if (id == "zero") return zero_field(dimension, horizon);
  if (id == "linear_expand") return require_dim(id, dimension, 1), linear_field(1.0, horizon);
  if (id == "linear_contract") return require_dim(id, dimension, 1), linear_field(-1.0, horizon);
  if (id == "rotation") return require_dim(id, dimension, 2), rotation_field(horizon);
  if (id == "shear") return require_dim(id, dimension, 2), shear_field(horizon);
  if (id == "compact_bump") return require_dim(id, dimension, 1), compact_bump_field(horizon);
  if (id == "log_lipschitz") return require_dim(id, dimension, 1), log_lipschitz_field(horizon);
  throw Error("unknown velocity field '" + id + "'");
}

DampingFieldSpec make_damping_field(const std::string& id, int dimension, double horizon) {
  if (id == "zero") return zero_damping(dimension, horizon);
  if (id == "unit") return constant_damping(1.0, dimension, horizon);
  if (id == "indicator") return indicator_damping(dimension, horizon);
  if (id == "inverse_sqrt") return require_dim(id, dimension, 1), inverse_sqrt_damping(horizon);
  throw Error("unknown damping field '" + id + "'");
}

InitialDatum make_initial_datum(const std::string& id, int dimension) {
  if (id == "zero") return zero_datum(dimension);
  if (id == "gaussian") return gaussian_datum(dimension);
  if (id == "bump") return bump_datum(dimension);
  if (id == "unit_interval") return require_dim(id, dimension, 1), unit_interval_datum();
  throw Error("unknown initial datum '" + id + "'");
}

}  // namespace rough_transport
