#include "rough_transport/bmo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rough_transport/errors.hpp"
#include "rough_transport/numerics.hpp"
#include "rough_transport/parallel.hpp"
#include "rough_transport/renormalization.hpp"

namespace rough_transport {

namespace {

struct CellRange {
  std::size_t lo = 0;
  std::size_t count = 0;
};

// Cells whose centers lie in [c - r, c + r].
CellRange cells_in(const SampledFunction& f, double c, double r) {
  const double a = (c - r - f.lower) / f.spacing - 0.5;
  const double b = (c + r - f.lower) / f.spacing - 0.5;
  const double lo = std::max(0.0, std::ceil(a - 1e-9));
  const double hi = std::min(static_cast<double>(f.size()) - 1.0, std::floor(b + 1e-9));
  if (hi < lo) return {static_cast<std::size_t>(lo), 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo) + 1};
}

double range_average(const SampledFunction& f, CellRange r) {
  CompensatedSum s;
  for (std::size_t i = r.lo; i < r.lo + r.count; ++i) s.add(f.values[i]);
  return s.value() / static_cast<double>(r.count);
}

void check_supported(const BMOProfile& p, const char* who) {
  const CellRange inner = cells_in(p.f, 0.0, p.M);
  for (std::size_t i = 0; i < p.f.size(); ++i) {
    if (i >= inner.lo && i < inner.lo + inner.count) continue;
    if (p.f.values[i] != 0.0) {
      std::ostringstream msg;
      msg << who << ": f(" << p.f.x(i) << ") = " << p.f.values[i] << " is nonzero outside B_M, M = " << p.M;
      throw Error(msg.str());
    }
  }
}

}  // namespace

std::vector<Ball> dyadic_ball_family(double M, int levels, int center_divisions) {
  if (!(M > 0.0) || levels < 1 || center_divisions < 1) throw Error("dyadic_ball_family: bad parameters");
  std::vector<Ball> family;
  const double step = M / center_divisions;
  const int reach = 2 * center_divisions;
  for (int k = 0; k < levels; ++k) {
    const double r = M * std::ldexp(1.0, -k);
    for (int j = -reach; j <= reach; ++j) {
      const double c = j * step;
      if (std::abs(c) + r <= 2.0 * M) family.push_back({c, r});
    }
  }
  return family;
}

SampledFunction sample_on_grid(const std::function<double(double)>& f, double M, std::size_t cells) {
  if (!(M > 0.0) || cells < 4) throw Error("sample_on_grid: bad parameters");
  SampledFunction s;
  s.lower = -2.0 * M;
  s.spacing = 4.0 * M / static_cast<double>(cells);
  s.values.resize(cells);
  parallel_for(cells, [&](std::size_t i) { s.values[i] = f(s.x(i)); });
  return s;
}

double BMOProfile::ball_average(double center, double radius) const {
  const CellRange r = cells_in(f, center, radius);
  if (r.count == 0) throw EmptyBall("ball_average: no cell center in the ball");
  return range_average(f, r);
}

BMOProfile bmo_norm(SampledFunction f, double M, std::span<const Ball> family) {
  if (family.empty()) throw Error("bmo_norm: empty ball family");
  BMOProfile p;
  p.M = M;
  p.f = std::move(f);
  p.balls.assign(family.begin(), family.end());
  const double lo = p.f.lower, hi = p.f.lower + p.f.spacing * static_cast<double>(p.f.size());
  std::vector<CellRange> ranges(family.size());
  for (std::size_t j = 0; j < family.size(); ++j) {
    const Ball& b = family[j];
    if (b.center - b.radius < lo - 1e-12 || b.center + b.radius > hi + 1e-12) {
      std::ostringstream msg;
      msg << "bmo_norm: ball (" << b.center << ", " << b.radius << ") leaves the sampled interval";
      throw Error(msg.str());
    }
    ranges[j] = cells_in(p.f, b.center, b.radius);
    if (ranges[j].count == 0) {
      std::ostringstream msg;
      msg << "bmo_norm: ball (" << b.center << ", " << b.radius << ") contains no cell";
      throw EmptyBall(msg.str());
    }
  }
  p.averages.resize(family.size());
  p.oscillations.resize(family.size());
  // One ball per task; each ball sums sequentially.
  parallel_for(family.size(), [&](std::size_t j) {
    const double avg = range_average(p.f, ranges[j]);
    CompensatedSum s;
    for (std::size_t i = ranges[j].lo; i < ranges[j].lo + ranges[j].count; ++i) s.add(std::abs(p.f.values[i] - avg));
    p.averages[j] = avg;
    p.oscillations[j] = s.value() / static_cast<double>(ranges[j].count);
  });
  for (std::size_t j = 0; j < family.size(); ++j)
    if (p.oscillations[j] > p.norm_star) {
      p.norm_star = p.oscillations[j];
      p.argmax = j;
    }
  return p;
}

BMOProfile bmo_norm(const std::function<double(double)>& f, double M, std::span<const Ball> family, std::size_t cells) {
  return bmo_norm(sample_on_grid(f, M, cells), M, family);
}

std::vector<double> default_eta_grid(double norm_star) {
  std::vector<double> g;
  for (int j = 0; j <= 10; ++j) g.push_back(norm_star * (1.0 + 0.5 * j));
  return g;
}

JNFit jn_decay_check(const BMOProfile& profile, std::span<const double> etas) {
  const double sigma = profile.norm_star;
  if (!(sigma > 0.0)) throw DegenerateFit("jn_decay_check: norm_star is zero");
  const CellRange ball = cells_in(profile.f, 0.0, profile.M);
  const double avg = range_average(profile.f, ball);
  const double volume = 2.0 * profile.M;

  JNFit fit;
  fit.etas.assign(etas.begin(), etas.end());
  for (double eta : etas) {
    std::size_t count = 0;
    for (std::size_t i = ball.lo; i < ball.lo + ball.count; ++i)
      if (std::abs(profile.f.values[i] - avg) > eta) ++count;
    fit.measures.push_back(static_cast<double>(count) * profile.f.spacing);
  }
  std::vector<double> x, y;
  for (std::size_t j = 0; j < etas.size(); ++j)
    if (fit.measures[j] > 0.0) {
      x.push_back(etas[j]);
      y.push_back(std::log(fit.measures[j]));
    }
  if (x.empty()) {
    fit.trivially_decayed = true;
    return fit;
  }
  if (x.size() < 3) {
    std::ostringstream msg;
    msg << "jn_decay_check: only " << x.size() << " nonempty superlevels";
    throw DegenerateFit(msg.str());
  }
  const LinearFit line = fit_line(x, y);
  fit.decay_rate = -line.slope;
  fit.c_fit = fit.decay_rate * sigma;
  fit.r_squared = line.r_squared;
  for (std::size_t j = 0; j < etas.size(); ++j)
    fit.C_fit = std::max(fit.C_fit, fit.measures[j] * std::exp(fit.decay_rate * etas[j]) / volume);
  return fit;
}

Lemma52Report lemma52_checks(const BMOProfile& profile, std::span<const double> lambdas) {
  const int d = profile.dimension;
  for (std::size_t i = 0; i < profile.f.size(); ++i)
    if (profile.f.values[i] < 0.0) {
      std::ostringstream msg;
      msg << "lemma52_checks: f(" << profile.f.x(i) << ") = " << profile.f.values[i] << " is negative";
      throw NegativeInput(msg.str());
    }
  check_supported(profile, "lemma52_checks");
  const double threshold = std::ldexp(1.0, d + 2);
  for (double l : lambdas)
    if (!(l > threshold)) {
      std::ostringstream msg;
      msg << "lemma52_checks: lambda = " << l << " must exceed " << threshold;
      throw LambdaTooSmall(msg.str());
    }

  Lemma52Report rep;
  const double sigma = profile.norm_star;
  rep.average = profile.ball_average(0.0, profile.M);
  rep.average_bound = std::ldexp(sigma, d + 1);
  rep.average_holds = rep.average <= rep.average_bound;
  rep.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double l : lambdas) {
    CompensatedSum s;
    const double level = l * sigma;
    for (double v : profile.f.values)
      if (v > level) s.add((v - level) * profile.f.spacing);
    rep.T.push_back(s.value());
  }

  rep.monotone = true;
  for (std::size_t j = 1; j < rep.T.size(); ++j) rep.monotone = rep.monotone && rep.T[j] <= rep.T[j - 1];
  rep.convex = true;
  for (std::size_t j = 2; j < rep.T.size(); ++j) {
    const double s1 = (rep.T[j - 1] - rep.T[j - 2]) / (rep.lambdas[j - 1] - rep.lambdas[j - 2]);
    const double s2 = (rep.T[j] - rep.T[j - 1]) / (rep.lambdas[j] - rep.lambdas[j - 1]);
    rep.convex = rep.convex && s2 - s1 >= -1e-12;
  }

  std::vector<double> x, y;
  for (std::size_t j = 0; j < rep.T.size(); ++j)
    if (rep.T[j] > 0.0) {
      x.push_back(rep.lambdas[j]);
      y.push_back(std::log(rep.T[j]));
    }
  if (x.size() >= 2) {
    const LinearFit line = fit_line(x, y);
    rep.slope = line.slope;
    rep.r_squared = line.r_squared;
    rep.c = -line.slope;
    for (std::size_t j = 0; j < rep.T.size(); ++j)
      rep.C = std::max(rep.C, rep.T[j] * std::exp(rep.c * rep.lambdas[j]) / sigma);
  }
  for (double l : rep.lambdas) rep.bound.push_back(rep.C * sigma * std::exp(-rep.c * l));
  return rep;
}

BmoDivergenceData analyze_bmo_divergence(const VelocityFieldSpec& field, double M, std::span<const double> lambdas,
                                         std::size_t cells) {
  if (field.dimension != 1) throw BadSplit("analyze_bmo_divergence: only d = 1 is supported");
  if (!field.div_split) throw BadSplit("analyze_bmo_divergence: field '" + field.name + "' has no divergence split");
  if (!field.autonomous) throw BadSplit("analyze_bmo_divergence: time-dependent BMO parts are not supported");
  const DivergenceSplit& split = *field.div_split;
  if (split.support_radius > M) {
    std::ostringstream msg;
    msg << "analyze_bmo_divergence: d2 support radius " << split.support_radius << " exceeds M = " << M;
    throw BadSplit(msg.str());
  }
  BmoDivergenceData data;
  data.M = M;
  auto d2 = [&split](double x) { return std::abs(split.d2(0.0, Vec{x})); };
  SampledFunction f = sample_on_grid(d2, M, cells);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f.x(i)) > M && f.values[i] != 0.0) {
      std::ostringstream msg;
      msg << "analyze_bmo_divergence: d2(" << f.x(i) << ") = " << f.values[i] << " outside B_M";
      throw BadSplit(msg.str());
    }
  const auto family = dyadic_ball_family(M);
  data.profile = bmo_norm(std::move(f), M, family);
  data.jn = jn_decay_check(data.profile, default_eta_grid(data.profile.norm_star));
  data.lemma = lemma52_checks(data.profile, lambdas);
  data.d1_sup = split.d1_sup;
  const double sigma = data.profile.norm_star;
  data.sigma = [sigma](double) { return sigma; };
  return data;
}

double choose_tau0(const BmoDivergenceData& data, double horizon, double fraction) {
  if (!(fraction >= 0.4 && fraction <= 0.5)) throw Error("choose_tau0: fraction must lie in [0.4, 0.5]");
  const double c = data.lemma.c;
  if (!(c > 0.0)) throw DegenerateFit("choose_tau0: fitted decay constant is not positive");
  auto mass = [&](double tau) { return integrate(data.sigma, 0.0, tau, 256); };
  if (mass(horizon) <= 0.5 * c) return horizon;
  double lo = 0.0, hi = horizon;
  const double target = fraction * c;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * horizon; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < target ? lo : hi) = mid;
  }
  return lo;
}

BmoGronwallReport bmo_gronwall_diagnostic(const DensityRepresentation& u, double delta, double R, double lambda,
                                          const BmoDivergenceData& data, const VelocityFieldSpec& field,
                                          const DampingFieldSpec& damping, const SpaceTimeQuadrature& quad,
                                          double tau0_fraction, double slack) {
  const int d = field.dimension;
  const double threshold = std::ldexp(1.0, d + 2);
  if (!(lambda > threshold)) {
    std::ostringstream msg;
    msg << "bmo_gronwall_diagnostic: lambda = " << lambda << " must exceed " << threshold;
    throw LambdaTooSmall(msg.str());
  }
  if (!field.split) throw Error("bmo_gronwall_diagnostic: field '" + field.name + "' declares no growth split");

  BmoGronwallReport rep;
  rep.delta = delta;
  rep.R = R;
  rep.lambda = lambda;
  rep.tau0 = choose_tau0(data, quad.horizon(), tau0_fraction);

  const Renormalizer beta = make_beta_log(delta);
  const TestFunctionPhiR phi = make_phi_R(R, d);
  GammaTrace full = gamma_trace(u, beta, make_static_test(phi), field, damping, quad);
  std::size_t n = 0;
  while (n < full.times.size() && full.times[n] <= rep.tau0 * (1.0 + 1e-12)) ++n;
  full.times.resize(n);
  full.gamma.resize(n);
  full.rhs.resize(n);
  rep.trace = std::move(full);

  rep.K = beta.sup_rbeta_prime;
  const double C = data.lemma.C, c = data.lemma.c;
  const double phi_l1 = phi.l1_norm();
  std::vector<double> a(n), b(n), cr(n), dl(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = rep.trace.times[k];
    const double sigma = data.sigma(t);
    const double bulk = data.d1_sup(t) + lambda * sigma;
    const double tail = C * sigma * std::exp(-c * lambda);
    a[k] = bulk + (d + 1) * field.split->b2(t);
    b[k] = rep.K * (bulk * phi_l1 + tail + damping.l1_slice(t));
    cr[k] = (d + 1) * field.split->b1_tail_l1(t, R);
    dl[k] = tail;
  }
  const double dt = quad.time_step();
  rep.A = cumulative_trapezoid(a, dt);
  rep.B = cumulative_trapezoid(b, dt);
  rep.C = cumulative_trapezoid(cr, dt);
  rep.D = cumulative_trapezoid(dl, dt);
  rep.decay_product = n > 0 ? std::exp(rep.A.back()) * rep.D.back() : 0.0;

  const double log_term = beta.sup_beta;
  const double gamma0 = n > 0 ? rep.trace.gamma.front() : 0.0;
  rep.trace.bound.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double bound =
        std::exp(rep.A[k]) * (gamma0 + rep.B[k] + log_term * (rep.C[k] + rep.D[k])) * (1.0 + slack);
    rep.trace.bound[k] = bound;
    const double g = rep.trace.gamma[k];
    rep.max_ratio = std::max(rep.max_ratio, bound > 0.0 ? g / bound : (g > 0.0 ? kInf : 0.0));
  }
  return rep;
}

}  // namespace rough_transport
