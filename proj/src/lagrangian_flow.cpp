#include "rough_transport/lagrangian_flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "rough_transport/errors.hpp"
#include "rough_transport/numerics.hpp"
#include "rough_transport/parallel.hpp"

namespace rough_transport {

std::array<int, Vec::kMaxDim> SeedGrid::index(std::size_t i) const {
  std::array<int, Vec::kMaxDim> idx{};
  for (int a = 0; a < dimension; ++a) {
    idx[a] = static_cast<int>(i % static_cast<std::size_t>(per_axis));
    i /= static_cast<std::size_t>(per_axis);
  }
  return idx;
}

bool SeedGrid::on_boundary_layer(std::size_t i) const {
  const auto idx = index(i);
  for (int a = 0; a < dimension; ++a)
    if (idx[a] == 0 || idx[a] == per_axis - 1) return true;
  return false;
}

SeedGrid make_seed_grid(int dimension, int per_axis, double radius) {
  if (dimension < 1 || dimension > Vec::kMaxDim) throw Error("make_seed_grid: dimension must be 1..3");
  if (per_axis < 1) throw Error("make_seed_grid: per_axis must be positive");
  if (!(radius > 0.0)) throw Error("make_seed_grid: radius must be positive");
  SeedGrid g;
  g.dimension = dimension;
  g.per_axis = per_axis;
  g.bounding_radius = radius;
  g.spacing = 2.0 * radius / per_axis;
  g.cell_volume = std::pow(g.spacing, dimension);
  std::size_t total = 1;
  for (int a = 0; a < dimension; ++a) total *= static_cast<std::size_t>(per_axis);
  g.points.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    Vec x(dimension);
    std::size_t rest = i;
    for (int a = 0; a < dimension; ++a) {
      const auto j = static_cast<double>(rest % static_cast<std::size_t>(per_axis));
      rest /= static_cast<std::size_t>(per_axis);
      x[a] = -radius + (j + 0.5) * g.spacing;
    }
    g.points.push_back(x);
  }
  return g;
}

FlowMap::FlowMap(int dimension, std::size_t seeds, std::vector<double> time_grid, Direction direction)
    : dim_(dimension), seeds_(seeds), times_(std::move(time_grid)), direction_(direction) {
  data_.assign(seeds_ * times_.size() * static_cast<std::size_t>(dim_), 0.0);
}

Vec FlowMap::position(std::size_t seed, std::size_t k) const {
  Vec x(dim_);
  const std::size_t base = (seed * times_.size() + k) * static_cast<std::size_t>(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = data_[base + static_cast<std::size_t>(a)];
  return x;
}

void FlowMap::set_position(std::size_t seed, std::size_t k, const Vec& x) {
  const std::size_t base = (seed * times_.size() + k) * static_cast<std::size_t>(dim_);
  for (int a = 0; a < dim_; ++a) data_[base + static_cast<std::size_t>(a)] = x[a];
}

FlowMap integrate_flow(const VelocityFieldSpec& field, std::span<const Vec> points, double bounding_radius,
                       int steps, Direction direction, const FlowOptions& options) {
  if (steps < 1) throw Error("integrate_flow: steps must be positive");
  const double end = options.end_time > 0.0 ? options.end_time : field.horizon;
  if (end > field.horizon * (1.0 + 1e-12)) throw Error("integrate_flow: end time beyond field horizon");
  const double escape = options.escape_radius > 0.0 ? options.escape_radius : 1e3 * bounding_radius;
  const auto K = static_cast<std::size_t>(steps);
  std::vector<double> times(K + 1);
  for (std::size_t k = 0; k <= K; ++k) times[k] = end * static_cast<double>(k) / static_cast<double>(K);
  times[K] = end;
  const double dt = end / static_cast<double>(K);

  FlowMap flow(field.dimension, points.size(), times, direction);
  std::vector<char> escaped(points.size(), 0);
  const VectorFn& b = field.eval_b;

  parallel_for(points.size(), [&](std::size_t i) {
    Vec y = points[i];
    const std::size_t first = direction == Direction::forward ? 0 : K;
    flow.set_position(i, first, y);
    for (std::size_t j = 0; j < K; ++j) {
      if (direction == Direction::forward) {
        const double t = times[j];
        const Vec k1 = b(t, y);
        const Vec k2 = b(t + 0.5 * dt, y + (0.5 * dt) * k1);
        const Vec k3 = b(t + 0.5 * dt, y + (0.5 * dt) * k2);
        const Vec k4 = b(times[j + 1], y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        flow.set_position(i, j + 1, y);
      } else {
        const double t = times[K - j];
        const Vec k1 = b(t, y);
        const Vec k2 = b(t - 0.5 * dt, y - (0.5 * dt) * k1);
        const Vec k3 = b(t - 0.5 * dt, y - (0.5 * dt) * k2);
        const Vec k4 = b(times[K - j - 1], y - dt * k3);
        y -= (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        flow.set_position(i, K - j - 1, y);
      }
      const double r = y.norm();
      if (!std::isfinite(r) || r > escape) {
        escaped[i] = 1;
        return;
      }
    }
  });

  const auto it = std::find(escaped.begin(), escaped.end(), 1);
  if (it != escaped.end()) {
    const auto seed = static_cast<std::size_t>(it - escaped.begin());
    std::ostringstream msg;
    msg << "integrate_flow: trajectory of seed " << seed << " starting at " << points[seed]
        << " left the escape ball of radius " << escape;
    throw StepBlowup(msg.str(), seed);
  }
  return flow;
}

FlowMap integrate_flow(const VelocityFieldSpec& field, const SeedGrid& seeds, int steps, Direction direction,
                       const FlowOptions& options) {
  return integrate_flow(field, seeds.points, seeds.bounding_radius, steps, direction, options);
}

JacobianTrack jacobian(const VelocityFieldSpec& field, const FlowMap& flow) {
  const std::size_t n = flow.steps() + 1;
  const auto& times = flow.time_grid();
  const double dt = n > 1 ? times[1] - times[0] : 0.0;
  JacobianTrack track;
  track.seeds = flow.seeds();
  track.samples = n;
  track.div_path_integral.assign(track.seeds * n, 0.0);
  track.jx.assign(track.seeds * n, 1.0);

  std::vector<double> sup(n);
  for (std::size_t k = 0; k < n; ++k) sup[k] = field.div_sup(times[k]);
  const auto cum_sup = cumulative_trapezoid(sup, dt);
  track.L = cum_sup.back();
  const double limit = 10.0 * track.L * std::max(flow.end_time(), 1.0);

  std::vector<char> bad(track.seeds, 0);
  parallel_for(track.seeds, [&](std::size_t i) {
    std::vector<double> div(n);
    for (std::size_t k = 0; k < n; ++k) div[k] = field.eval_div_b(times[k], flow.position(i, k));
    const auto path = cumulative_trapezoid(div, dt);
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(path[k]) || (std::isfinite(limit) && std::abs(path[k]) > limit)) bad[i] = 1;
      track.div_path_integral[i * n + k] = path[k];
      track.jx[i * n + k] = std::exp(path[k]);
    }
  });
  const auto it = std::find(bad.begin(), bad.end(), 1);
  if (it != bad.end()) {
    std::ostringstream msg;
    msg << "jacobian: divergence path integral of seed " << (it - bad.begin()) << " exceeds 10 L max(T,1) = "
        << limit << " or is not finite";
    throw DivergenceUnbounded(msg.str());
  }
  return track;
}

double jacobian_bound_violation(const JacobianTrack& track) {
  if (!std::isfinite(track.L)) return -kInf;
  double worst = -kInf;
  for (double p : track.div_path_integral) worst = std::max(worst, std::abs(p) - track.L);
  return worst;
}

JacobianOdeResidual jacobian_ode_residual(const VelocityFieldSpec& field, const FlowMap& flow,
                                          const JacobianTrack& track) {
  const std::size_t n = track.samples;
  const auto& times = flow.time_grid();
  std::vector<JacobianOdeResidual> per_seed(track.seeds);
  parallel_for(track.seeds, [&](std::size_t i) {
    JacobianOdeResidual r;
    double div_prev = field.eval_div_b(times[0], flow.position(i, 0));
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double dt = times[k + 1] - times[k];
      const double div_next = field.eval_div_b(times[k + 1], flow.position(i, k + 1));
      const double j0 = track.jacobian(i, k), j1 = track.jacobian(i, k + 1);
      const double fd = (j1 - j0) / dt;
      const double rhs = 0.5 * (j0 * div_prev + j1 * div_next);
      const double fd_inv = (1.0 / j1 - 1.0 / j0) / dt;
      const double rhs_inv = -0.5 * (div_prev / j0 + div_next / j1);
      r.jx = std::max(r.jx, std::abs(fd - rhs));
      r.inv_jx = std::max(r.inv_jx, std::abs(fd_inv - rhs_inv));
      div_prev = div_next;
    }
    per_seed[i] = r;
  });
  JacobianOdeResidual out;
  for (const auto& r : per_seed) {
    out.jx = std::max(out.jx, r.jx);
    out.inv_jx = std::max(out.inv_jx, r.inv_jx);
  }
  return out;
}

double change_of_variables_residual(const SeedGrid& seeds, const FlowMap& flow, const JacobianTrack& track,
                                    const TestIntegrand& phi, std::size_t k) {
  double inner = kInf;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (seeds.on_boundary_layer(i)) inner = std::min(inner, flow.position(i, k).norm());
  if (phi.tail_mass) {
    const double tail = phi.tail_mass(inner);
    if (tail > 1e-8 * std::abs(phi.integral)) {
      std::ostringstream msg;
      msg << "change_of_variables_residual: test function mass " << tail << " lies outside radius " << inner
          << " covered by the flowed seed box";
      throw DomainTooSmall(msg.str());
    }
  }
  std::vector<double> terms(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    terms[i] = phi.eval(flow.position(i, k)) * track.jacobian(i, k) * seeds.cell_volume;
  });
  return std::abs(compensated_sum(terms) - phi.integral);
}

double compressibility_estimate(const SeedGrid& seeds, const FlowMap& flow, int block, std::size_t k) {
  if (block < 1) throw Error("compressibility_estimate: block must be positive");
  const int d = seeds.dimension;
  const int nb = (seeds.per_axis + block - 1) / block;
  const double width = block * seeds.spacing;
  const double r = seeds.bounding_radius;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(nb);
  std::vector<std::size_t> counts(total, 0);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Vec x = flow.position(i, k);
    std::size_t flat = 0, stride = 1;
    bool inside = true;
    for (int a = 0; a < d; ++a) {
      const double u = (x[a] + r) / width;
      if (!(u >= 0.0 && u < nb)) {
        inside = false;
        break;
      }
      flat += static_cast<std::size_t>(u) * stride;
      stride *= static_cast<std::size_t>(nb);
    }
    if (inside) ++counts[flat];
  }
  double best = 0.0;
  for (std::size_t q = 0; q < total; ++q) {
    if (counts[q] == 0) continue;
    // Probe volume, clipped at the far edge of the seed box.
    double vol = 1.0;
    std::size_t rest = q;
    for (int a = 0; a < d; ++a) {
      const auto j = static_cast<int>(rest % static_cast<std::size_t>(nb));
      rest /= static_cast<std::size_t>(nb);
      const int cells = std::min(block, seeds.per_axis - j * block);
      vol *= cells * seeds.spacing;
    }
    best = std::max(best, static_cast<double>(counts[q]) * seeds.cell_volume / vol);
  }
  return best;
}

double superlevel_escape(const SeedGrid& seeds, const FlowMap& flow, double r, double R) {
  std::size_t worst = 0;
  for (std::size_t k = 0; k <= flow.steps(); ++k) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i)
      if (seeds.points[i].norm() < r && flow.position(i, k).norm() > R) ++count;
    worst = std::max(worst, count);
  }
  return static_cast<double>(worst) * seeds.cell_volume;
}

double composition_error(const VelocityFieldSpec& field, const SeedGrid& seeds, int steps) {
  const FlowMap fwd = integrate_flow(field, seeds, steps, Direction::forward);
  std::vector<Vec> arrivals(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) arrivals[i] = fwd.final_position(i);
  const FlowMap bwd = integrate_flow(field, arrivals, seeds.bounding_radius, steps, Direction::backward);
  double worst = 0.0;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    worst = std::max(worst, distance(bwd.initial_position(i), seeds.points[i]));
  return worst;
}

std::vector<ConvergenceRow> flow_convergence_study(const VelocityFieldSpec& field, std::span<const double> eps_list,
                                                   const SeedGrid& seeds, int steps) {
  for (std::size_t j = 1; j < eps_list.size(); ++j)
    if (!(eps_list[j] < eps_list[j - 1])) throw Error("flow_convergence_study: eps_list must be strictly decreasing");

  struct Endpoints {
    std::vector<Vec> x;
    std::vector<double> jx;
  };
  std::map<double, Endpoints> cache;
  auto run = [&](double eps) -> const Endpoints& {
    auto it = cache.find(eps);
    if (it != cache.end()) return it->second;
    const VelocityFieldSpec smooth = mollify(field, make_mollifier(eps, field.dimension));
    const FlowMap flow = integrate_flow(smooth, seeds, steps, Direction::forward);
    const JacobianTrack track = jacobian(smooth, flow);
    Endpoints e;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      e.x.push_back(flow.final_position(i));
      e.jx.push_back(track.final_jacobian(i));
    }
    return cache.emplace(eps, std::move(e)).first->second;
  };

  std::vector<ConvergenceRow> rows;
  for (double eps : eps_list) {
    const Endpoints& a = run(eps);
    const Endpoints& b = run(0.5 * eps);
    std::vector<double> dx(seeds.size()), dj(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      dx[i] = distance(a.x[i], b.x[i]);
      dj[i] = std::abs(a.jx[i] - b.jx[i]);
    }
    const double n = static_cast<double>(seeds.size());
    rows.push_back({eps, compensated_sum(dx) / n, compensated_sum(dj) / n});
  }
  return rows;
}

}  // namespace rough_transport
