#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rough_transport/errors.hpp"
#include "rough_transport/weak_form.hpp"

using namespace rough_transport;

namespace {

DensityRepresentation history(const InitialDatum& u0, const VelocityFieldSpec& f, const DampingFieldSpec& c,
                              const SpaceTimeQuadrature& q, int steps_per_interval = 4) {
  return represent_pointwise_history(u0, f, c, q.nodes, q.cell_volume, q.times, steps_per_interval);
}

DensityRepresentation zeros(const SpaceTimeQuadrature& q) {
  DensityRepresentation u;
  u.dimension = q.dimension;
  u.times = q.times;
  u.points = q.nodes;
  u.cell_volume = q.cell_volume;
  u.values.assign(q.times.size() * q.nodes.size(), 0.0);
  return u;
}

}  // namespace

TEST_CASE("space-time quadrature weights") {
  const auto q = make_quadrature(2, 1.5, 12, 0.8, 10);
  CHECK(q.nodes.size() == 144);
  CHECK(q.times.size() == 11);
  CHECK(q.weight_sum() == doctest::Approx(9.0 * 0.8).epsilon(1e-13));
  CHECK(q.spacing == doctest::Approx(0.25));
}

TEST_CASE("compact test function derivatives match finite differences") {
  const auto phi = make_compact_test(1.5, 2.0);
  const Vec x{0.4};
  const double t = 0.7, h = 1e-6;
  CHECK(phi.dt(t, x) == doctest::Approx((phi.eval(t + h, x) - phi.eval(t - h, x)) / (2 * h)).epsilon(1e-7));
  CHECK(phi.grad(t, x)[0] ==
        doctest::Approx((phi.eval(t, Vec{0.4 + h}) - phi.eval(t, Vec{0.4 - h})) / (2 * h)).epsilon(1e-7));
  CHECK(phi.eval(2.0, x) == doctest::Approx(0.0).epsilon(1e-30));
  CHECK(phi.eval(0.0, Vec{1.6}) == 0.0);
}

TEST_CASE("stationary solution has residual at quadrature level") {
  const auto q = make_quadrature(1, 4.0, 256, 1.0, 256);
  const auto u0 = gaussian_datum(1);
  const auto f = zero_field(1, 1.0);
  const auto c = zero_damping(1);
  const auto u = history(u0, f, c, q, 1);
  for (const auto& beta : {make_beta_arctan(1.0), make_beta_log(1e-2)}) {
    const auto rep = weak_residual(u, beta, make_compact_test(3.0, 1.0), f, c, u0, q);
    CHECK(rep.residual <= 1e-6);
    CHECK(rep.phi_mass > 0.0);
  }
}

TEST_CASE("exponential growth solution converges at second order") {
  const auto u0 = bump_datum(1);
  const auto f = zero_field(1, 1.0);
  const auto c = constant_damping(1.0, 1);
  const std::vector<RefinementLevel> levels{{32, 8}, {64, 16}, {128, 32}};
  const auto rep = weak_residual_study(
      levels, 2.0, [&](const SpaceTimeQuadrature& q) { return history(u0, f, c, q, 1); }, make_beta_arctan(1.0),
      make_compact_test(1.5, 1.0), f, c, u0);
  REQUIRE(rep.history.size() == 3);
  CHECK(rep.history[2].residual < rep.history[1].residual);
  CHECK(rep.history[1].residual < rep.history[0].residual);
  CHECK(rep.order >= 2.0);
}

TEST_CASE("refinement levels must strictly refine") {
  const std::vector<RefinementLevel> levels{{32, 8}, {32, 16}};
  const auto f = zero_field(1, 1.0);
  const auto c = zero_damping(1);
  const auto u0 = bump_datum(1);
  CHECK_THROWS_AS(weak_residual_study(
                      levels, 2.0, [&](const SpaceTimeQuadrature& q) { return history(u0, f, c, q, 1); },
                      make_beta_arctan(1.0), make_compact_test(1.5, 1.0), f, c, u0),
                  Error);
}

TEST_CASE("tampered solution is detected") {
  const auto q = make_quadrature(1, 2.0, 128, 1.0, 64);
  const auto u0 = bump_datum(1);
  const auto f = zero_field(1, 1.0);
  const auto c = zero_damping(1);
  auto u = history(u0, f, c, q, 1);
  for (std::size_t k = 0; k < q.times.size(); ++k)
    if (q.times[k] > 0.5)
      for (std::size_t i = 0; i < q.nodes.size(); ++i) u.at(k, i) += 1.0;
  const auto rep = weak_residual(u, make_beta_arctan(1.0), make_compact_test(1.5, 1.0), f, c, u0, q);
  CHECK(rep.residual > 0.1 * rep.phi_mass);
}

TEST_CASE("support overflow and tail allowance") {
  const auto u0 = gaussian_datum(1);
  const auto f = zero_field(1, 1.0);
  const auto c = zero_damping(1);
  const auto q = make_quadrature(1, 1.0, 32, 1.0, 8);
  const auto u = history(u0, f, c, q, 1);
  CHECK_THROWS_AS(weak_residual(u, make_beta_arctan(1.0), make_compact_test(3.0, 1.0), f, c, u0, q), SupportOverflow);
  const auto qa = make_quadrature(1, 1.0, 32, 1.0, 8, TailPolicy::analytic_bound);
  const auto phi = make_phi_R(1.0, 1);
  const auto beta = make_beta_arctan(1.0);
  const auto rep = weak_residual(history(u0, f, c, qa, 1), beta, make_static_test(phi), f, c, u0, qa);
  CHECK(rep.tail_allowance == doctest::Approx(beta.sup_beta * phi.tail_mass(1.0)));
}

TEST_CASE("gamma trace examples") {
  const auto f0 = zero_field(1, 1.0);
  const auto c0 = zero_damping(1);
  SUBCASE("zero density") {
    const auto q = make_quadrature(1, 2.0, 32, 1.0, 8);
    const auto tr = gamma_trace(zeros(q), make_beta_log(1e-2), make_compact_test(1.5, 1.0), f0, c0, q);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      CHECK(tr.gamma[k] == 0.0);
      CHECK(tr.rhs[k] == 0.0);
    }
  }
  SUBCASE("stationary density with a static test") {
    const auto q = make_quadrature(1, 2.0, 64, 1.0, 16);
    const auto u = history(bump_datum(1), f0, c0, q, 1);
    const auto tr = gamma_trace(u, make_beta_arctan(1.0), make_static_test(make_phi_R(2.0, 1)), f0, c0, q);
    CHECK(tr.consistency <= 1e-8);
    CHECK(tr.gamma.front() > 0.0);
  }
  SUBCASE("linear expansion: discrete derivative matches the right-hand side") {
    const auto f = linear_field(1.0, 1.0);
    double previous = kInf;
    for (int n : {64, 128, 256}) {
      const auto q = make_quadrature(1, 4.0, n, 1.0, n / 4);
      const auto u = history(bump_datum(1), f, c0, q, 4);
      const auto tr = gamma_trace(u, make_beta_arctan(1.0), make_compact_test(3.0, 1.0), f, c0, q);
      CHECK(tr.consistency < previous / 3.0);
      previous = tr.consistency;
    }
  }
}

TEST_CASE("L2 energy examples") {
  const auto q = make_quadrature(1, 4.0, 256, 1.0, 32);
  const auto u0 = bump_datum(1);
  SUBCASE("no transport, no damping") {
    const auto e = l2_energy_diagnostic(history(u0, zero_field(1, 1.0), zero_damping(1), q, 1), zero_field(1, 1.0),
                                        zero_damping(1), q);
    CHECK(e.l2.back() == doctest::Approx(e.l2.front()).epsilon(1e-14));
    CHECK(e.passed());
  }
  SUBCASE("unit damping saturates the envelope") {
    const auto c = constant_damping(1.0, 1);
    const auto e = l2_energy_diagnostic(history(u0, zero_field(1, 1.0), c, q, 1), zero_field(1, 1.0), c, q);
    CHECK(e.l2.back() == doctest::Approx(std::exp(2.0) * e.l2.front()).epsilon(1e-12));
    CHECK(e.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("expansion dilutes") {
    const auto f = linear_field(1.0, 1.0);
    const auto e = l2_energy_diagnostic(history(u0, f, zero_damping(1), q, 8), f, zero_damping(1), q);
    CHECK(e.l2.back() == doctest::Approx(std::exp(-1.0) * e.l2.front()).epsilon(1e-6));
    CHECK(e.envelope.back() == doctest::Approx(std::exp(1.0) * e.l2.front()).epsilon(1e-12));
  }
  SUBCASE("singular damping is refused") {
    const auto c = inverse_sqrt_damping();
    CHECK_THROWS_AS(l2_energy_diagnostic(zeros(q), zero_field(1, 1.0), c, q), UnboundedDamping);
  }
}

TEST_CASE("Gronwall bound") {
  SUBCASE("zero density") {
    const auto q = make_quadrature(1, 4.0, 64, 1.0, 16);
    const auto rep =
        gronwall_log_diagnostic(zeros(q), 1e-2, 2.0, linear_field(1.0, 1.0), indicator_damping(1), q);
    CHECK(rep.passed());
    for (double g : rep.trace.gamma) CHECK(g == 0.0);
  }
  SUBCASE("compactly supported field: no C_R term beyond its support") {
    const auto f = compact_bump_field(1.0);
    const auto c = zero_damping(1);
    const auto q = make_quadrature(1, 4.0, 64, 1.0, 16);
    const auto u = twin_difference(bump_datum(1), f, c, q);
    const auto a = gronwall_log_diagnostic(u, 1e-2, 2.0, f, c, q);
    const auto b = gronwall_log_diagnostic(u, 1e-6, 2.0, f, c, q);
    CHECK(a.C.back() == 0.0);
    CHECK(a.trace.bound == b.trace.bound);
    CHECK(a.passed());
    CHECK(b.passed());
    // Inside the support the tail integral of b1 = 1_{|x|<1} is 2 (1 - R).
    const auto inner = gronwall_log_diagnostic(u, 1e-2, 0.5, f, c, q);
    CHECK(inner.C.back() == doctest::Approx(2.0 * 1.0 * 1.0).epsilon(1e-12));
  }
  SUBCASE("gamma is nonincreasing in delta") {
    const auto f = linear_field(1.0, 1.0);
    const auto c = indicator_damping(1);
    const auto q = make_quadrature(1, 4.0, 64, 1.0, 16);
    const auto u = twin_difference(bump_datum(1), f, c, q);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) CHECK(u.at(0, i) == 0.0);
    const auto g2 = gronwall_log_diagnostic(u, 1e-2, 4.0, f, c, q);
    const auto g4 = gronwall_log_diagnostic(u, 1e-4, 4.0, f, c, q);
    const auto g6 = gronwall_log_diagnostic(u, 1e-6, 4.0, f, c, q);
    for (std::size_t k = 0; k < q.times.size(); ++k) {
      CHECK(g2.trace.gamma[k] <= g4.trace.gamma[k]);
      CHECK(g4.trace.gamma[k] <= g6.trace.gamma[k]);
    }
    CHECK(g6.passed());
  }
}

TEST_CASE("uniqueness probe verdicts") {
  const std::vector<double> deltas{1e-2, 1e-4, 1e-8, 1e-12};
  const auto q = make_quadrature(1, 2.0, 64, 1.0, 8);
  const auto f = compact_bump_field(1.0);
  const auto c = zero_damping(1);
  const auto data = uniqueness_bound_data(f, c, q.times, 2.0, 8.0);
  CHECK(data.C_limit == 0.0);
  SUBCASE("zero density") {
    CHECK(uniqueness_probe(zeros(q), 1e-10, 2.0, deltas, data).verdict == "trivially_consistent");
  }
  SUBCASE("injected nonzero density with zero datum") {
    auto u = zeros(q);
    for (std::size_t k = 1; k < q.times.size(); ++k) u.at(k, 30) = 0.5;
    const auto rep = uniqueness_probe(u, 1e-10, 2.0, deltas, data);
    CHECK(rep.m == doctest::Approx(q.cell_volume));
    CHECK(rep.limit_bound == 0.0);
    CHECK(rep.verdict == "forces_zero");
    REQUIRE(rep.rows.size() == deltas.size());
    CHECK(rep.rows.back().rhs < rep.rows.front().rhs);
  }
  SUBCASE("a large far-field term leaves the probe inconclusive") {
    auto u = zeros(q);
    for (std::size_t k = 1; k < q.times.size(); ++k) u.at(k, 30) = 0.5;
    UniquenessBoundData loose = data;
    loose.C_limit = 1.0;
    const auto rep = uniqueness_probe(u, 1e-10, 2.0, deltas, loose);
    CHECK(rep.limit_bound == doctest::Approx(4.0 * std::exp(loose.A)));
    CHECK(rep.verdict == "inconclusive");
  }
}
