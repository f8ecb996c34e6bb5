#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rough_transport/errors.hpp"
#include "rough_transport/lagrangian_flow.hpp"

using namespace rough_transport;

namespace {

TestIntegrand bump_integrand() {
  TestIntegrand phi;
  phi.eval = [](const Vec& y) {
    const double s = 1.0 - y[0] * y[0];
    return s > 0.0 ? s * s * s * s : 0.0;
  };
  phi.integral = 256.0 / 315.0;  // int_{-1}^1 (1-x^2)^4
  phi.tail_mass = [](double rho) { return rho >= 1.0 ? 0.0 : 1.0; };
  return phi;
}

}  // namespace

TEST_CASE("seed grid is cell-centred and avoids the axes") {
  const auto g = make_seed_grid(2, 4, 1.0);
  CHECK(g.size() == 16);
  CHECK(g.spacing == 0.5);
  CHECK(g.cell_volume == 0.25);
  for (const auto& p : g.points) {
    CHECK(p[0] != 0.0);
    CHECK(p[1] != 0.0);
  }
  CHECK(g.points[0][0] == -0.75);
  CHECK(g.points[1][0] == -0.25);  // axis 0 fastest
  CHECK(g.on_boundary_layer(0));
  CHECK_FALSE(g.on_boundary_layer(5));
}

TEST_CASE("integrate_flow against analytic flows") {
  SUBCASE("zero field leaves seeds in place") {
    const auto g = make_seed_grid(1, 8, 1.0);
    const auto flow = integrate_flow(zero_field(1, 1.0), g, 10, Direction::forward);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(flow.final_position(i) == g.points[i]);
  }
  SUBCASE("linear expansion reaches e") {
    const std::vector<Vec> x0{Vec{1.0}};
    const auto flow = integrate_flow(linear_field(1.0, 1.0), x0, 1.0, 1000, Direction::forward);
    CHECK(flow.initial_position(0)[0] == 1.0);
    CHECK(std::abs(flow.final_position(0)[0] - std::numbers::e) <= 1e-8);
  }
  SUBCASE("quarter rotation") {
    const std::vector<Vec> x0{Vec{1.0, 0.0}};
    const auto flow = integrate_flow(rotation_field(std::numbers::pi / 2), x0, 1.0, 1000, Direction::forward);
    CHECK(distance(flow.final_position(0), Vec{0.0, 1.0}) <= 1e-8);
  }
  SUBCASE("shear translates off the interface") {
    const std::vector<Vec> x0{Vec{0.0, 0.3}, Vec{0.0, -0.2}};
    const auto flow = integrate_flow(shear_field(0.7), x0, 1.0, 50, Direction::forward);
    CHECK(flow.final_position(0)[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(flow.final_position(1)[0] == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK(flow.final_position(1)[1] == -0.2);
  }
}

TEST_CASE("backward flow inverts the forward flow") {
  const auto g = make_seed_grid(2, 8, 1.0);
  CHECK(composition_error(rotation_field(1.0), g, 200) <= 1e-10);
  const std::vector<Vec> x{Vec{std::numbers::e}};
  const auto back = integrate_flow(linear_field(1.0, 1.0), x, 3.0, 1000, Direction::backward);
  CHECK(back.direction() == Direction::backward);
  CHECK(back.final_position(0)[0] == std::numbers::e);
  CHECK(back.initial_position(0)[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("integrate_flow is bit-for-bit reproducible") {
  const auto g = make_seed_grid(2, 16, 2.0);
  const auto a = integrate_flow(rotation_field(1.0), g, 100, Direction::forward);
  const auto b = integrate_flow(rotation_field(1.0), g, 100, Direction::forward);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(a.final_position(i) == b.final_position(i));
}

TEST_CASE("StepBlowup names the escaping seed") {
  VelocityFieldSpec f = linear_field(1.0, 1.0);
  f.eval_b = [](double, const Vec& x) { return Vec{x[0] * x[0]}; };
  const std::vector<Vec> x0{Vec{0.1}, Vec{2.0}};
  try {
    integrate_flow(f, x0, 2.0, 1000, Direction::forward);
    FAIL("expected StepBlowup");
  } catch (const StepBlowup& e) {
    CHECK(e.seed() == 1);
  }
}

TEST_CASE("jacobian tracks against exponential oracles") {
  const auto g = make_seed_grid(1, 16, 1.0);
  SUBCASE("expansion") {
    const auto f = linear_field(1.0, 1.0);
    const auto flow = integrate_flow(f, g, 100, Direction::forward);
    const auto tr = jacobian(f, flow);
    CHECK(tr.L == doctest::Approx(1.0));
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(tr.jacobian(i, 0) == 1.0);
      CHECK(tr.final_jacobian(i) == doctest::Approx(std::numbers::e).epsilon(1e-12));
    }
    CHECK(jacobian_bound_violation(tr) <= 1e-12);
  }
  SUBCASE("contraction") {
    const auto f = linear_field(-1.0, 1.0);
    const auto tr = jacobian(f, integrate_flow(f, g, 100, Direction::forward));
    CHECK(tr.final_jacobian(3) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  SUBCASE("divergence-free") {
    const auto g2 = make_seed_grid(2, 8, 1.0);
    const auto f = rotation_field(1.0);
    const auto tr = jacobian(f, integrate_flow(f, g2, 100, Direction::forward));
    for (std::size_t i = 0; i < g2.size(); ++i) CHECK(tr.final_jacobian(i) == 1.0);
  }
}

TEST_CASE("inconsistent divergence metadata is reported") {
  auto f = linear_field(1.0, 1.0);
  f.div_sup = [](double) { return 0.01; };
  const auto g = make_seed_grid(1, 4, 1.0);
  CHECK_THROWS_AS(jacobian(f, integrate_flow(f, g, 20, Direction::forward)), DivergenceUnbounded);
}

TEST_CASE("jacobian ODE residual is first order in the step") {
  const auto g = make_seed_grid(1, 8, 1.0);
  const auto f = linear_field(1.0, 1.0);
  auto residual = [&](int steps) {
    const auto flow = integrate_flow(f, g, steps, Direction::forward);
    return jacobian_ode_residual(f, flow, jacobian(f, flow));
  };
  const auto r1 = residual(1000);
  const auto r2 = residual(2000);
  CHECK(r1.jx <= 1e-3);
  CHECK(r1.inv_jx <= 1e-3);
  CHECK(r2.jx <= 0.5 * r1.jx * 1.01);
  const auto z = integrate_flow(zero_field(1, 1.0), g, 10, Direction::forward);
  CHECK(jacobian_ode_residual(zero_field(1, 1.0), z, jacobian(zero_field(1, 1.0), z)).jx == 0.0);
}

TEST_CASE("change of variables on an expanding flow") {
  const auto f = linear_field(1.0, 1.0);
  const auto g = make_seed_grid(1, 512, 1.0);
  const auto flow = integrate_flow(f, g, 1000, Direction::forward);
  const auto tr = jacobian(f, flow);
  CHECK(change_of_variables_residual(g, flow, tr, bump_integrand(), flow.steps()) <= 1e-5);
  // Seeds on [-0.5, 0.5] cannot see the bump's mass near |y| = 1.
  const auto small = make_seed_grid(1, 64, 0.5);
  const auto still = integrate_flow(zero_field(1, 1.0), small, 4, Direction::forward);
  CHECK_THROWS_AS(change_of_variables_residual(small, still, jacobian(zero_field(1, 1.0), still), bump_integrand(), 0),
                  DomainTooSmall);
}

TEST_CASE("compressibility of identity and contraction") {
  const auto g = make_seed_grid(1, 10000, 4.0);
  const auto id = integrate_flow(zero_field(1, 1.0), g, 10, Direction::forward);
  CHECK(compressibility_estimate(g, id, 16, id.steps()) == doctest::Approx(1.0).epsilon(1e-12));
  const auto f = linear_field(-1.0, 1.0);
  const auto flow = integrate_flow(f, g, 200, Direction::forward);
  CHECK(compressibility_estimate(g, flow, 16, flow.steps()) == doctest::Approx(std::numbers::e).epsilon(0.1));
}

TEST_CASE("superlevel escape") {
  const auto g = make_seed_grid(1, 64, 2.0);
  const auto id = integrate_flow(zero_field(1, 1.0), g, 10, Direction::forward);
  CHECK(superlevel_escape(g, id, 1.0, 1.5) == 0.0);
  const auto flow = integrate_flow(linear_field(1.0, 1.0), g, 100, Direction::forward);
  CHECK(superlevel_escape(g, flow, 1.0, std::numbers::e + 0.01) == 0.0);
  double prev = kInf;
  for (double R : {1.0, 1.5, 2.0, 2.5}) {
    const double m = superlevel_escape(g, flow, 1.0, R);
    CHECK(m <= prev);
    prev = m;
  }
  CHECK(superlevel_escape(g, flow, 1.0, 1.0) > 0.0);
}

TEST_CASE("flow convergence on a smooth field sits at the noise floor") {
  const auto g = make_seed_grid(1, 16, 1.0);
  const std::vector<double> eps{0.2, 0.1};
  const auto rows = flow_convergence_study(zero_field(1, 1.0), eps, g, 20);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.flow_discrepancy <= 1e-8);
    CHECK(r.jacobian_discrepancy <= 1e-8);
  }
  const std::vector<double> bad{0.1, 0.2};
  CHECK_THROWS_AS(flow_convergence_study(zero_field(1, 1.0), bad, g, 20), Error);
}
