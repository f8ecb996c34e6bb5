#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rough_transport/field_library.hpp"
#include "rough_transport/numerics.hpp"
#include "rough_transport/renormalization.hpp"

using namespace rough_transport;

TEST_CASE("arctan renormalizer values") {
  const auto b1 = make_beta_arctan(1.0);
  CHECK(b1.beta(0.0) == 0.0);
  CHECK(b1.beta(1.0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
  CHECK(b1.sup_beta == doctest::Approx(std::numbers::pi / 2));
  // Taylor remainder r^3 / (3 M^2) ~ 4e-11.
  CHECK(std::abs(make_beta_arctan(1e6).beta(5.0) - 5.0) <= 1e-10);
}

TEST_CASE("log renormalizer values") {
  for (double delta : {1.0, 1e-2, 1e-4}) CHECK(make_beta_log(delta).beta(0.0) == 0.0);
  CHECK(make_beta_log(1.0).sup_beta == doctest::Approx(std::log(1.0 + std::numbers::pi * std::numbers::pi / 4.0)));
}

TEST_CASE("|r beta_delta'(r)| at fixed sample points") {
  // Closed form r beta' = 2 r arctan(r) / ((1 + r^2)(delta + arctan^2 r)).
  for (double delta : {1.0, 1e-2, 1e-4}) {
    const auto b = make_beta_log(delta);
    for (double r : {0.1, 1.0, 10.0, 1e3}) {
      for (double s : {-1.0, 1.0}) {
        const double x = s * r;
        const double a = std::atan(x);
        const double oracle = 2.0 * x * a / ((1.0 + x * x) * (delta + a * a));
        CHECK(x * b.beta_prime(x) == doctest::Approx(oracle).epsilon(1e-12));
        if (delta == 1.0) CHECK(std::abs(oracle) <= 1.0);
      }
    }
  }
}

TEST_CASE("sweep supremum of |r beta_delta'| approaches 2 as delta shrinks") {
  CHECK(sweep_sup_rbeta_prime(make_beta_log(1.0)).first <= 1.0);
  // At r = 1, delta = 1e-4: 2 (pi/4) / (2 (1e-4 + pi^2/16)) ~ 1.27.
  CHECK(sweep_sup_rbeta_prime(make_beta_log(1e-4)).first > 1.2);
  for (double delta : {1.0, 1e-2, 1e-4}) CHECK(sweep_sup_rbeta_prime(make_beta_log(delta)).first <= 2.0);
}

TEST_CASE("contraction gap examples and random sweep") {
  CHECK(arctan_contraction_gap(3.0, 3.0, 1.0) == 0.0);
  CHECK(arctan_contraction_gap(1.0, 0.0, 1.0) == doctest::Approx(std::numbers::pi / 4 - 0.5).epsilon(1e-14));
  Rng rng(2024);
  double worst = kInf;
  const double Ms[] = {0.1, 1.0, 10.0};
  for (int i = 0; i < 10000; ++i) {
    const double r1 = rng.uniform(-1e3, 1e3);
    const double r2 = rng.uniform(-1e3, 1e3);
    worst = std::min(worst, arctan_contraction_gap(r1, r2, Ms[i % 3]));
  }
  CHECK(worst >= -1e-12);
}

TEST_CASE("standard sweep layout") {
  const auto& s = standard_sweep();
  CHECK(s.size() >= 100000);
  CHECK(std::count(s.begin(), s.end(), 0.0) == 1);
  CHECK(*std::max_element(s.begin(), s.end()) == doctest::Approx(1e6));
  CHECK(*std::min_element(s.begin(), s.end()) == doctest::Approx(-1e6));
}

TEST_CASE("admissibility") {
  CHECK(check_admissible(make_beta_arctan(1.0)).passed());
  CHECK(check_admissible(make_beta_arctan(10.0)).passed());
  CHECK(check_admissible(make_beta_log(1e-2)).passed());
  const auto identity = make_renormalizer("identity", [](double r) { return r; }, [](double) { return 1.0; }, kInf, kInf);
  const auto rep = check_admissible(identity);
  CHECK_FALSE(rep.passed());
  CHECK_FALSE(rep.bounded.passed);
  CHECK(rep.vanishes_at_zero.passed);
  const auto shifted = make_renormalizer("shifted", [](double r) { return 1.0 + std::atan(r); },
                                         [](double r) { return 1.0 / (1.0 + r * r); }, 3.0, 1.0);
  CHECK_FALSE(check_admissible(shifted).vanishes_at_zero.passed);
  const auto wrong = make_renormalizer("wrong derivative", [](double r) { return std::atan(r); },
                                       [](double r) { return 2.0 / (1.0 + r * r); }, 2.0, 2.0);
  CHECK_FALSE(check_admissible(wrong).derivative_consistent.passed);
}

TEST_CASE("phi_R values") {
  const auto phi = make_phi_R(1.0, 1);
  CHECK(phi.eval(Vec{0.5}) == 0.25);
  CHECK(phi.eval(Vec{1.0}) == 0.25);
  CHECK(phi.eval_radial(1.0 - 1e-15) == 0.25);
  CHECK(phi.eval(Vec{-3.0}) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(phi.eval_grad(Vec{0.5})[0] == 0.0);
  // d/dx (1 + x)^{-2} = -2 (1 + x)^{-3}.
  CHECK(phi.eval_grad(Vec{3.0})[0] == doctest::Approx(-2.0 / 64.0).epsilon(1e-15));
  CHECK(phi.eval_grad(Vec{-3.0})[0] == doctest::Approx(2.0 / 64.0).epsilon(1e-15));
  CHECK(phi.decay_constant() == doctest::Approx(8.0));
}

TEST_CASE("phi_R invariants and integrals") {
  for (int d = 1; d <= 3; ++d) {
    for (double R : {0.5, 2.0, 8.0}) {
      CAPTURE(d);
      CAPTURE(R);
      const auto phi = make_phi_R(R, d);
      const auto chk = check_phi_R(phi);
      CHECK(chk.passed());
      CHECK(chk.continuity_gap <= 1e-15);
      CHECK(chk.max_grad_bound_ratio <= 1.0 + 1e-12);
      CHECK(phi_R_l1_quadrature(phi) == doctest::Approx(phi.l1_norm()).epsilon(1e-6));
    }
  }
  // 2 (1/4 + int_1^inf (1 + x)^{-2} dx) = 3/2.
  CHECK(std::abs(phi_R_l1_quadrature(make_phi_R(1.0, 1)) - 1.5) <= 1e-6);
  CHECK(make_phi_R(1.0, 1).tail_mass(3.0) == doctest::Approx(0.5));  // 2 int_3^inf (1+x)^{-2} = 2/4
}
