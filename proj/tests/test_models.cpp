#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "bpfd/models.hpp"

using namespace bpfd;

TEST_CASE("polynomial energy derivative") {
  EnergyModel m = EnergyModel::polynomial(0.05);
  CHECK(f_prime(m, 1.0) == 0.0);
  CHECK(f_prime(m, 0.0) == 0.0);
  CHECK(f_prime(m, -1.0) == 0.0);
  CHECK(f_prime(m, 0.5) == Catch::Approx(-0.375));
  CHECK(f_second(m, 1.0) == Catch::Approx(2.0));
}

TEST_CASE("logarithmic energy derivative and domain") {
  EnergyModel m = EnergyModel::logarithmic(0.05, 1.0, 2.0);
  // beta root: F'(beta) = 0
  CHECK(f_prime(m, m.beta) == Catch::Approx(0.0).margin(1e-12));
  CHECK(m.beta == Catch::Approx(0.95750).margin(5e-6));
  CHECK_THROWS_AS(f_prime(m, 1.0), DomainError);
  CHECK_THROWS_AS(f_prime(m, -1.00001), DomainError);
  // monotone outside the wells
  for (double x = m.beta + 1e-3; x < 1.0 - 1e-6; x += 5e-3)
    CHECK(f_prime(m, x) > 0.0);
  for (double x = -m.beta - 1e-3; x > -1.0 + 1e-6; x -= 5e-3)
    CHECK(f_prime(m, x) < 0.0);
}

TEST_CASE("solve_beta") {
  CHECK(solve_beta(EnergyModel::polynomial(1.0)) == 1.0);
  EnergyModel lg = EnergyModel::logarithmic(1.0, 1.0, 2.0);
  double b = solve_beta(lg);
  // fixed point of b = tanh(2 b)
  CHECK(b == Catch::Approx(std::tanh(2.0 * b)).margin(1e-12));
  CHECK(std::atanh(b) / b == Catch::Approx(2.0).margin(1e-10));
  CHECK_THROWS_AS(solve_beta(EnergyModel::logarithmic(1.0, 1.0, 0.5)),
                  NoDoubleWell);
  CHECK_THROWS_AS(solve_beta(EnergyModel::null_model()), NoDoubleWell);
}

TEST_CASE("dt_bound") {
  CHECK(dt_bound(EnergyModel::polynomial(0.05)) == Catch::Approx(0.025));
  CHECK(std::isinf(dt_bound(EnergyModel::null_model())));
  EnergyModel lg = EnergyModel::logarithmic(0.05, 1.0, 2.0);
  double expect = 0.05 / (1.0 / (1.0 - lg.beta * lg.beta) - 2.0);
  CHECK(dt_bound(lg) == Catch::Approx(expect).epsilon(1e-8));
}

TEST_CASE("F'' matches a finite difference of F'") {
  for (EnergyModel m : {EnergyModel::polynomial(1.0),
                        EnergyModel::logarithmic(1.0, 1.0, 2.0)}) {
    double delta = 1e-6;
    for (double x : {-0.7, -0.2, 0.0, 0.3, 0.8}) {
      double fd = (f_prime(m, x + delta) - f_prime(m, x - delta)) /
                  (2.0 * delta);
      CHECK(fd == Catch::Approx(f_second(m, x)).margin(1e-7));
    }
  }
}

TEST_CASE("Lemma sweep: the explicit map preserves [-beta, beta]") {
  for (EnergyModel m : {EnergyModel::polynomial(0.05),
                        EnergyModel::logarithmic(0.05, 1.0, 2.0)}) {
    double bound = dt_bound(m);
    for (double frac : {1.0, 0.5, 0.1}) {
      double dt_eff = frac * bound;
      for (int k = 0; k <= 10000; ++k) {
        double x = -m.beta + 2.0 * m.beta * k / 10000.0;
        double fx = pointwise_rhs_map(m, dt_eff, x);
        REQUIRE(fx >= -m.beta - 1e-12);
        REQUIRE(fx <= m.beta + 1e-12);
      }
      // fixed points at the wells, zero at zero
      CHECK(pointwise_rhs_map(m, dt_eff, m.beta) ==
            Catch::Approx(m.beta).margin(1e-12));
      CHECK(pointwise_rhs_map(m, dt_eff, -m.beta) ==
            Catch::Approx(-m.beta).margin(1e-12));
      CHECK(pointwise_rhs_map(m, dt_eff, 0.0) == 0.0);
    }
  }
}

TEST_CASE("linear-well logarithmic variant has no symmetric double well") {
  EnergyModel m = EnergyModel::logarithmic(1.0, 1.0, 0.5, true);
  CHECK_THROWS_AS(solve_beta(m), NoDoubleWell);
  CHECK(f_prime(m, 0.0) == Catch::Approx(-0.25));
  CHECK(std::isinf(dt_bound(m)));
}

TEST_CASE("manufactured forcing vanishes on the zero solution") {
  EnergyModel m = EnergyModel::polynomial(1.0);
  ExactSolution zero;
  zero.phi = [](double, double, double) { return 0.0; };
  zero.phi_t = [](double, double, double) { return 0.0; };
  zero.phi_x = [](double, double, double) { return 0.0; };
  zero.phi_y = [](double, double, double) { return 0.0; };
  zero.lap = [](double, double, double) { return 0.0; };
  auto f = manufactured_forcing(
      m, 0.3, zero, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
  CHECK(f(0.3, 0.7, 1.1) == 0.0);
}
