#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "satnoma/bessel.hpp"

using satnoma::bessel_j;

TEST_CASE("first-kind Bessel values at reference points") {
  REQUIRE(bessel_j(0, 0.0) == 1.0);
  REQUIRE(bessel_j(1, 0.0) == 0.0);
  REQUIRE(bessel_j(2, 0.0) == 0.0);
  REQUIRE(bessel_j(3, 0.0) == 0.0);

  // high-precision reference values, frozen from an independent evaluation
  REQUIRE(bessel_j(0, 1.0) == Catch::Approx(0.76519768655796655145).epsilon(1e-14));
  REQUIRE(bessel_j(1, 1.0) == Catch::Approx(0.44005058574493351596).epsilon(1e-14));
  REQUIRE(bessel_j(3, 1.0) == Catch::Approx(0.019563353982668405919).epsilon(1e-14));
}

TEST_CASE("three-term recurrence holds across the working range") {
  // J_{n+1}(x) = (2n/x) J_n(x) - J_{n-1}(x)
  for (double x = 0.1; x <= 20.0; x += 0.1) {
    for (int n = 1; n <= 2; ++n) {
      const double lhs = bessel_j(n + 1, x);
      const double rhs = (2.0 * n / x) * bessel_j(n, x) - bessel_j(n - 1, x);
      const double scale = std::max({1e-30, std::abs(lhs), std::abs(rhs)});
      REQUIRE(std::abs(lhs - rhs) / scale < 1e-10);
    }
  }
}

TEST_CASE("parity in the argument follows the order") {
  for (double x : {0.3, 1.7, 5.0, 19.5}) {
    REQUIRE(bessel_j(0, -x) == Catch::Approx(bessel_j(0, x)).margin(1e-16));
    REQUIRE(bessel_j(2, -x) == Catch::Approx(bessel_j(2, x)).margin(1e-16));
    REQUIRE(bessel_j(1, -x) == Catch::Approx(-bessel_j(1, x)).margin(1e-16));
    REQUIRE(bessel_j(3, -x) == Catch::Approx(-bessel_j(3, x)).margin(1e-16));
  }
}

TEST_CASE("arguments outside the supported domain are rejected") {
  REQUIRE_THROWS_AS(bessel_j(4, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(bessel_j(-1, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(bessel_j(1, 50.0), std::domain_error);
  REQUIRE_THROWS_AS(bessel_j(1, -50.0), std::domain_error);
}

TEST_CASE("values stay bounded by 1 in magnitude") {
  for (double x = 0.0; x < 49.9; x += 0.7)
    for (int n = 0; n <= 3; ++n) REQUIRE(std::abs(bessel_j(n, x)) <= 1.0);
}
