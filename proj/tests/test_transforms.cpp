#include <doctest.h>

#include <cmath>
#include <vector>

#include "armaopt/rng.hpp"
#include "armaopt/transforms.hpp"

using namespace armaopt;

TEST_CASE("levinson forward maps hand-computed AR(2) case") {
  // rho = (0.5, 0.2): phi22 = 0.2, phi21 = 0.5 - 0.2*0.5 = 0.4.
  const std::vector<double> rho{0.5, 0.2};
  const std::vector<double> phi = levinson_forward(rho);
  REQUIRE(phi.size() == 2);
  CHECK(phi[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(phi[1] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("order one maps are the identity") {
  CHECK(levinson_forward(std::vector<double>{0.7})[0] == 0.7);
  CHECK(levinson_inverse(std::vector<double>{0.7})[0] == 0.7);
  CHECK(ma_forward(std::vector<double>{-0.3})[0] == -0.3);
  CHECK(ma_inverse(std::vector<double>{-0.3})[0] == -0.3);
}

TEST_CASE("ma forward uses the plus-sign recursion") {
  // b = (0.5, 0.2): theta22 = 0.2, theta21 = 0.5 + 0.2*0.5 = 0.6.
  const std::vector<double> b{0.5, 0.2};
  const std::vector<double> theta = ma_forward(b);
  REQUIRE(theta.size() == 2);
  CHECK(theta[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(theta[1] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("forward and inverse recursions round-trip random boxes") {
  RngStream rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng.next_u64() % 5);
    std::vector<double> rho(k), b(k);
    for (int i = 0; i < k; ++i) {
      rho[i] = rng.uniform(-0.95, 0.95);
      b[i] = rng.uniform(-0.95, 0.95);
    }
    const std::vector<double> back_ar = levinson_inverse(levinson_forward(rho));
    const std::vector<double> back_ma = ma_inverse(ma_forward(b));
    for (int i = 0; i < k; ++i) {
      CHECK(back_ar[i] == doctest::Approx(rho[i]).epsilon(1e-10));
      CHECK(back_ma[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("forward maps reject closed-boundary input") {
  CHECK_THROWS_AS((void)levinson_forward(std::vector<double>{1.0}),
                  std::domain_error);
  CHECK_THROWS_AS((void)ma_forward(std::vector<double>{0.2, -1.0}),
                  std::domain_error);
}

TEST_CASE("inverse recursions detect infeasible polynomials") {
  // AR(1) with phi = 1.2 has a root inside the unit disk.
  CHECK_THROWS_AS((void)levinson_inverse(std::vector<double>{1.2}),
                  NonCausalError);
  CHECK_THROWS_AS((void)ma_inverse(std::vector<double>{-1.05}),
                  NonInvertibleError);
  // AR(2) outside the triangle: phi1 + phi2 >= 1.
  CHECK_THROWS_AS((void)levinson_inverse(std::vector<double>{0.8, 0.3}),
                  NonCausalError);
}

TEST_CASE("pacf_to_arma and arma_to_pacf agree with the componentwise maps") {
  const PacfCoeffs p{{0.5, 0.2}, {-0.4}, 2.5};
  const ArmaCoeffs c = pacf_to_arma(p);
  CHECK(c.phi[0] == doctest::Approx(0.4));
  CHECK(c.phi[1] == doctest::Approx(0.2));
  CHECK(c.theta[0] == doctest::Approx(-0.4));
  CHECK(c.sigma2 == 2.5);
  const PacfCoeffs back = arma_to_pacf(c);
  CHECK(back.rho[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(back.rho[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(back.b[0] == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(back.sigma2 == 2.5);
}

TEST_CASE("stable logistic map is tanh of the half-argument") {
  CHECK(jones_map_scalar(0.0) == 0.0);
  CHECK(jones_map_scalar(std::log(3.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(jones_map_scalar(-std::log(3.0)) ==
        doctest::Approx(-0.5).epsilon(1e-14));
  for (double u : {-8.0, -1.3, 0.2, 5.0})
    CHECK(jones_map_scalar(u) ==
          doctest::Approx(std::tanh(u / 2.0)).epsilon(1e-14));
}

TEST_CASE("stable form saturates strictly inside the interval") {
  CHECK(jones_map_scalar(1000.0) == kPacfSaturation);
  CHECK(jones_map_scalar(-1000.0) == -kPacfSaturation);
  CHECK(std::isfinite(jones_map_scalar(1e308)));
  CHECK(std::isfinite(jones_map_scalar(-1e308)));
  CHECK(std::abs(jones_map_scalar(1e308)) < 1.0);
}

TEST_CASE("naive form reproduces the literal expression's failures") {
  // exp(746) overflows, leaving (1 - inf)/(1 + inf) = NaN.
  CHECK(std::isnan(jones_map_scalar(-746.0, JonesForm::Naive)));
  CHECK(std::isnan(jones_map_scalar(-800.0, JonesForm::Naive)));
  // Beyond ~37.4 the ratio rounds onto the closed boundary exactly.
  CHECK(jones_map_scalar(38.0, JonesForm::Naive) == 1.0);
  CHECK(jones_map_scalar(-38.0, JonesForm::Naive) == -1.0);
  CHECK(jones_map_scalar(400.0, JonesForm::Naive) == 1.0);
  // Moderate arguments agree with the stable form.
  for (double u : {-20.0, -3.0, 0.0, 1.5, 20.0})
    CHECK(jones_map_scalar(u, JonesForm::Naive) ==
          doctest::Approx(jones_map_scalar(u)).epsilon(1e-12));
}

TEST_CASE("logistic inverse round-trips the stable map") {
  for (double u : {-10.0, -4.2, -0.1, 0.0, 2.7, 10.0})
    CHECK(jones_inverse_scalar(jones_map_scalar(u)) ==
          doctest::Approx(u).epsilon(1e-9));
  // Near saturation the image loses relative precision in 1 - |rho|, so the
  // round trip is only conditioning-limited, not exact.
  for (double u : {-30.0, 30.0})
    CHECK(jones_inverse_scalar(jones_map_scalar(u)) ==
          doctest::Approx(u).epsilon(1e-3));
  for (double r : {-0.999, -0.25, 0.0, 0.6, 0.999})
    CHECK(jones_map_scalar(jones_inverse_scalar(r)) ==
          doctest::Approx(r).epsilon(1e-12));
  CHECK_THROWS_AS((void)jones_inverse(std::vector<double>{1.0}),
                  std::domain_error);
}

TEST_CASE("vector logistic maps apply componentwise") {
  const std::vector<double> x{-1.0, 0.0, 2.0};
  const std::vector<double> r = jones_map(x);
  REQUIRE(r.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(r[i] == jones_map_scalar(x[i]));
  const std::vector<double> u = jones_inverse(r);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(u[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("clipped inverse map is total and fixes feasible points") {
  const double eps = 1e-2;
  // Feasible input well inside the box passes through unchanged.
  const ArmaCoeffs ok{{0.4, 0.2}, {-0.3}, 1.0};
  const PacfCoeffs p_ok = arma_to_pacf_clipped(ok, eps);
  const PacfCoeffs p_ref = arma_to_pacf(ok);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(p_ok.rho[i] == doctest::Approx(p_ref.rho[i]).epsilon(1e-12));
  CHECK(p_ok.b[0] == doctest::Approx(p_ref.b[0]).epsilon(1e-12));

  // Infeasible input lands strictly inside the shrunk box.
  const ArmaCoeffs bad{{1.3}, {-1.2}, 1.0};
  const PacfCoeffs p_bad = arma_to_pacf_clipped(bad, eps);
  CHECK(std::abs(p_bad.rho[0]) <= 1.0 - eps);
  CHECK(std::abs(p_bad.b[0]) <= 1.0 - eps);
  CHECK(p_bad.rho[0] == doctest::Approx(1.0 - eps));
  CHECK(p_bad.b[0] == doctest::Approx(-(1.0 - eps)));
}

TEST_CASE("round-trip through the chart respects saturation ordering") {
  // The saturation level must sit strictly inside the boundary tolerance so
  // saturated chart output still converts to a model.
  CHECK(kPacfSaturation < 1.0 - kPacfBoundaryTol);
  const PacfCoeffs p{{kPacfSaturation}, {}, 1.0};
  CHECK_NOTHROW((void)pacf_to_arma(p));
}
