#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grt/metric.hpp"

using namespace grt;

namespace {

// Independent curvature oracle for warped profiles: -f''/f with f'' from a
// central second difference of f alone.
double warped_curvature_fd(const MetricSpec& spec, double r, double h = 1e-5) {
  const auto& f = spec.warp().f;
  const double ddf = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
  return -ddf / f(r);
}

// Independent curvature oracle for conformal potentials: -e^{-2phi} Lap phi
// with a 5-point finite-difference Laplacian of phi alone.
double conformal_curvature_fd(const MetricSpec& spec, const Vec2& x,
                              double h = 1e-4) {
  const auto& phi = spec.potential().phi;
  const double lap = (phi({x[0] + h, x[1]}) + phi({x[0] - h, x[1]}) +
                      phi({x[0], x[1] + h}) + phi({x[0], x[1] - h}) -
                      4.0 * phi(x)) /
                     (h * h);
  return -std::exp(-2.0 * phi(x)) * lap;
}

}  // namespace

TEST_CASE("euclidean: flat, distance is chart radius") {
  const MetricSpec spec = make_euclidean();
  CHECK(spec.gaussian_curvature({0.3, -1.2}) == 0.0);
  CHECK(spec.distance_to_base({3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-12));
  const Mat2 g = spec.metric_tensor({1.0, 2.0});
  CHECK(g[0][0] == 1.0);
  CHECK(g[1][1] == 1.0);
  CHECK(g[0][1] == 0.0);
}

TEST_CASE("flat_polar: zero curvature away from the pole") {
  const MetricSpec spec = make_flat_polar();
  for (double r : {0.1, 1.0, 7.5})
    CHECK(spec.gaussian_curvature({r, 0.4}) == doctest::Approx(0.0).epsilon(1e-14));
  const auto cls = CurvatureClass::poly(3.0, 1.0);
  const auto rep = verify_curvature_class(spec, cls, 500, 20.0);
  CHECK(rep.max_violation <= 0.0);
}

TEST_CASE("hyperbolic: constant curvature -k") {
  for (double k : {1.0, 0.25}) {
    const MetricSpec spec = make_hyperbolic(k);
    for (double r : {0.2, 1.0, 5.0, 20.0}) {
      CHECK(spec.gaussian_curvature({r, 1.0}) ==
            doctest::Approx(-k).epsilon(1e-10));
      CHECK(spec.gaussian_curvature({r, 1.0}) ==
            doctest::Approx(warped_curvature_fd(spec, r)).epsilon(1e-5));
    }
    CHECK(spec.distance_to_base({3.5, 0.0}) == 3.5);
  }
}

TEST_CASE("polydecay: curvature oracle, sign, class membership") {
  const double a = 0.5;
  const MetricSpec spec = make_polydecay(a);
  CHECK(spec.gaussian_curvature({0.0, 0.0}) ==
        doctest::Approx(-2.0 * a).epsilon(1e-9));
  for (double r : {0.05, 0.5, 2.0, 10.0, 50.0}) {
    const double K = spec.gaussian_curvature({r, 0.0});
    CHECK(K <= 0.0);
    CHECK(K == doctest::Approx(warped_curvature_fd(spec, r)).epsilon(1e-4));
    // class bound |K| <= 2a (1+r)^{-3}
    CHECK(std::abs(K) <= 2.0 * a * std::pow(1.0 + r, -3.0) * (1.0 + 1e-12));
  }
  // convexity of the warp, i.e. nonpositive curvature everywhere sampled
  const auto rep =
      verify_curvature_class(spec, CurvatureClass::poly(3.0, 2.0 * a), 2000, 100.0);
  CHECK(rep.max_violation <= 1e-12);
}

TEST_CASE("gausswell: curvature closed form vs FD Laplacian oracle") {
  const double c = 0.1;
  const MetricSpec spec = make_gausswell(c);
  for (const Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.7, -0.3}, Vec2{2.0, 1.0}}) {
    const double K = spec.gaussian_curvature({x[0], x[1]});
    CHECK(K == doctest::Approx(-4.0 * c * std::exp(-2.0 * c * dot(x, x)))
                   .epsilon(1e-10));
    CHECK(K == doctest::Approx(conformal_curvature_fd(spec, x)).epsilon(1e-5));
    CHECK(K <= 0.0);
    CHECK(std::abs(K) <= 4.0 * c);
  }
}

TEST_CASE("conformal distance: radial arclength and its inverse") {
  const MetricSpec spec = make_gausswell(0.1);
  // d(rho) = int_0^rho e^{0.1 s^2} ds is strictly increasing; round-trip
  for (double d : {0.5, 1.0, 2.0, 3.0}) {
    const ChartPoint x = spec.point_at_distance(d, 0.7);
    CHECK(spec.distance_to_base(x) == doctest::Approx(d).epsilon(1e-9));
  }
  // against an independent series evaluation at small rho:
  // int_0^rho e^{c s^2} ds = rho + c rho^3/3 + c^2 rho^5/10 + ...
  const double rho = 0.3, c = 0.1;
  const double series = rho + c * std::pow(rho, 3) / 3.0 +
                        c * c * std::pow(rho, 5) / 10.0;
  CHECK(spec.distance_to_base({rho, 0.0}) ==
        doctest::Approx(series).epsilon(1e-8));
}

TEST_CASE("christoffel symbols: warped closed forms and conformal symmetry") {
  const MetricSpec hyp = make_hyperbolic(1.0);
  const double r = 1.3;
  const auto g = hyp.christoffel({r, 0.2});
  CHECK(g[0][1][1] ==
        doctest::Approx(-std::sinh(r) * std::cosh(r)).epsilon(1e-12));
  CHECK(g[1][0][1] == doctest::Approx(std::cosh(r) / std::sinh(r)).epsilon(1e-12));
  CHECK(g[1][0][1] == g[1][1][0]);

  const MetricSpec well = make_gausswell(0.2);
  const auto gc = well.christoffel({0.5, -0.4});
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      CHECK(gc[k][i][1 - i] == gc[k][1 - i][i]);
  // Gamma^x_{xx} = phi_x for conformal metrics
  CHECK(gc[0][0][0] == doctest::Approx(2.0 * 0.2 * 0.5).epsilon(1e-12));
}

TEST_CASE("builtin curvature classes verify on samples") {
  CHECK(verify_curvature_class(make_euclidean(), CurvatureClass::bounded(0.0),
                               200, 10.0)
            .max_violation <= 0.0);
  CHECK(verify_curvature_class(make_hyperbolic(0.4),
                               CurvatureClass::bounded(0.4), 500, 30.0)
            .max_violation <= 1e-10);
  CHECK(verify_curvature_class(make_gausswell(0.1),
                               CurvatureClass::bounded(0.4), 500, 10.0)
            .max_violation <= 1e-10);
}
