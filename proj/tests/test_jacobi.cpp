#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grt/jacobi.hpp"

using namespace grt;

TEST_CASE("flat jacobi fields are linear") {
  auto K = [](double) { return 0.0; };
  const JacobiSolution jp = solve_jacobi_profile(K, 0.0, 1.0, 10.0, 1e-12);
  const JacobiSolution jh = solve_jacobi_profile(K, 1.0, 0.0, 10.0, 1e-12);
  for (double t : {0.5, 3.0, 10.0}) {
    CHECK(jp.u(t) == doctest::Approx(t).epsilon(1e-10));
    CHECK(jh.u(t) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("constant curvature -1: sinh and cosh") {
  const MetricSpec spec = make_hyperbolic(1.0);
  const PhasePoint pp = phase_point_polar(spec, 1.0, 0.0, 0.6);
  GeodesicPath path(spec, pp, 10.0);
  const JacobiSolution jp = solve_jacobi(spec, path, 0.0, 1.0, 10.0, 1e-10);
  const JacobiSolution jh = solve_jacobi(spec, path, 1.0, 0.0, 10.0, 1e-10);
  for (double t = 0.5; t <= 10.0; t += 0.5) {
    CHECK(jp.u(t) == doctest::Approx(std::sinh(t)).epsilon(1e-6));
    CHECK(jh.u(t) == doctest::Approx(std::cosh(t)).epsilon(1e-6));
  }
}

TEST_CASE("poly-decay spec: tight-tolerance reference oracle") {
  const MetricSpec spec = make_polydecay(0.5);
  const PhasePoint pp = phase_point_polar(spec, 1.5, 0.7, 0.4);
  GeodesicPath path(spec, pp, 50.0);
  const JacobiSolution ref = solve_jacobi(spec, path, 0.0, 1.0, 50.0, 1e-12);
  const JacobiSolution sol = solve_jacobi(spec, path, 0.0, 1.0, 50.0, 1e-9);
  for (double t : {1.0, 10.0, 30.0, 50.0})
    CHECK(sol.u(t) == doctest::Approx(ref.u(t)).epsilon(1e-7));
}

TEST_CASE("wronskian constancy and flat lower comparison") {
  for (const MetricSpec& spec :
       {make_hyperbolic(0.7), make_polydecay(0.5), make_gausswell(0.1)}) {
    const PhasePoint pp = phase_point_polar(spec, 2.0, 0.4, 1.0);
    GeodesicPath path(spec, pp, 50.0);
    const JacobiSolution jh = solve_jacobi(spec, path, 1.0, 0.0, 50.0, 1e-11);
    const JacobiSolution jp = solve_jacobi(spec, path, 0.0, 1.0, 50.0, 1e-11);
    const double w0 = wronskian(jh, jp, 0.0);
    CHECK(w0 == doctest::Approx(1.0).epsilon(1e-10));
    for (double t : {5.0, 25.0, 50.0}) {
      // drift relative to the size of the products being cancelled
      const double scale = std::max(
          1.0, std::abs(jh.u(t) * jp.du(t)) + std::abs(jh.du(t) * jp.u(t)));
      CHECK(std::abs(wronskian(jh, jp, t) - w0) <= 1e-8 * scale);
      // K <= 0 comparison with the flat solutions
      CHECK(jp.u(t) >= t - 1e-9);
      CHECK(jh.u(t) >= 1.0 - 1e-9);
    }
  }
}

TEST_CASE("exponential envelope saturates at constant curvature") {
  const MetricSpec spec = make_hyperbolic(0.25);
  const PhasePoint pp = phase_point_polar(spec, 1.0, 0.0, 0.9);
  GeodesicPath path(spec, pp, 50.0);
  for (auto ic : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}}) {
    const JacobiSolution sol =
        solve_jacobi(spec, path, ic.first, ic.second, 50.0, 1e-11);
    const EnvelopeReport rep = exponential_envelope(sol, 0.25);
    CHECK(rep.max_ratio == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.max_ratio <= 1.0 + 1e-6);
  }
}

TEST_CASE("flat solution against K0=1 envelope stays below one") {
  auto K = [](double) { return 0.0; };
  const JacobiSolution sol = solve_jacobi_profile(K, 0.0, 1.0, 20.0, 1e-11);
  const EnvelopeReport rep = exponential_envelope(sol, 1.0);
  CHECK(rep.max_ratio <= 1.0);
  // the ratio t/sinh(t) approaches 1 only at t -> 0
  CHECK(rep.argmax_t <= 0.2);
}

TEST_CASE("poly-decay spec inside Bounded(0.4)") {
  const MetricSpec spec = make_polydecay(0.2);  // |K| <= 0.4
  const PhasePoint pp = phase_point_polar(spec, 1.0, 0.3, 0.8);
  GeodesicPath path(spec, pp, 50.0);
  const JacobiSolution sol = solve_jacobi(spec, path, 0.0, 1.0, 50.0, 1e-11);
  CHECK(exponential_envelope(sol, 0.4).max_ratio <= 1.0);
}

TEST_CASE("waltman certificate: flat case is tight") {
  const MetricSpec spec = make_flat_polar();
  const PhasePoint pp = phase_point_polar(spec, 0.5, 0.0, 0.0);
  GeodesicPath path(spec, pp, 5.0);
  // c = 0 encodes |K| <= 0: exactly flat, so M_K vanishes with no tail
  const CurvatureClass cls = CurvatureClass::poly(3.0, 0.0);
  const GrowthCertificate cert =
      waltman_certificate(spec, cls, path, 0.0, 1.0);
  CHECK(cert.m_k == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cert.c1 == doctest::Approx(1.0).epsilon(1e-10));
  const JacobiSolution sol = solve_jacobi(spec, path, 0.0, 1.0, 100.0, 1e-10);
  for (double t = 1.0; t <= 100.0; t += 1.0)
    CHECK(std::abs(sol.u(t)) <= cert.bound(t) * (1.0 + 1e-12));
}

TEST_CASE("waltman certificate dominates J_p on the poly-decay spec") {
  const double a = 0.5;
  const MetricSpec spec = make_polydecay(a);
  const CurvatureClass cls = CurvatureClass::poly(3.0, 2.0 * a);
  // radial escaping geodesic from r = 0.5
  const PhasePoint pp = phase_point_polar(spec, 0.5, 0.0, 0.0);
  GeodesicPath path(spec, pp, 200.0);
  const GrowthCertificate cert = waltman_certificate(spec, cls, path, 0.0, 1.0);
  const JacobiSolution sol = solve_jacobi(spec, path, 0.0, 1.0, 200.0, 1e-11);
  double worst = 0.0;
  for (double t = 1.0; t <= 200.0; t += 1.0)
    worst = std::max(worst, std::abs(sol.u(t)) / cert.bound(t));
  CHECK(worst <= 1.0);
}

TEST_CASE("moment tail matches a long numerical quadrature") {
  const CurvatureClass cls = CurvatureClass::poly(3.0, 1.0);
  const double d = 1.5, T = 40.0;
  const double numeric = integrate_adaptive(
      [&](double s) { return s * std::pow(1.0 + s - d, -3.0); }, T, 1e6, 1e-12);
  CHECK(moment_tail(cls, d, T) == doctest::Approx(numeric).epsilon(1e-6));
}

TEST_CASE("sphere volumes: closed forms") {
  CHECK(sphere_volume(make_flat_polar(), 3.0) ==
        doctest::Approx(6.0 * M_PI).epsilon(1e-12));
  CHECK(sphere_volume(make_euclidean(), 3.0) ==
        doctest::Approx(6.0 * M_PI).epsilon(1e-8));
  CHECK(sphere_volume(make_hyperbolic(1.0), 2.0) ==
        doctest::Approx(2.0 * M_PI * std::sinh(2.0)).epsilon(1e-12));
  // warped closed form agrees with the ODE quadrature route
  CHECK(sphere_volume_quadrature(make_hyperbolic(1.0), 2.0, 8) ==
        doctest::Approx(2.0 * M_PI * std::sinh(2.0)).epsilon(1e-8));
}

TEST_CASE("gausswell sphere volume: refinement-stable, inside the envelope") {
  const MetricSpec spec = make_gausswell(0.1);  // Bounded(0.4)
  const double v16 = sphere_volume(spec, 2.0, 16);
  const double v32 = sphere_volume(spec, 2.0, 32);
  CHECK(std::abs(v32 - v16) <= 1e-8 * v32);
  // comparison bound: Vol S_p(r) <= 2 pi sinh(sqrt(K0) r)/sqrt(K0)
  const double s = std::sqrt(0.4);
  CHECK(v32 <= 2.0 * M_PI * std::sinh(s * 2.0) / s);
  CHECK(v32 >= 2.0 * M_PI * 2.0);  // and at least the flat value
}

TEST_CASE("poly-decay sphere volume grows at most linearly") {
  // canonical poly-decay parameter a = 0.2 (|K| <= 0.4 (1+r)^{-3})
  const MetricSpec spec = make_polydecay(0.2);
  std::vector<double> lr, lv;
  for (double r = 10.0; r <= 100.0; r *= 1.5) {
    lr.push_back(std::log(r));
    lv.push_back(std::log(sphere_volume(spec, r)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    mx += lr[i];
    my += lv[i];
  }
  mx /= lr.size();
  my /= lv.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    sxx += (lr[i] - mx) * (lr[i] - mx);
    sxy += (lr[i] - mx) * (lv[i] - my);
  }
  CHECK(sxy / sxx <= 1.05);
}
