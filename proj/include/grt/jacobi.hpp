#pragma once

// Scalar Jacobi equation u'' + K(gamma(t)) u = 0 along geodesics: dense
// solutions, comparison envelopes, Waltman-type linear growth certificates,
// and geodesic sphere volumes in polar coordinates.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "grt/flows.hpp"
#include "grt/integrate.hpp"
#include "grt/metric.hpp"

namespace grt {

enum class JacobiKind { Jh, Jp, Custom };

struct JacobiSolution {
  JacobiKind kind = JacobiKind::Custom;
  double c1 = 0.0, c2 = 0.0;  // u(0), u'(0)
  DenseTrajectory<2> traj;
  std::vector<double> grid;
  std::vector<double> u_vals, du_vals;

  double u(double t) const { return traj.eval(t)[0]; }
  double du(double t) const { return traj.eval(t)[1]; }
  double t_end() const { return grid.empty() ? 0.0 : grid.back(); }
};

inline JacobiKind jacobi_kind_of(double c1, double c2) {
  if (c1 == 1.0 && c2 == 0.0) return JacobiKind::Jh;
  if (c1 == 0.0 && c2 == 1.0) return JacobiKind::Jp;
  return JacobiKind::Custom;
}

// Solves u'' + K(t) u = 0 for an arbitrary curvature profile along [0, T].
inline JacobiSolution solve_jacobi_profile(
    const std::function<double(double)>& K, double c1, double c2, double T,
    double tol = 1e-10) {
  JacobiSolution sol;
  sol.kind = jacobi_kind_of(c1, c2);
  sol.c1 = c1;
  sol.c2 = c2;
  OdeOptions opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol * 1e-2;
  auto rhs = [&K](double t, const State<2>& y, State<2>& dy) {
    dy[0] = y[1];
    dy[1] = -K(t) * y[0];
  };
  auto steps = integrate_dense<2>(rhs, 0.0, State<2>{c1, c2}, T, opt);
  for (const auto& step : steps) {
    const double t1 = step.t0 + step.h;
    const State<2> y1 = step.eval(t1);
    sol.grid.push_back(t1);
    sol.u_vals.push_back(y1[0]);
    sol.du_vals.push_back(y1[1]);
  }
  sol.traj.append(std::move(steps));
  return sol;
}

inline JacobiSolution solve_jacobi(const MetricSpec& spec, GeodesicPath& path,
                                   double c1, double c2, double T,
                                   double tol = 1e-10) {
  path.extend_to(T);
  (void)spec;
  return solve_jacobi_profile([&path](double t) { return path.curvature(t); },
                              c1, c2, T, tol);
}

// Wronskian u1 u2' - u1' u2 at time t; constant along a common geodesic.
inline double wronskian(const JacobiSolution& a, const JacobiSolution& b,
                        double t) {
  return a.u(t) * b.du(t) - a.du(t) * b.u(t);
}

// --- comparison envelopes --------------------------------------------------

// Constant-curvature K = -K0 solution with the same initial data.
inline double comparison_envelope(double c1, double c2, double k0, double t) {
  if (k0 <= 0.0) return std::abs(c1) + std::abs(c2) * t;
  const double s = std::sqrt(k0);
  return std::abs(c1) * std::cosh(s * t) + std::abs(c2) * std::sinh(s * t) / s;
}

struct EnvelopeReport {
  double max_ratio = 0.0;
  double argmax_t = 0.0;
};

// sup_t |u(t)| / env(t) over the solution's grid; <= 1 certifies the
// exponential comparison bound on Bounded(K0) specs.
inline EnvelopeReport exponential_envelope(const JacobiSolution& sol,
                                           double k0, int n_eval = 2000) {
  EnvelopeReport rep;
  const double T = sol.t_end();
  for (int i = 1; i <= n_eval; ++i) {
    const double t = T * i / n_eval;
    const double env = comparison_envelope(sol.c1, sol.c2, k0, t);
    if (env <= 0.0) continue;
    const double ratio = std::abs(sol.u(t)) / env;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.argmax_t = t;
    }
  }
  return rep;
}

// --- Waltman linear growth certificate ---------------------------------------

struct GrowthCertificate {
  double k0 = 0.0;      // pointwise curvature bound used for the t <= 1 leg
  double m_k = 0.0;     // first moment of |K| along the geodesic, with tail
  double v1_norm = 0.0; // |u'(1)| + |u(1) - u'(1)|
  double c1 = 0.0;      // e^{2 M_K} v1_norm
  double c2 = 0.0;      // envelope value at t0 = 1 times e^{sqrt(K0)}

  double bound(double t) const { return c1 * t + c2; }
};

// Analytic tail of int_T^inf s |K(gamma(s))| ds under a PolyDecay class,
// using d(gamma(s), p) >= s - d_xp for s >= 2 d_xp.
inline double moment_tail(const CurvatureClass& cls, double d_xp, double T) {
  if (cls.kind != CurvatureKind::PolyDecay)
    throw std::domain_error("moment_tail: needs a PolyDecay class");
  if (T < 2.0 * d_xp)
    throw std::invalid_argument("moment_tail: requires T >= 2 d_xp");
  const double et = cls.eta_tilde;
  const double u = 1.0 + T - d_xp;
  return cls.c * (std::pow(u, 2.0 - et) / (et - 2.0) +
                  (d_xp - 1.0) * std::pow(u, 1.0 - et) / (et - 1.0));
}

// Builds the linear growth certificate |u(t)| <= C1 t + C2 for an escaping
// geodesic on a spec with polynomially decaying curvature. The curvature
// moment is integrated out to a finite horizon and closed with the analytic
// class tail, so M_K is always an upper bound.
inline GrowthCertificate waltman_certificate(const MetricSpec& spec,
                                             const CurvatureClass& cls,
                                             GeodesicPath& path, double c1,
                                             double c2, double t0 = 1.0) {
  if (cls.kind != CurvatureKind::PolyDecay)
    throw std::domain_error("waltman_certificate: needs a PolyDecay class");
  const EscapeVerdict v = classify_escaping(spec, path.origin());
  if (!v.escaping)
    throw std::domain_error("waltman_certificate: geodesic is not escaping");
  const double d_xp = spec.distance_to_base(path.origin().x);
  const double horizon = std::max(2.0 * d_xp, 200.0);
  path.extend_to(horizon);

  GrowthCertificate cert;
  cert.k0 = cls.c;  // (1+d)^{-eta} <= 1, so |K| <= C pointwise
  cert.m_k = integrate_adaptive(
                 [&](double s) { return s * std::abs(path.curvature(s)); }, 0.0,
                 horizon, 1e-11) +
             moment_tail(cls, d_xp, horizon);

  JacobiSolution sol = solve_jacobi(spec, path, c1, c2, t0, 1e-11);
  cert.v1_norm = std::abs(sol.du(t0)) + std::abs(sol.u(t0) - t0 * sol.du(t0));
  cert.c1 = std::exp(2.0 * cert.m_k) * cert.v1_norm;
  cert.c2 =
      comparison_envelope(c1, c2, cert.k0, t0) * std::exp(std::sqrt(cert.k0));
  return cert;
}

// --- geodesic sphere volume -----------------------------------------------------

// |J_p(r)| along the radial geodesic launched from the base point in chart
// direction theta. For warped charts this is f(r) exactly; the ODE route is
// kept for cross-checks and for conformal charts, where the pole is a regular
// chart point.
inline double radial_jacobi_value(const MetricSpec& spec, double theta,
                                  double r, double tol = 1e-10) {
  if (spec.family() == MetricFamily::Warped) {
    auto K = [&spec, theta](double t) {
      return spec.gaussian_curvature({t, theta});
    };
    return std::abs(solve_jacobi_profile(K, 0.0, 1.0, r, tol).u(r));
  }
  const ChartPoint origin{0.0, 0.0};
  const Vec2 dir{std::cos(theta), std::sin(theta)};
  const PhasePoint pp = make_phase_point(spec, origin, dir);
  GeodesicPath path(spec, pp, r);
  JacobiSolution sol =
      solve_jacobi_profile([&path](double t) { return path.curvature(t); }, 0.0,
                           1.0, r, tol);
  return std::abs(sol.u(r));
}

// Trapezoid rule over theta of |J_p(r; theta)|; periodic, so the composite
// rule is just the mean times 2 pi.
inline double sphere_volume_quadrature(const MetricSpec& spec, double r,
                                       int n_theta = 64) {
  if (r <= 0.0) throw std::invalid_argument("sphere_volume: r must be > 0");
  double sum = 0.0;
  for (int j = 0; j < n_theta; ++j)
    sum += radial_jacobi_value(spec, 2.0 * M_PI * j / n_theta, r);
  return 2.0 * M_PI * sum / n_theta;
}

// Vol S_p(r). Warped charts use the closed form 2 pi f(r).
inline double sphere_volume(const MetricSpec& spec, double r,
                            int n_theta = 64) {
  if (r <= 0.0) throw std::invalid_argument("sphere_volume: r must be > 0");
  if (spec.family() == MetricFamily::Warped) return 2.0 * M_PI * spec.warp().f(r);
  return sphere_volume_quadrature(spec, r, n_theta);
}

}  // namespace grt
