#pragma once

// Geodesic ray transform and half-ray transform with decay-aware truncation,
// plus the decay certificates for u^f.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "grt/fields.hpp"
#include "grt/flows.hpp"
#include "grt/integrate.hpp"

namespace grt {

struct TruncationPolicy {
  double eps_tail = 1e-9;  // absolute truncation budget per half ray
  double t_max = 1e7;      // hard cap on the integration horizon
  bool split_at_min = true;
};

// Analytic remainder of the truncated transform: the tail of the decay bound
// integrated past T along an escaping geodesic whose closest approach to the
// base point is d_xp. Requires T >= 2 d_xp so the far-branch estimate applies.
inline double tail_bound(const DecaySpec& decay, double d_xp, double T) {
  if (T < 2.0 * d_xp)
    throw std::invalid_argument("tail_bound: requires T >= 2 d_xp");
  const double u = 1.0 + T - d_xp;
  if (decay.kind == DecayKind::Poly) {
    if (decay.eta <= 1.0)
      throw std::domain_error("tail_bound: poly decay needs eta > 1");
    return decay.c * std::pow(u, 1.0 - decay.eta) / (decay.eta - 1.0);
  }
  return decay.c * std::exp(-decay.eta * (T - d_xp)) / decay.eta;
}

// Smallest horizon T (measured from the closest-approach parameter) with
// tail_bound(decay, d_xp, T) <= eps.
inline double truncation_horizon(const DecaySpec& decay, double d_xp,
                                 double eps) {
  double T;
  if (decay.kind == DecayKind::Poly) {
    if (decay.eta <= 1.0)
      throw std::domain_error(
          "ray transform: poly decay with eta <= 1 and unbounded support");
    T = d_xp - 1.0 +
        std::pow(decay.c / ((decay.eta - 1.0) * eps), 1.0 / (decay.eta - 1.0));
  } else {
    T = d_xp + std::log(std::max(decay.c / (decay.eta * eps), 1.0)) / decay.eta;
  }
  return std::max(T, 2.0 * d_xp);
}

namespace detail {

// Integration horizon past the closest-approach parameter t_star for a field
// evaluated along the geodesic, using d(gamma(t_star + s), p) >= max(d_star,
// s - d_star).
inline double horizon_past_min(const ScalarField& f, double d_star, double eps,
                               double t_cap) {
  if (f.compactly_supported())
    return std::min(d_star + f.support_radius, t_cap);
  if (!f.decay)
    throw std::domain_error("ray transform: field carries no decay spec");
  return std::min(truncation_horizon(*f.decay, d_star, eps), t_cap);
}

// Adaptive quadrature of f(gamma(t)) over [a, b] (a <= b), tracing as needed.
inline double integrate_field_along(GeodesicPath& path, const ScalarField& f,
                                    double a, double b, double tol) {
  if (b <= a) return 0.0;
  path.extend_to(b);
  path.extend_back_to(a);
  auto integrand = [&](double t) { return f.eval(path.position(t)); };
  // split long ranges so the adaptive rule starts from panels it can resolve
  const double chunk = 64.0;
  if (b - a <= chunk) return integrate_adaptive(integrand, a, b, tol);
  double total = 0.0;
  int n_chunks = static_cast<int>(std::ceil((b - a) / chunk));
  // geometric chunking: early panels short, far tail panels long
  std::vector<double> cuts{a};
  double len = chunk, t = a;
  while (t + len < b) {
    t += len;
    cuts.push_back(t);
    len *= 2.0;
  }
  cuts.push_back(b);
  (void)n_chunks;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate_adaptive(integrand, cuts[i], cuts[i + 1],
                                tol / double(cuts.size() - 1));
  return total;
}

// Closest-approach parameter of the forward ray [0, inf): 0 when the geodesic
// is already escaping, the interior minimiser otherwise.
inline std::pair<double, double> forward_min(const MetricSpec& spec,
                                             const PhasePoint& pp) {
  if (spec.distance_to_base(pp.x) <= 1e-12) return {0.0, 0.0};
  const EscapeVerdict v = classify_escaping(spec, pp);
  if (v.escaping) return {0.0, spec.distance_to_base(pp.x)};
  auto [t_star, d_star] = min_distance_parameter(spec, pp);
  return {std::max(t_star, 0.0), d_star};
}

}  // namespace detail

// u^f(x,v) = int_0^inf f(gamma_{x,v}(t)) dt, truncated where the analytic
// tail bound drops below the policy budget.
inline double half_ray_transform(const MetricSpec& spec, const ScalarField& f,
                                 const PhasePoint& pp,
                                 const TruncationPolicy& policy = {}) {
  auto [t_star, d_star] = detail::forward_min(spec, pp);
  const double horizon =
      detail::horizon_past_min(f, d_star, policy.eps_tail, policy.t_max);
  const double t_end = t_star + horizon;
  if (t_end <= 0.0) return 0.0;
  if (f.compactly_supported() && d_star > f.support_radius) return 0.0;
  GeodesicPath path(spec, pp, std::min(t_end, 1.0));
  return detail::integrate_field_along(path, f, 0.0, t_end, policy.eps_tail);
}

// If(x,v) = int_{-inf}^inf f(gamma_{x,v}(t)) dt.
inline double ray_transform(const MetricSpec& spec, const ScalarField& f,
                            const PhasePoint& pp,
                            const TruncationPolicy& policy = {}) {
  double t_star = 0.0, d_star = spec.distance_to_base(pp.x);
  if (policy.split_at_min) {
    auto md = min_distance_parameter(spec, pp);
    t_star = md.first;
    d_star = md.second;
  }
  if (f.compactly_supported() && d_star > f.support_radius) return 0.0;
  const double horizon =
      detail::horizon_past_min(f, d_star, policy.eps_tail, policy.t_max);
  GeodesicPath path(spec, pp, 1.0);
  return detail::integrate_field_along(path, f, t_star - horizon,
                                       t_star + horizon, 2.0 * policy.eps_tail);
}

// --- decay certificates -------------------------------------------------------

struct DecayCertificate {
  std::vector<double> radii;
  std::vector<double> sup_values;   // sup over escaping directions at each radius
  double measured_exponent = 0.0;   // log-log slope (Poly) or log-linear (Exp)
  double max_constant = 0.0;        // sup of value / envelope
};

namespace detail {

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x,
                       const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace detail

// Measures sup |u^f| over escaping directions on circles of the given radii
// and fits the decay rate. Poly fields are fitted in log-log coordinates
// against (1+d); Exp fields are compared to the (1+d) e^{-eta d} envelope.
inline DecayCertificate uf_decay_certificate(const MetricSpec& spec,
                                             const ScalarField& f,
                                             const std::vector<double>& radii,
                                             int n_dirs,
                                             const TruncationPolicy& policy = {}) {
  if (!f.decay && !f.compactly_supported())
    throw std::domain_error("uf_decay_certificate: field needs decay data");
  DecayCertificate cert;
  cert.radii = radii;
  const int n_base = 8;
  for (double d : radii) {
    double sup = 0.0;
    for (int j = 0; j < n_base; ++j) {
      const double theta = 2.0 * M_PI * j / n_base;
      for (int k = 0; k < n_dirs; ++k) {
        // frame angles in (-pi/2, pi/2]: escaping directions only
        const double alpha = M_PI * (k + 0.5) / n_dirs - M_PI / 2.0;
        const PhasePoint pp = phase_point_polar(spec, d, theta, alpha);
        sup = std::max(sup, std::abs(half_ray_transform(spec, f, pp, policy)));
      }
    }
    cert.sup_values.push_back(sup);
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (cert.sup_values[i] <= 0.0) continue;
    ys.push_back(std::log(cert.sup_values[i]));
    xs.push_back(f.decay && f.decay->kind == DecayKind::Exp
                     ? radii[i]
                     : std::log1p(radii[i]));
  }
  if (xs.size() >= 2) cert.measured_exponent = detail::ls_slope(xs, ys);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    double env;
    if (f.decay && f.decay->kind == DecayKind::Exp)
      env = (1.0 + radii[i]) * std::exp(-f.decay->eta * radii[i]);
    else if (f.decay)
      env = std::pow(1.0 + radii[i], 1.0 - f.decay->eta);
    else
      env = 1.0;
    cert.max_constant = std::max(cert.max_constant, cert.sup_values[i] / env);
  }
  return cert;
}

// --- empirical class checks ----------------------------------------------------

struct InclusionReport {
  bool holds = true;
  double constant = 0.0;   // sup of |f| against the target envelope
  double witness_d = 0.0;  // radius of the worst ratio
};

// Samples |f| (or |grad f|_g) on a radial grid and checks boundedness against
// a target envelope. The bound "holds" when the ratio stops growing: its sup
// over the outer half of the grid must not exceed twice the sup over the
// inner half.
inline InclusionReport envelope_check(const MetricSpec& spec,
                                      const std::function<double(double)>& value_at,
                                      const DecaySpec& target, double d_max,
                                      int n = 200) {
  InclusionReport rep;
  double inner = 0.0, outer = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double d = d_max * i / n;
    const double env = target.kind == DecayKind::Poly
                           ? std::pow(1.0 + d, -target.eta)
                           : std::exp(-target.eta * d);
    const double ratio = std::abs(value_at(d)) / env;
    if (ratio > rep.constant) {
      rep.constant = ratio;
      rep.witness_d = d;
    }
    (i <= n / 2 ? inner : outer) = std::max(i <= n / 2 ? inner : outer, ratio);
  }
  rep.holds = outer <= 2.0 * std::max(inner, 1e-300);
  (void)spec;
  return rep;
}

inline InclusionReport class_inclusion_check(const MetricSpec& spec,
                                             const ScalarField& f,
                                             const DecaySpec& target,
                                             double d_max = 50.0) {
  auto value_at = [&](double d) {
    return f.eval(spec.point_at_distance(d, 0.0));
  };
  return envelope_check(spec, value_at, target, d_max);
}

inline InclusionReport gradient_class_check(const MetricSpec& spec,
                                            const ScalarField& f,
                                            const DecaySpec& grad_target,
                                            double d_max = 50.0) {
  if (!f.has_gradient())
    throw std::domain_error("gradient_class_check: field has no gradient");
  auto value_at = [&](double d) {
    const ChartPoint x = spec.point_at_distance(d, 0.0);
    return g_norm(spec, x, f.gradient(x));
  };
  return envelope_check(spec, value_at, grad_target, d_max);
}

// Least-squares fit of log sup|f| against both log(1+d) and d; returns the
// better model. A vanishing field yields a Poly spec with an infinite rate.
inline DecaySpec fit_decay(const MetricSpec& spec, const ScalarField& f,
                           const std::vector<double>& radii, int n_dirs = 8) {
  std::vector<double> lp, le, ly;
  for (double d : radii) {
    double sup = 0.0;
    for (int j = 0; j < n_dirs; ++j) {
      const double theta = 2.0 * M_PI * j / n_dirs;
      sup = std::max(sup, std::abs(f.eval(spec.point_at_distance(d, theta))));
    }
    if (sup <= 0.0) continue;
    lp.push_back(std::log1p(d));
    le.push_back(d);
    ly.push_back(std::log(sup));
  }
  if (ly.size() < 2)
    return DecaySpec{DecayKind::Poly, std::numeric_limits<double>::infinity(),
                     0.0, false};
  const double sp = detail::ls_slope(lp, ly);
  const double se = detail::ls_slope(le, ly);
  // residuals of the two one-parameter fits
  auto ss_res = [&](const std::vector<double>& x, double slope) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += ly[i];
    }
    mx /= x.size();
    my /= ly.size();
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = (ly[i] - my) - slope * (x[i] - mx);
      s += r * r;
    }
    return s;
  };
  if (ss_res(lp, sp) <= ss_res(le, se))
    return DecaySpec::poly(std::max(-sp, 1e-9), std::exp(ly[0] - sp * lp[0]));
  return DecaySpec::exp(std::max(-se, 1e-9), std::exp(ly[0] - se * le[0]));
}

}  // namespace grt
