#pragma once

// Finite-difference vector fields X, V, Xperp on functions over SM, the
// transport equation residual, structural (commutator) equations, the Jacobi
// pairing formulas for the flow derivatives of u^f, and derivative-decay
// certificates.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "grt/fields.hpp"
#include "grt/flows.hpp"
#include "grt/jacobi.hpp"
#include "grt/transform.hpp"

namespace grt {

struct SMFunction {
  std::string name;
  std::function<double(const PhasePoint&)> eval;
  double operator()(const PhasePoint& pp) const { return eval(pp); }
};

enum class FlowOp { X, V, Xperp };

// Step scaled by the local curvature length scale.
inline double default_step(const MetricSpec& spec, const PhasePoint& pp,
                           double base = 1e-4) {
  const double k = std::abs(spec.gaussian_curvature(pp.x));
  return base * std::max(1.0, 1.0 / std::sqrt(k + 1e-9));
}

namespace detail {

inline PhasePoint apply_flow(const MetricSpec& spec, const PhasePoint& pp,
                             FlowOp op, double s, double tol) {
  switch (op) {
    case FlowOp::X:
      return geodesic_flow(spec, pp, s, tol);
    case FlowOp::V:
      return vertical_flow(spec, pp, s);
    default:
      return horizontal_flow(spec, pp, s, tol);
  }
}

}  // namespace detail

struct DerivativeSample {
  PhasePoint pp;
  FlowOp op = FlowOp::X;
  double value = 0.0;
  double step = 0.0;
  int order = 2;
};

// Central difference of F along the flow of the given vector field.
inline DerivativeSample flow_derivative(const MetricSpec& spec,
                                        const SMFunction& F,
                                        const PhasePoint& pp, FlowOp op,
                                        double step, int order = 2,
                                        double flow_tol = 1e-10) {
  DerivativeSample out;
  out.pp = pp;
  out.op = op;
  out.step = step;
  out.order = order;
  auto at = [&](double s) {
    return F.eval(detail::apply_flow(spec, pp, op, s, flow_tol));
  };
  if (order == 4) {
    out.value = (-at(2.0 * step) + 8.0 * at(step) - 8.0 * at(-step) +
                 at(-2.0 * step)) /
                (12.0 * step);
  } else {
    out.value = (at(step) - at(-step)) / (2.0 * step);
  }
  return out;
}

// u^f as a function on SM.
inline SMFunction half_ray_function(const MetricSpec& spec,
                                    const ScalarField& f,
                                    const TruncationPolicy& policy = {}) {
  SMFunction F;
  F.name = "u^" + f.name;
  F.eval = [&spec, &f, policy](const PhasePoint& pp) {
    return half_ray_transform(spec, f, pp, policy);
  };
  return F;
}

// |X u^f(pp) + f(x)|; zero for all (x, v) by the transport equation.
inline double transport_residual(const MetricSpec& spec, const ScalarField& f,
                                 const PhasePoint& pp,
                                 const TruncationPolicy& policy = {},
                                 double step = 1e-4) {
  const SMFunction u = half_ray_function(spec, f, policy);
  const double xu = flow_derivative(spec, u, pp, FlowOp::X, step).value;
  return std::abs(xu + f.eval(pp.x));
}

// --- structural equations ------------------------------------------------------

struct StructuralResiduals {
  double xv = 0.0;     // [X,V]F - Xperp F
  double vxperp = 0.0; // [V,Xperp]F - X F
  double xxperp = 0.0; // [X,Xperp]F + K V F
};

// Evaluates the three commutators by nested central differences with a common
// step and subtracts the structural right-hand sides.
inline StructuralResiduals structural_residuals(const MetricSpec& spec,
                                                const SMFunction& F,
                                                const PhasePoint& pp,
                                                double step,
                                                double flow_tol = 1e-10) {
  auto d = [&](const PhasePoint& q, FlowOp op) {
    return flow_derivative(spec, F, q, op, step, 2, flow_tol).value;
  };
  auto commutator = [&](FlowOp a, FlowOp b) {
    // [A,B]F = A(BF) - B(AF), outer derivative also central
    auto outer = [&](FlowOp oa, FlowOp ob) {
      const PhasePoint qp = detail::apply_flow(spec, pp, oa, step, flow_tol);
      const PhasePoint qm = detail::apply_flow(spec, pp, oa, -step, flow_tol);
      return (d(qp, ob) - d(qm, ob)) / (2.0 * step);
    };
    return outer(a, b) - outer(b, a);
  };
  StructuralResiduals res;
  res.xv = commutator(FlowOp::X, FlowOp::V) -
           flow_derivative(spec, F, pp, FlowOp::Xperp, step, 2, flow_tol).value;
  res.vxperp = commutator(FlowOp::V, FlowOp::Xperp) -
               flow_derivative(spec, F, pp, FlowOp::X, step, 2, flow_tol).value;
  res.xxperp = commutator(FlowOp::X, FlowOp::Xperp) +
               spec.gaussian_curvature(pp.x) *
                   flow_derivative(spec, F, pp, FlowOp::V, step, 2, flow_tol).value;
  return res;
}

// --- Jacobi pairing for flow derivatives of u^f -----------------------------------

enum class PairingKind { Jh, Jp };

namespace detail {

// Inner product <grad f(gamma(t)), J(t) E(t)>_g in orthonormal frame
// components, where E = rho_{-pi/2} gamma'.
inline double pairing_integrand(const MetricSpec& spec, const ScalarField& f,
                                const GeodesicPath& path,
                                const JacobiSolution& sol, double sign,
                                double t) {
  const ChartPoint x = path.position(t);
  const Vec2 gf = frame_of_chart(spec, x, f.gradient(x));
  const Vec2 w = path.frame_velocity(t);
  const Vec2 e{w[1], -w[0]};  // clockwise quarter turn of the unit tangent
  return sign * sol.u(t) * (gf[0] * e[0] + gf[1] * e[1]);
}

// Decay spec of |grad f| for a field in the gradient decay class: one power
// better for polynomial decay, same rate for exponential decay; the constant
// picks up a factor eta.
inline DecaySpec gradient_decay(const DecaySpec& dec) {
  const double c = dec.c * std::max(1.0, dec.eta);
  return dec.kind == DecayKind::Poly ? DecaySpec::poly(dec.eta + 1.0, c, false)
                                     : DecaySpec::exp(dec.eta, c, false);
}

// Growth budget |u(t)| <= amp * (1 + t) * e^{lam t} for the scalar Jacobi
// solutions along the path, from a curvature probe over [0, probe_len].  If
// the Waltman moment int s|K(gamma(s))| ds has converged on the probe, the
// growth is linear with amplitude e^{2 M_K}; otherwise it is exponential with
// rate at most sqrt(sup |K|) over the far half of the probe.
struct JacobiGrowthBudget {
  double amp = 2.0;
  double lam = 0.0;
};

inline JacobiGrowthBudget probe_jacobi_growth(GeodesicPath& path,
                                              double probe_len) {
  if (probe_len <= 0.0) return {2.0, 0.0};
  path.extend_to(probe_len);
  const int n = 2048;
  double m_k = 0.0, m_mid = 0.0, m_far = 0.0, sup_far = 0.0, prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double s = probe_len * i / n;
    const double k_abs = std::abs(path.curvature(s));
    const double val = s * k_abs;
    const double inc = 0.5 * (prev + val) * (probe_len / n);
    m_k += inc;
    prev = val;
    if (4 * i > n && 2 * i <= n) m_mid += inc;
    if (2 * i > n) {
      m_far += inc;
      sup_far = std::max(sup_far, k_abs);
    }
  }
  // convergent Waltman moment <=> the dyadic masses of s |K| decay; for a
  // uniform curvature bound they grow ~ len^2 instead
  if (m_far <= 0.9 * m_mid + 1e-12)
    return {2.0 * std::exp(2.0 * m_k), 0.0};
  return {2.0, std::sqrt(sup_far)};
}

}  // namespace detail

// Xperp u^f (which = Jh) and V u^f (which = Jp) as convergent improper
// integrals along the forward geodesic, using the scalar Jacobi solutions.
inline double jacobi_pairing(const MetricSpec& spec, const ScalarField& f,
                             const PhasePoint& pp, PairingKind which,
                             const TruncationPolicy& policy = {}) {
  if (!f.has_gradient())
    throw std::domain_error("jacobi_pairing: field needs an analytic gradient");
  auto [t_star, d_star] = detail::forward_min(spec, pp);
  if (f.compactly_supported() && d_star > f.support_radius) return 0.0;
  const double h0 =
      detail::horizon_past_min(f, d_star, policy.eps_tail, policy.t_max);
  if (t_star + h0 <= 0.0) return 0.0;
  const double probe_len = std::min(t_star + h0, t_star + 400.0);
  GeodesicPath path(spec, pp, std::min(probe_len, 1.0));
  const auto budget = detail::probe_jacobi_growth(path, probe_len);

  // The integrand is |u(t)| |grad f|; pick the horizon from the gradient
  // decay and the probed growth budget.
  double T;
  if (f.compactly_supported()) {
    T = t_star + h0;
  } else {
    const DecaySpec gdec = detail::gradient_decay(*f.decay);
    if (budget.lam <= 1e-9) {
      // linear Jacobi growth: shrink eps by amp * (1 + T), two passes
      double h = detail::horizon_past_min(
          f, d_star, policy.eps_tail / budget.amp, policy.t_max);
      auto shrunk = [&](double hh) {
        return std::min(truncation_horizon(
                            gdec, d_star,
                            policy.eps_tail /
                                (budget.amp * (1.0 + t_star + hh))),
                        policy.t_max);
      };
      h = shrunk(std::min(h, policy.t_max));
      T = t_star + shrunk(h);
    } else {
      if (gdec.kind != DecayKind::Exp || gdec.eta <= budget.lam + 1e-9)
        throw std::domain_error(
            "jacobi_pairing: field decay does not beat the Jacobi growth "
            "rate; the pairing integral diverges");
      auto tail = [&](double h) {
        const double tt = t_star + h;
        return budget.amp * (1.0 + tt) * std::exp(budget.lam * tt) *
               tail_bound(gdec, d_star, std::max(h, 2.0 * d_star));
      };
      double lo = std::max(2.0 * d_star, 1.0), hi = lo;
      while (tail(hi) > policy.eps_tail && t_star + hi < policy.t_max)
        hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-6 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > policy.eps_tail ? lo : hi) = mid;
      }
      T = std::min(t_star + hi, policy.t_max);
    }
  }
  path.extend_to(T);
  const double c1 = which == PairingKind::Jh ? 1.0 : 0.0;
  const double c2 = which == PairingKind::Jh ? 0.0 : 1.0;
  JacobiSolution sol = solve_jacobi(spec, path, c1, c2, T, 1e-11);
  const double sign = which == PairingKind::Jh ? 1.0 : -1.0;
  auto integrand = [&](double t) {
    return detail::pairing_integrand(spec, f, path, sol, sign, t);
  };
  // same geometric chunking as the transform: resolve the near field first
  double total = 0.0;
  std::vector<double> cuts{0.0};
  double len = 16.0, t = 0.0;
  while (t + len < T) {
    t += len;
    cuts.push_back(t);
    len *= 2.0;
  }
  cuts.push_back(T);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate_adaptive(integrand, cuts[i], cuts[i + 1],
                                policy.eps_tail / double(cuts.size() - 1));
  return total;
}

// --- derivative decay certificate ----------------------------------------------

enum class Regime { Thm1, Thm2 };

struct DerivativeDecayReport {
  std::vector<double> radii;
  std::vector<double> sup_xperp, sup_v;
  double rate_xperp = 0.0;  // fitted decay rate (positive = decaying)
  double rate_v = 0.0;
  Regime regime = Regime::Thm1;
};

// sup over escaping directions of |Xperp u^f| and |V u^f| at each radius via
// the Jacobi pairing, with a least-squares decay fit: exponential in d for
// Thm1, polynomial in (1+d) for Thm2.
inline DerivativeDecayReport derivative_decay_certificate(
    const MetricSpec& spec, const ScalarField& f, Regime regime,
    const std::vector<double>& radii, int n_dirs,
    const TruncationPolicy& policy = {}) {
  if (!f.has_gradient())
    throw std::domain_error("derivative_decay_certificate: needs gradient");
  DerivativeDecayReport rep;
  rep.regime = regime;
  rep.radii = radii;
  const int n_base = 4;
  for (double d : radii) {
    double sx = 0.0, sv = 0.0;
    for (int j = 0; j < n_base; ++j) {
      const double theta = 2.0 * M_PI * j / n_base;
      for (int k = 0; k < n_dirs; ++k) {
        const double alpha = M_PI * (k + 0.5) / n_dirs - M_PI / 2.0;
        const PhasePoint pp = phase_point_polar(spec, d, theta, alpha);
        sx = std::max(sx, std::abs(jacobi_pairing(spec, f, pp,
                                                  PairingKind::Jh, policy)));
        sv = std::max(sv, std::abs(jacobi_pairing(spec, f, pp,
                                                  PairingKind::Jp, policy)));
      }
    }
    rep.sup_xperp.push_back(sx);
    rep.sup_v.push_back(sv);
  }
  auto fit = [&](const std::vector<double>& sup) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (sup[i] <= 0.0) continue;
      xs.push_back(regime == Regime::Thm1 ? radii[i] : std::log1p(radii[i]));
      ys.push_back(std::log(sup[i]));
    }
    if (xs.size() < 2) return std::numeric_limits<double>::infinity();
    return -detail::ls_slope(xs, ys);
  };
  rep.rate_xperp = fit(rep.sup_xperp);
  rep.rate_v = fit(rep.sup_v);
  return rep;
}

}  // namespace grt
