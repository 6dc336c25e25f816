#pragma once

// Quadrature over SM_{p,r} and its boundary, the Pestov identity terms, the
// Pestov inequality for u^f, boundary-term decay scans and the cutoff
// convergence study.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "grt/calculus.hpp"
#include "grt/fields.hpp"
#include "grt/flows.hpp"
#include "grt/jacobi.hpp"

namespace grt {

struct SMNode {
  PhasePoint pp;
  double weight = 0.0;
  double alpha = 0.0;  // frame angle of v from the outward radial direction
};

struct SMQuadrature {
  double r = 0.0;
  int n_r = 0, n_theta = 0, n_alpha = 0;
  std::vector<SMNode> nodes;           // interior of SM_{p,r}
  std::vector<SMNode> boundary_nodes;  // over S_p(r) x S^1
  double ball_volume = 0.0;            // Vol_g M_{p,r}
  double sphere_volume = 0.0;          // Vol_g S_p(r)

  double total_weight() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight;
    return s;
  }
  double boundary_weight() const {
    double s = 0.0;
    for (const auto& n : boundary_nodes) s += n.weight;
    return s;
  }
};

namespace detail {

// Polar area density J_p(s): dV_g = J_p(s) ds dtheta in geodesic polar
// coordinates of metric radius s about the base point.
inline double polar_density(const MetricSpec& spec, double s) {
  if (spec.family() == MetricFamily::Warped) return spec.warp().f(s);
  if (!spec.potential().radial)
    throw std::domain_error("polar_density: conformal spec must be radial");
  const ChartPoint x = spec.point_at_distance(s, 0.0);
  const double rho = std::hypot(x.c0, x.c1);
  return rho * std::exp(spec.potential().phi({x.c0, x.c1}));
}

}  // namespace detail

// Gauss-Legendre in the metric radius, uniform grids in the two periodic
// angles; fiber angles use a half-step offset so no node is exactly radial.
inline SMQuadrature build_quadrature(const MetricSpec& spec, double r, int n_r,
                                     int n_theta, int n_alpha) {
  if (n_r < 4 || n_theta < 4 || n_alpha < 4)
    throw std::invalid_argument("build_quadrature: resolutions must be >= 4");
  SMQuadrature q;
  q.r = r;
  q.n_r = n_r;
  q.n_theta = n_theta;
  q.n_alpha = n_alpha;

  const auto gl = gauss_legendre(n_r, 0.0, r);
  const double w_theta = 2.0 * M_PI / n_theta;
  const double w_alpha = 2.0 * M_PI / n_alpha;

  for (int i = 0; i < n_r; ++i) {
    const double s = gl.nodes[i];
    const double dens = detail::polar_density(spec, s);
    q.ball_volume += gl.weights[i] * dens * 2.0 * M_PI;
    for (int j = 0; j < n_theta; ++j) {
      const double theta = w_theta * j;
      for (int k = 0; k < n_alpha; ++k) {
        const double alpha = w_alpha * (k + 0.5);
        SMNode node;
        node.pp = phase_point_polar(spec, s, theta, alpha);
        node.weight = gl.weights[i] * dens * w_theta * w_alpha;
        node.alpha = alpha;
        q.nodes.push_back(node);
      }
    }
  }

  const double bdens = detail::polar_density(spec, r);
  q.sphere_volume = 2.0 * M_PI * bdens;
  for (int j = 0; j < n_theta; ++j) {
    const double theta = w_theta * j;
    for (int k = 0; k < n_alpha; ++k) {
      const double alpha = w_alpha * (k + 0.5);
      SMNode node;
      node.pp = phase_point_polar(spec, r, theta, alpha);
      node.weight = bdens * w_theta * w_alpha;
      node.alpha = alpha;
      q.boundary_nodes.push_back(node);
    }
  }

  // sanity: quadrature weight must reproduce the SM volume it discretizes
  const double vol_sm = 2.0 * M_PI * q.ball_volume;
  if (std::abs(q.total_weight() - vol_sm) > 1e-6 * vol_sm)
    throw std::runtime_error("build_quadrature: weight sum check failed");
  return q;
}

// --- Pestov identity terms --------------------------------------------------

struct PestovReport {
  double vxu2 = 0.0;       // ||VXu||^2
  double xvu2 = 0.0;       // ||XVu||^2
  double xu2 = 0.0;        // ||Xu||^2
  double curv_term = 0.0;  // <K Vu, Vu>  (nonpositive when K <= 0)
  double b1 = 0.0;         // <<v,nu> Vu, Xperp u>_{boundary}
  double b2 = 0.0;         // <<v_perp,nu> Vu, Xu>_{boundary}
  double residual = 0.0;   // vxu2 - (xvu2 + xu2 - curv_term - b1 + b2)
  double scale = 0.0;      // max |term|, for relative residuals
  int n_r = 0, n_theta = 0, n_alpha = 0;

  double relative_residual() const {
    return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
  }
};

// Evaluates the identity
//   ||VXu||^2 = ||XVu||^2 + ||Xu||^2 - <KVu,Vu> - b1 + b2
// with every derivative taken by central finite differences along the flows.
inline PestovReport pestov_terms(const MetricSpec& spec, const SMFunction& u,
                                 const SMQuadrature& quad, double step,
                                 double flow_tol = 1e-10) {
  PestovReport rep;
  rep.n_r = quad.n_r;
  rep.n_theta = quad.n_theta;
  rep.n_alpha = quad.n_alpha;

  auto d1 = [&](const PhasePoint& pp, FlowOp op) {
    return flow_derivative(spec, u, pp, op, step, 2, flow_tol).value;
  };
  auto nested = [&](const PhasePoint& pp, FlowOp outer, FlowOp inner) {
    const PhasePoint qp = detail::apply_flow(spec, pp, outer, step, flow_tol);
    const PhasePoint qm = detail::apply_flow(spec, pp, outer, -step, flow_tol);
    return (d1(qp, inner) - d1(qm, inner)) / (2.0 * step);
  };

  for (const auto& node : quad.nodes) {
    const double xu = d1(node.pp, FlowOp::X);
    const double vu = d1(node.pp, FlowOp::V);
    const double vxu = nested(node.pp, FlowOp::V, FlowOp::X);
    const double xvu = nested(node.pp, FlowOp::X, FlowOp::V);
    const double K = spec.gaussian_curvature(node.pp.x);
    rep.vxu2 += node.weight * vxu * vxu;
    rep.xvu2 += node.weight * xvu * xvu;
    rep.xu2 += node.weight * xu * xu;
    rep.curv_term += node.weight * K * vu * vu;
  }
  for (const auto& node : quad.boundary_nodes) {
    const double vu = d1(node.pp, FlowOp::V);
    const double xu = d1(node.pp, FlowOp::X);
    const double xpu = d1(node.pp, FlowOp::Xperp);
    // nu is the outward radial direction; v sits at frame angle alpha from it
    const double v_nu = std::cos(node.alpha);
    const double vperp_nu = std::sin(node.alpha);  // <rho_{-pi/2} v, nu>
    rep.b1 += node.weight * v_nu * vu * xpu;
    rep.b2 += node.weight * vperp_nu * vu * xu;
  }
  rep.residual = rep.vxu2 - (rep.xvu2 + rep.xu2 - rep.curv_term - rep.b1 + rep.b2);
  rep.scale = std::max({std::abs(rep.vxu2), std::abs(rep.xvu2),
                        std::abs(rep.xu2), std::abs(rep.curv_term),
                        std::abs(rep.b1), std::abs(rep.b2)});
  return rep;
}

// --- Pestov inequality for u = u^f ---------------------------------------------

struct PestovInequalityReport {
  double lhs = 0.0;    // ||f||^2_{L^2(SM_{p,r})}
  double b1 = 0.0;
  double b2 = 0.0;
  double slack = 0.0;  // (b1 - b2) - lhs; >= 0 up to quadrature error
};

// For u = u^f the identity collapses (Xu = -f, VXu = 0) to
//   ||f||^2 = -||XVu||^2 + <KVu,Vu> + b1 - b2 <= b1 - b2   when K <= 0.
// Vu and Xperp u on the boundary come from the Jacobi pairing, which is exact
// up to quadrature; Xu = -f is used directly.
inline PestovInequalityReport pestov_inequality_check(
    const MetricSpec& spec, const ScalarField& f, const SMQuadrature& quad,
    const TruncationPolicy& policy = {}) {
  if (!f.has_gradient())
    throw std::domain_error("pestov_inequality_check: needs gradient");
  PestovInequalityReport rep;
  // ||f||^2 over SM_{p,r} = 2 pi * integral of f^2 over the ball; reuse the
  // base part of the interior nodes (f is independent of alpha).
  for (const auto& node : quad.nodes) {
    const double fv = f.eval(node.pp.x);
    rep.lhs += node.weight * fv * fv;
  }
  for (const auto& node : quad.boundary_nodes) {
    const double vu = jacobi_pairing(spec, f, node.pp, PairingKind::Jp, policy);
    const double xpu = jacobi_pairing(spec, f, node.pp, PairingKind::Jh, policy);
    const double xu = -f.eval(node.pp.x);
    rep.b1 += node.weight * std::cos(node.alpha) * vu * xpu;
    rep.b2 += node.weight * std::sin(node.alpha) * vu * xu;
  }
  rep.slack = (rep.b1 - rep.b2) - rep.lhs;
  return rep;
}

// --- boundary decay scan -----------------------------------------------------------

struct BoundaryScan {
  std::vector<double> radii;
  std::vector<double> b1_abs, b2_abs;      // full boundary integrals
  std::vector<double> b1_esc, b2_esc;      // escaping-hemisphere restriction
  double fitted_rate_b1 = 0.0;             // slope of log|b1_esc|
  double fitted_rate_b2 = 0.0;
};

// Boundary terms of the Pestov identity for u^f as functions of the ball
// radius. The fit runs over the escaping-hemisphere magnitudes: log vs r for
// exponential regimes (Thm1) and log vs log r for polynomial ones (Thm2).
inline BoundaryScan boundary_decay_scan(const MetricSpec& spec,
                                        const ScalarField& f,
                                        const std::vector<double>& radii,
                                        Regime regime, int n_theta = 16,
                                        int n_alpha = 32,
                                        const TruncationPolicy& policy = {}) {
  BoundaryScan scan;
  scan.radii = radii;
  const double w_theta = 2.0 * M_PI / n_theta;
  const double w_alpha = 2.0 * M_PI / n_alpha;
  for (double r : radii) {
    const double dens = detail::polar_density(spec, r);
    double b1 = 0.0, b2 = 0.0, b1e = 0.0, b2e = 0.0;
    for (int j = 0; j < n_theta; ++j) {
      for (int k = 0; k < n_alpha; ++k) {
        const double alpha = w_alpha * (k + 0.5);
        const PhasePoint pp = phase_point_polar(spec, r, w_theta * j, alpha);
        const double vu =
            jacobi_pairing(spec, f, pp, PairingKind::Jp, policy);
        const double xpu =
            jacobi_pairing(spec, f, pp, PairingKind::Jh, policy);
        const double xu = -f.eval(pp.x);
        const double w = dens * w_theta * w_alpha;
        const double t1 = w * std::cos(alpha) * vu * xpu;
        const double t2 = w * std::sin(alpha) * vu * xu;
        b1 += t1;
        b2 += t2;
        if (std::cos(alpha) >= 0.0) {  // escaping hemisphere
          b1e += std::abs(t1);
          b2e += std::abs(t2);
        }
      }
    }
    scan.b1_abs.push_back(std::abs(b1));
    scan.b2_abs.push_back(std::abs(b2));
    scan.b1_esc.push_back(b1e);
    scan.b2_esc.push_back(b2e);
  }
  auto fit = [&](const std::vector<double>& vals) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (vals[i] <= 0.0) continue;
      xs.push_back(regime == Regime::Thm1 ? radii[i] : std::log(radii[i]));
      ys.push_back(std::log(vals[i]));
    }
    if (xs.size() < 2) return -std::numeric_limits<double>::infinity();
    return detail::ls_slope(xs, ys);
  };
  scan.fitted_rate_b1 = fit(scan.b1_esc);
  scan.fitted_rate_b2 = fit(scan.b2_esc);
  return scan;
}

// --- cutoff convergence ------------------------------------------------------------

struct CutoffConvergence {
  std::vector<double> k_list;
  std::vector<double> sup_diff;  // sup over sampled SM_{p,r} of |Xperp u_k - Xperp u^f|
};

// Convergence of Xperp u_k (or V u_k with which = Jp) to the uncut flow
// derivative; the sup runs over a coarse sample of SM_{p,r}.
inline CutoffConvergence cutoff_convergence(const MetricSpec& spec,
                                            const ScalarField& f, double r,
                                            const std::vector<double>& k_list,
                                            PairingKind which = PairingKind::Jh,
                                            int n_theta = 4, int n_alpha = 8,
                                            const TruncationPolicy& policy = {}) {
  for (std::size_t i = 0; i + 1 < k_list.size(); ++i)
    if (k_list[i + 1] <= k_list[i])
      throw std::invalid_argument("cutoff_convergence: k_list must increase");
  if (!k_list.empty() && k_list.front() <= r)
    throw std::invalid_argument("cutoff_convergence: min(k) must exceed r");
  CutoffConvergence out;
  out.k_list = k_list;
  std::vector<PhasePoint> sample;
  for (int j = 0; j < n_theta; ++j)
    for (int k = 0; k < n_alpha; ++k)
      sample.push_back(phase_point_polar(spec, r, 2.0 * M_PI * j / n_theta,
                                         2.0 * M_PI * (k + 0.5) / n_alpha));
  std::vector<double> ref;
  ref.reserve(sample.size());
  for (const auto& pp : sample)
    ref.push_back(jacobi_pairing(spec, f, pp, which, policy));
  for (double k : k_list) {
    const ScalarField fk = cutoff_field(spec, CutoffFamily{k}, f);
    double sup = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
      sup = std::max(sup, std::abs(jacobi_pairing(spec, fk, sample[i], which,
                                                  policy) -
                                   ref[i]));
    out.sup_diff.push_back(sup);
  }
  return out;
}

}  // namespace grt
