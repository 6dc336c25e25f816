#pragma once

// Geodesic flow, vertical and horizontal flows on the unit sphere bundle,
// and escaping-direction classification.
//
// Warped charts integrate the state (r, theta, v_r, w) where w = f(r) theta'
// is the angular velocity in the orthonormal frame {d_r, (1/f) d_theta}; this
// keeps every right-hand side bounded far from the pole where f(r) is huge.
// Conformal charts integrate plain chart coordinates and velocities.
//
// Orientation convention: the vertical flow rotates counterclockwise in the
// oriented orthonormal frame and the horizontal flow shoots along
// rotate(v, -pi/2). This is the unique combination for which the commutator
// [X,V] equals +X_perp on flat space (checked in the calculus tests).

#include <cmath>
#include <optional>
#include <stdexcept>

#include "grt/integrate.hpp"
#include "grt/metric.hpp"

namespace grt {

struct PhasePoint {
  ChartPoint x;
  Vec2 v;  // chart-basis tangent components, unit g-norm
};

// --- frame <-> chart tangent conversions -----------------------------------

inline Vec2 frame_of_chart(const MetricSpec& spec, const ChartPoint& x,
                           const Vec2& v) {
  if (spec.family() == MetricFamily::Warped)
    return {v[0], spec.warp().f(x.c0) * v[1]};
  const double ephi = std::exp(spec.potential().phi({x.c0, x.c1}));
  return {ephi * v[0], ephi * v[1]};
}

inline Vec2 chart_of_frame(const MetricSpec& spec, const ChartPoint& x,
                           const Vec2& a) {
  if (spec.family() == MetricFamily::Warped)
    return {a[0], a[1] / spec.warp().f(x.c0)};
  const double ephi = std::exp(-spec.potential().phi({x.c0, x.c1}));
  return {ephi * a[0], ephi * a[1]};
}

inline double g_norm(const MetricSpec& spec, const ChartPoint& x, const Vec2& v) {
  return norm2(frame_of_chart(spec, x, v));
}

inline double g_inner(const MetricSpec& spec, const ChartPoint& x,
                      const Vec2& v, const Vec2& w) {
  return dot(frame_of_chart(spec, x, v), frame_of_chart(spec, x, w));
}

inline PhasePoint make_phase_point(const MetricSpec& spec, const ChartPoint& x,
                                   const Vec2& direction) {
  Vec2 a = frame_of_chart(spec, x, direction);
  const double n = norm2(a);
  if (n <= 0.0) throw std::invalid_argument("make_phase_point: zero direction");
  return {x, chart_of_frame(spec, x, {a[0] / n, a[1] / n})};
}

// Phase point at metric distance d from p in radial direction theta, with the
// tangent at frame angle alpha measured from the outward radial direction.
inline PhasePoint phase_point_polar(const MetricSpec& spec, double d,
                                    double theta, double alpha) {
  const ChartPoint x = spec.point_at_distance(d, theta);
  Vec2 radial_frame;
  if (spec.family() == MetricFamily::Warped)
    radial_frame = {1.0, 0.0};
  else {
    const double rho = std::hypot(x.c0, x.c1);
    radial_frame = rho > 0 ? Vec2{x.c0 / rho, x.c1 / rho} : Vec2{1.0, 0.0};
  }
  // rotate the outward radial frame vector by alpha (ccw)
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  Vec2 a;
  if (spec.family() == MetricFamily::Warped)
    a = {ca, sa};
  else
    a = {ca * radial_frame[0] - sa * radial_frame[1],
         sa * radial_frame[0] + ca * radial_frame[1]};
  return {x, chart_of_frame(spec, x, a)};
}

inline PhasePoint rotate_tangent(const MetricSpec& spec, const PhasePoint& pp,
                                 double angle) {
  const Vec2 a = frame_of_chart(spec, pp.x, pp.v);
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec2 b{c * a[0] - s * a[1], s * a[0] + c * a[1]};
  return {pp.x, chart_of_frame(spec, pp.x, b)};
}

inline PhasePoint vertical_flow(const MetricSpec& spec, const PhasePoint& pp,
                                double s) {
  return rotate_tangent(spec, pp, s);
}

// --- geodesic paths ---------------------------------------------------------

namespace detail {

template <std::size_t N>
inline void geodesic_rhs(const MetricSpec& spec, const State<N>& y,
                         State<N>& dy) {
  static_assert(N == 4 || N == 6);
  if (spec.family() == MetricFamily::Warped) {
    const double r = y[0], vr = y[2], w = y[3];
    const double lof = spec.warp().df(r) / spec.warp().f(r);  // f'/f
    dy[0] = vr;
    dy[1] = w / spec.warp().f(r);
    dy[2] = lof * w * w;
    dy[3] = -lof * vr * w;
    if constexpr (N == 6) {
      const double omega = lof * w;  // frame rotation rate along the curve
      dy[4] = omega * y[5];
      dy[5] = -omega * y[4];
    }
  } else {
    const Vec2 x{y[0], y[1]}, v{y[2], y[3]};
    const Vec2 gp = spec.potential().grad(x);
    const double gv = dot(gp, v), vv = dot(v, v);
    dy[0] = v[0];
    dy[1] = v[1];
    dy[2] = -2.0 * gv * v[0] + vv * gp[0];
    dy[3] = -2.0 * gv * v[1] + vv * gp[1];
    if constexpr (N == 6) {
      const Vec2 P{y[4], y[5]};
      const double gP = dot(gp, P), vP = dot(v, P);
      dy[4] = -(gP * v[0] + gv * P[0] - vP * gp[0]);
      dy[5] = -(gP * v[1] + gv * P[1] - vP * gp[1]);
    }
  }
}

// Rescales the velocity part of the state to unit g-norm when the drift
// exceeds the budget.
template <std::size_t N>
inline void renormalize(const MetricSpec& spec, State<N>& y, double budget) {
  double n;
  if (spec.family() == MetricFamily::Warped)
    n = std::hypot(y[2], y[3]);
  else
    n = std::exp(spec.potential().phi({y[0], y[1]})) * std::hypot(y[2], y[3]);
  if (std::abs(n - 1.0) > budget) {
    y[2] /= n;
    y[3] /= n;
  }
}

}  // namespace detail

// Dense-output unit-speed geodesic through an origin phase point, extendable
// in both time directions. Exactly radial warped geodesics (zero Clairaut
// constant) are represented in closed form, pole crossing included.
class GeodesicPath {
 public:
  GeodesicPath(const MetricSpec& spec, const PhasePoint& origin, double T,
               double tol = 1e-9)
      : spec_(spec), origin_(origin) {
    opt_.rel_tol = tol;
    opt_.abs_tol = tol * 1e-3;
    opt_.initial_step = 1e-2;
    renorm_budget_ = tol / 10.0;

    if (spec.family() == MetricFamily::Warped) {
      const Vec2 a = frame_of_chart(spec, origin.x, origin.v);
      clairaut_ = spec.warp().f(origin.x.c0) * a[1];
      radial_ = std::abs(a[1]) <= 1e-13;
      y0_ = {origin.x.c0, origin.x.c1, a[0], radial_ ? 0.0 : a[1]};
    } else {
      y0_ = {origin.x.c0, origin.x.c1, origin.v[0], origin.v[1]};
      radial_ = false;
    }
    extend_to(T);
  }

  // defined before first use so the auto return types deduce in-class
 private:
  auto rhs() const {
    return [this](double, const State<4>& y, State<4>& dy) {
      detail::geodesic_rhs<4>(spec_, y, dy);
    };
  }
  auto post() const {
    return [this](double, State<4>& y) {
      detail::renormalize(spec_, y, renorm_budget_);
    };
  }

 public:
  const MetricSpec& spec() const { return spec_; }
  const PhasePoint& origin() const { return origin_; }
  double clairaut() const { return clairaut_; }
  bool radial() const { return radial_; }
  double t_max() const { return radial_ ? 1e300 : (fwd_.empty() ? 0.0 : fwd_.t_end()); }
  double t_min() const { return radial_ ? -1e300 : (bwd_.empty() ? 0.0 : -bwd_.t_end()); }

  void extend_to(double T) {
    if (radial_ || T <= 0.0) return;
    if (fwd_.empty()) {
      fwd_.append(integrate_dense<4>(rhs(), 0.0, y0_, T, opt_, post()));
    } else if (fwd_.t_end() < T - 1e-13 * std::max(1.0, std::abs(T))) {
      State<4> y = fwd_.eval(fwd_.t_end());
      detail::renormalize(spec_, y, 0.0);
      fwd_.append(integrate_dense<4>(rhs(), fwd_.t_end(), y, T, opt_, post()));
    }
  }

  void extend_back_to(double T_neg) {
    if (radial_ || T_neg >= 0.0) return;
    // trace the reversed geodesic (x, -v) forward in tau = -t
    if (bwd_.empty()) {
      State<4> y = y0_;
      y[2] = -y[2];
      y[3] = -y[3];
      bwd_.append(integrate_dense<4>(rhs(), 0.0, y, -T_neg, opt_, post()));
    } else if (bwd_.t_end() < -T_neg - 1e-13 * std::max(1.0, std::abs(T_neg))) {
      State<4> y = bwd_.eval(bwd_.t_end());
      detail::renormalize(spec_, y, 0.0);
      bwd_.append(integrate_dense<4>(rhs(), bwd_.t_end(), y, -T_neg, opt_, post()));
    }
  }

  // Raw state at time t; for t < 0 the backward trajectory with velocity
  // signs restored.
  State<4> state(double t) const {
    if (radial_) return radial_state(t);
    if (t >= 0.0) {
      if (fwd_.empty() ||
          t > fwd_.t_end() + 1e-12 * std::max(1.0, std::abs(t)))
        throw std::out_of_range("GeodesicPath: t beyond traced range");
      return fwd_.eval(t);
    }
    if (bwd_.empty() ||
        -t > bwd_.t_end() + 1e-12 * std::max(1.0, std::abs(t)))
      throw std::out_of_range("GeodesicPath: t beyond traced range (backward)");
    State<4> y = bwd_.eval(-t);
    y[2] = -y[2];
    y[3] = -y[3];
    return y;
  }

  ChartPoint position(double t) const {
    const State<4> y = state(t);
    return {y[0], y[1]};
  }

  PhasePoint phase_point(double t) const {
    const State<4> y = state(t);
    if (spec_.family() == MetricFamily::Warped)
      return {{y[0], y[1]}, chart_of_frame(spec_, {y[0], y[1]}, {y[2], y[3]})};
    return {{y[0], y[1]}, {y[2], y[3]}};
  }

  // Velocity components in the orthonormal frame (radial, tangential).
  Vec2 frame_velocity(double t) const {
    const State<4> y = state(t);
    if (spec_.family() == MetricFamily::Warped) return {y[2], y[3]};
    const double ephi = std::exp(spec_.potential().phi({y[0], y[1]}));
    return {ephi * y[2], ephi * y[3]};
  }

  double distance_to_base(double t) const {
    const State<4> y = state(t);
    if (spec_.family() == MetricFamily::Warped) return y[0];
    return spec_.distance_to_base({y[0], y[1]});
  }

  double curvature(double t) const {
    return spec_.gaussian_curvature(position(t));
  }

  double unit_speed_error(double t) const {
    return std::abs(norm2(frame_velocity(t)) - 1.0);
  }

 private:
  State<4> radial_state(double t) const {
    // signed position along the line through the pole
    const double rho = y0_[0] + y0_[2] * t;
    if (rho >= 0.0) return {rho, y0_[1], y0_[2], 0.0};
    return {-rho, y0_[1] + M_PI, -y0_[2], 0.0};
  }

  MetricSpec spec_;
  PhasePoint origin_;
  OdeOptions opt_;
  double renorm_budget_ = 1e-10;
  State<4> y0_{};
  double clairaut_ = 0.0;
  bool radial_ = false;
  DenseTrajectory<4> fwd_, bwd_;
};

inline GeodesicPath geodesic_trace(const MetricSpec& spec, const PhasePoint& pp,
                                   double T, double tol = 1e-9) {
  return GeodesicPath(spec, pp, T, tol);
}

// Geodesic flow: phi_t(x, v).
inline PhasePoint geodesic_flow(const MetricSpec& spec, const PhasePoint& pp,
                                double t, double tol = 1e-9) {
  if (t == 0.0) return pp;
  GeodesicPath path(spec, pp, std::max(t, 1e-12), tol);
  if (t < 0.0) path.extend_back_to(t);
  return path.phase_point(t);
}

// Horizontal flow: moves the base point along the geodesic in direction
// rotate(v, -pi/2) and parallel-transports v alongside.
inline PhasePoint horizontal_flow(const MetricSpec& spec, const PhasePoint& pp,
                                  double s, double tol = 1e-9) {
  if (s == 0.0) return pp;
  const PhasePoint perp = rotate_tangent(spec, pp, -M_PI / 2.0);

  OdeOptions opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol * 1e-3;
  opt.initial_step = 1e-2;

  State<6> y0;
  if (spec.family() == MetricFamily::Warped) {
    const Vec2 a = frame_of_chart(spec, perp.x, perp.v);
    const Vec2 pv = frame_of_chart(spec, pp.x, pp.v);
    y0 = {perp.x.c0, perp.x.c1, a[0], a[1], pv[0], pv[1]};
  } else {
    y0 = {perp.x.c0, perp.x.c1, perp.v[0], perp.v[1], pp.v[0], pp.v[1]};
  }

  const double dir = s > 0 ? 1.0 : -1.0;
  if (dir < 0) {
    y0[2] = -y0[2];
    y0[3] = -y0[3];
  }
  auto rhs = [&](double, const State<6>& y, State<6>& dy) {
    detail::geodesic_rhs<6>(spec, y, dy);
  };
  auto steps = integrate_dense<6>(rhs, 0.0, y0, std::abs(s), opt,
                                  [&](double, State<6>& y) {
                                    detail::renormalize(spec, y, tol / 10.0);
                                  });
  const State<6> y = steps.back().eval(std::abs(s));
  const ChartPoint x{y[0], y[1]};
  Vec2 v;
  if (spec.family() == MetricFamily::Warped)
    v = chart_of_frame(spec, x, {y[4], y[5]});
  else
    v = {y[4], y[5]};
  // transported vector stays unit by isometry; trim integration drift
  return make_phase_point(spec, x, v);
}

// --- escaping classification ------------------------------------------------

struct EscapeVerdict {
  bool escaping = false;
  bool tangency = false;
  double derivative_at_zero = 0.0;  // d/dt d(gamma(t),p)^2 at t = 0
};

// Unit gradient of d(., p) at x, in chart components.
inline Vec2 distance_gradient(const MetricSpec& spec, const ChartPoint& x) {
  if (spec.family() == MetricFamily::Warped) return {1.0, 0.0};
  const double rho = std::hypot(x.c0, x.c1);
  if (rho == 0.0) throw std::domain_error("distance_gradient: base point");
  const double ephi = std::exp(-spec.potential().phi({x.c0, x.c1}));
  return {ephi * x.c0 / rho, ephi * x.c1 / rho};
}

inline EscapeVerdict classify_escaping(const MetricSpec& spec,
                                       const PhasePoint& pp) {
  const double d = spec.distance_to_base(pp.x);
  if (d <= 1e-14)
    throw std::domain_error("classify_escaping: x coincides with base point");
  const double inner = g_inner(spec, pp.x, pp.v, distance_gradient(spec, pp.x));
  EscapeVerdict v;
  v.derivative_at_zero = 2.0 * d * inner;
  v.escaping = v.derivative_at_zero >= -1e-10;
  v.tangency = std::abs(v.derivative_at_zero) <= 1e-10;
  return v;
}

// Unique minimiser of t -> d(gamma(t), p), golden-section on the convex
// distance with geometrically expanded bracket.
inline std::pair<double, double> min_distance_parameter(const MetricSpec& spec,
                                                        const PhasePoint& pp,
                                                        double tol = 1e-9) {
  GeodesicPath path(spec, pp, 1.0);
  auto dist = [&](double t) {
    if (t > 0) path.extend_to(t);
    if (t < 0) path.extend_back_to(t);
    return path.distance_to_base(t);
  };
  const double d0 = dist(0.0);
  double a = -1.0, b = 1.0;
  double da = dist(a), db = dist(b);
  // expand until the middle value is not above both ends
  for (int it = 0; da < d0 || db < d0; ++it) {
    if (it > 60) throw std::runtime_error("min_distance_parameter: bracket overflow");
    if (da < d0) {
      a *= 2.0;
      da = dist(a);
    }
    if (db < d0) {
      b *= 2.0;
      db = dist(b);
    }
  }
  const double t_star = golden_section_min(dist, a, b, tol);
  return {t_star, dist(t_star)};
}

// --- distance lower bounds --------------------------------------------------

enum class FlowKind { Geodesic, HFlow, VFlow };

// Piecewise lower bound for d(gamma(t), p) along escaping geodesics and their
// flow perturbations.
inline double distance_lower_bound(FlowKind kind, double d_xp, double s,
                                   double t) {
  if (t < 0.0 || s < 0.0)
    throw std::invalid_argument("distance_lower_bound: t, s must be >= 0");
  const double shift = kind == FlowKind::HFlow ? s : 0.0;
  if (t <= 2.0 * d_xp) return d_xp - shift;
  return t - d_xp - shift;
}

}  // namespace grt
