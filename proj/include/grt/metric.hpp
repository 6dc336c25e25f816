#pragma once

// Metric families on a global plane chart: rotationally symmetric warped
// products dr^2 + f(r)^2 dtheta^2 and conformal metrics e^{2 phi} (dx^2+dy^2),
// with closed-form curvature, Christoffel symbols and distance to a fixed
// base point.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "grt/integrate.hpp"

namespace grt {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline double dot(const Vec2& a, const Vec2& b) {
  return a[0] * b[0] + a[1] * b[1];
}
inline double norm2(const Vec2& a) { return std::sqrt(dot(a, a)); }

struct ChartPoint {
  // (r, theta) for warped charts, (x, y) for conformal charts.
  double c0 = 0.0;
  double c1 = 0.0;
};

enum class MetricFamily { Warped, Conformal };

// Radial warp profile f with closed-form derivatives. f(0)=0, f'(0)=1 and
// f'' >= 0 keep the curvature K = -f''/f non-positive and the pole smooth.
struct WarpProfile {
  std::string name;
  std::function<double(double)> f, df, ddf;
  double curvature_at_pole = 0.0;  // lim_{r->0} -f''(r)/f(r)
};

// Conformal potential phi with gradient and Laplacian. Radial profiles set
// `radial` and supply phi as a function of the chart radius, which enables
// the closed-form distance along straight radial geodesics.
struct ConformalPotential {
  std::string name;
  std::function<double(const Vec2&)> phi;
  std::function<Vec2(const Vec2&)> grad;  // partial derivatives of phi
  std::function<double(const Vec2&)> laplacian;
  bool radial = false;
  std::function<double(double)> phi_of_rho;  // only when radial
};

enum class CurvatureKind { Bounded, PolyDecay };

struct CurvatureClass {
  CurvatureKind kind = CurvatureKind::Bounded;
  double k0 = 0.0;       // Bounded: |K| <= k0
  double eta_tilde = 0;  // PolyDecay: |K| <= c (1+d)^-eta_tilde
  double c = 0.0;

  static CurvatureClass bounded(double k0) {
    return {CurvatureKind::Bounded, k0, 0.0, 0.0};
  }
  static CurvatureClass poly(double eta_tilde, double c) {
    if (eta_tilde <= 2.0)
      throw std::invalid_argument("CurvatureClass::poly: eta_tilde must be > 2");
    return {CurvatureKind::PolyDecay, 0.0, eta_tilde, c};
  }
};

class MetricSpec {
 public:
  static MetricSpec warped(WarpProfile profile) {
    MetricSpec s;
    s.family_ = MetricFamily::Warped;
    s.warp_ = std::make_shared<WarpProfile>(std::move(profile));
    return s;
  }
  static MetricSpec conformal(ConformalPotential potential) {
    MetricSpec s;
    s.family_ = MetricFamily::Conformal;
    s.conf_ = std::make_shared<ConformalPotential>(std::move(potential));
    return s;
  }

  MetricFamily family() const { return family_; }
  const WarpProfile& warp() const { return *warp_; }
  const ConformalPotential& potential() const { return *conf_; }
  const std::string& name() const {
    return family_ == MetricFamily::Warped ? warp_->name : conf_->name;
  }

  // The base point p sits at the pole (warped) or the chart origin
  // (conformal) for every built-in spec.

  Mat2 metric_tensor(const ChartPoint& x) const {
    if (family_ == MetricFamily::Warped) {
      if (x.c0 <= 0.0)
        throw std::domain_error("metric_tensor: warped chart pole");
      const double fr = warp_->f(x.c0);
      return {{{1.0, 0.0}, {0.0, fr * fr}}};
    }
    const double e2 = std::exp(2.0 * conf_->phi({x.c0, x.c1}));
    return {{{e2, 0.0}, {0.0, e2}}};
  }

  double gaussian_curvature(const ChartPoint& x) const {
    if (family_ == MetricFamily::Warped) {
      const double r = x.c0;
      if (r < pole_guard) return warp_->curvature_at_pole;
      return -warp_->ddf(r) / warp_->f(r);
    }
    const Vec2 p{x.c0, x.c1};
    return -std::exp(-2.0 * conf_->phi(p)) * conf_->laplacian(p);
  }

  // christoffel(x)[k][i][j] = Gamma^k_{ij} in the chart basis.
  std::array<Mat2, 2> christoffel(const ChartPoint& x) const {
    std::array<Mat2, 2> g{};
    if (family_ == MetricFamily::Warped) {
      const double r = x.c0;
      if (r <= 0.0) throw std::domain_error("christoffel: warped chart pole");
      const double fr = warp_->f(r), dfr = warp_->df(r);
      g[0][1][1] = -fr * dfr;          // Gamma^r_{theta theta}
      g[1][0][1] = g[1][1][0] = dfr / fr;  // Gamma^theta_{r theta}
      return g;
    }
    const Vec2 p{x.c0, x.c1};
    const Vec2 d = conf_->grad(p);
    // Gamma^k_ij = delta^k_i phi_j + delta^k_j phi_i - delta_ij phi_k
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          g[k][i][j] = (k == i ? d[j] : 0.0) + (k == j ? d[i] : 0.0) -
                       (i == j ? d[k] : 0.0);
    return g;
  }

  double distance_to_base(const ChartPoint& x) const {
    if (family_ == MetricFamily::Warped) return x.c0;
    const double rho = std::hypot(x.c0, x.c1);
    if (conf_->radial) return radial_distance(rho);
    throw std::runtime_error(
        "distance_to_base: non-radial conformal potentials need shooting; "
        "none are built in");
  }

  // Arclength from the origin along the straight radial ray, which is a
  // geodesic whenever the conformal factor is radial.
  double radial_distance(double rho) const {
    if (!conf_ || !conf_->radial)
      throw std::logic_error("radial_distance: potential is not radial");
    if (rho == 0.0) return 0.0;
    return integrate_adaptive(
        [&](double s) { return std::exp(conf_->phi_of_rho(s)); }, 0.0, rho,
        1e-12 * std::max(1.0, rho));
  }

  // Inverse of radial_distance: chart radius at metric distance d.
  double chart_radius_at_distance(double d) const {
    if (family_ == MetricFamily::Warped) return d;
    if (d <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (radial_distance(hi) < d) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw std::runtime_error("chart_radius_at_distance: overflow");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (radial_distance(mid) < d)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
  }

  // Chart point at metric distance d from the base point in direction theta.
  ChartPoint point_at_distance(double d, double theta) const {
    if (family_ == MetricFamily::Warped) return {d, theta};
    const double rho = chart_radius_at_distance(d);
    return {rho * std::cos(theta), rho * std::sin(theta)};
  }

  static constexpr double pole_guard = 1e-9;

 private:
  MetricFamily family_ = MetricFamily::Warped;
  std::shared_ptr<const WarpProfile> warp_;
  std::shared_ptr<const ConformalPotential> conf_;
};

// ---------------------------------------------------------------------------
// Built-in spec registry.
// ---------------------------------------------------------------------------

// Flat metric in the conformal (Cartesian) chart.
inline MetricSpec make_euclidean() {
  ConformalPotential p;
  p.name = "euclidean";
  p.phi = [](const Vec2&) { return 0.0; };
  p.grad = [](const Vec2&) { return Vec2{0.0, 0.0}; };
  p.laplacian = [](const Vec2&) { return 0.0; };
  p.radial = true;
  p.phi_of_rho = [](double) { return 0.0; };
  return MetricSpec::conformal(std::move(p));
}

// Flat metric in the warped (polar) chart, f(r) = r.
inline MetricSpec make_flat_polar() {
  WarpProfile w;
  w.name = "flat_polar";
  w.f = [](double r) { return r; };
  w.df = [](double) { return 1.0; };
  w.ddf = [](double) { return 0.0; };
  w.curvature_at_pole = 0.0;
  return MetricSpec::warped(std::move(w));
}

// Constant curvature -k, f(r) = sinh(sqrt(k) r)/sqrt(k).
inline MetricSpec make_hyperbolic(double k) {
  if (k <= 0.0) throw std::invalid_argument("make_hyperbolic: k must be > 0");
  WarpProfile w;
  const double s = std::sqrt(k);
  w.name = "hyperbolic";
  w.f = [s](double r) { return std::sinh(s * r) / s; };
  w.df = [s](double r) { return std::cosh(s * r); };
  w.ddf = [s](double r) { return s * std::sinh(s * r); };
  w.curvature_at_pole = -k;
  return MetricSpec::warped(std::move(w));
}

// Polynomially decaying curvature, |K| <= 2a (1+r)^-3:
//   f''(r) = 2 a r / (1+r)^3,  f(r) = r + a (r - 2 log(1+r) + r/(1+r)).
inline MetricSpec make_polydecay(double a) {
  if (a < 0.0) throw std::invalid_argument("make_polydecay: a must be >= 0");
  WarpProfile w;
  w.name = "polydecay";
  w.f = [a](double r) {
    return r + a * (r - 2.0 * std::log1p(r) + r / (1.0 + r));
  };
  w.df = [a](double r) {
    const double q = r / (1.0 + r);
    return 1.0 + a * q * q;
  };
  w.ddf = [a](double r) {
    const double u = 1.0 + r;
    return 2.0 * a * r / (u * u * u);
  };
  w.curvature_at_pole = -2.0 * a;
  return MetricSpec::warped(std::move(w));
}

// Conformal well phi = c |x|^2, K = -4c exp(-2c|x|^2), bounded by 4c.
inline MetricSpec make_gausswell(double c) {
  if (c < 0.0) throw std::invalid_argument("make_gausswell: c must be >= 0");
  ConformalPotential p;
  p.name = "gausswell";
  p.phi = [c](const Vec2& x) { return c * dot(x, x); };
  p.grad = [c](const Vec2& x) { return Vec2{2.0 * c * x[0], 2.0 * c * x[1]}; };
  p.laplacian = [c](const Vec2&) { return 4.0 * c; };
  p.radial = true;
  p.phi_of_rho = [c](double rho) { return c * rho * rho; };
  return MetricSpec::conformal(std::move(p));
}

inline MetricSpec make_spec(const std::string& name,
                            const std::vector<double>& params = {}) {
  auto param = [&](std::size_t i, double def) {
    return i < params.size() ? params[i] : def;
  };
  if (name == "euclidean") return make_euclidean();
  if (name == "flat_polar") return make_flat_polar();
  if (name == "hyperbolic") return make_hyperbolic(param(0, 1.0));
  if (name == "polydecay") return make_polydecay(param(0, 1.0));
  if (name == "gausswell") return make_gausswell(param(0, 0.1));
  throw std::invalid_argument("make_spec: unknown profile '" + name + "'");
}

// The curvature class a built-in spec is designed to satisfy.
inline CurvatureClass builtin_curvature_class(const MetricSpec& spec,
                                              double param) {
  const std::string& n = spec.name();
  if (n == "euclidean" || n == "flat_polar") return CurvatureClass::bounded(0.0);
  if (n == "hyperbolic") return CurvatureClass::bounded(param);
  if (n == "polydecay") return CurvatureClass::poly(3.0, 2.0 * param);
  if (n == "gausswell") return CurvatureClass::bounded(4.0 * param);
  throw std::invalid_argument("builtin_curvature_class: " + n);
}

// ---------------------------------------------------------------------------
// Sampling-based curvature class verification.
// ---------------------------------------------------------------------------

struct CurvatureReport {
  double max_violation = 0.0;  // worst |K|/bound - 1 (<= 0 means compliant)
  std::vector<ChartPoint> witnesses;
};

// Samples K on quasi-random points out to the given chart radius and reports
// the worst ratio of |K| against the class bound.
inline CurvatureReport verify_curvature_class(const MetricSpec& spec,
                                              const CurvatureClass& cls,
                                              int n_samples, double radius,
                                              std::uint64_t seed = 12345) {
  if (n_samples < 1)
    throw std::invalid_argument("verify_curvature_class: n_samples < 1");
  CurvatureReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  // Additive quasi-random (Kronecker) sequence; the seed offsets the phase.
  const double a1 = 0.7548776662466927, a2 = 0.5698402909980532;
  double u = 1e-9 * double(seed % 1000003), v = 0.5;
  for (int i = 0; i < n_samples; ++i) {
    u += a1;
    u -= std::floor(u);
    v += a2;
    v -= std::floor(v);
    const double rr = radius * std::sqrt(u);
    const double th = 2.0 * M_PI * v;
    ChartPoint x = spec.family() == MetricFamily::Warped
                       ? ChartPoint{rr, th}
                       : ChartPoint{rr * std::cos(th), rr * std::sin(th)};
    const double K = spec.gaussian_curvature(x);
    const double d = spec.distance_to_base(x);
    const double bound = cls.kind == CurvatureKind::Bounded
                             ? cls.k0
                             : cls.c * std::pow(1.0 + d, -cls.eta_tilde);
    const double viol = bound > 0.0
                            ? std::abs(K) / bound - 1.0
                            : (std::abs(K) > 1e-14 ? 1.0 : -1.0);
    if (viol > rep.max_violation) rep.max_violation = viol;
    if (viol > 1e-9 && rep.witnesses.size() < 16) rep.witnesses.push_back(x);
  }
  return rep;
}

}  // namespace grt
