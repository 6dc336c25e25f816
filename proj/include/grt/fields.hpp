#pragma once

// Scalar fields on the manifold with decay metadata, analytic gradients and
// the smooth cutoff family used for C^2 approximation.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "grt/flows.hpp"
#include "grt/metric.hpp"

namespace grt {

enum class DecayKind { Poly, Exp };

struct DecaySpec {
  DecayKind kind = DecayKind::Poly;
  double eta = 0.0;
  double c = 1.0;
  bool with_gradient = false;  // |grad f|_g in P_{eta+1} resp. E_eta

  static DecaySpec poly(double eta, double c = 1.0, bool with_gradient = false) {
    if (eta <= 0.0) throw std::invalid_argument("DecaySpec: eta must be > 0");
    return {DecayKind::Poly, eta, c, with_gradient};
  }
  static DecaySpec exp(double eta, double c = 1.0, bool with_gradient = false) {
    if (eta <= 0.0) throw std::invalid_argument("DecaySpec: eta must be > 0");
    return {DecayKind::Exp, eta, c, with_gradient};
  }
};

struct ScalarField {
  std::string name;
  std::function<double(const ChartPoint&)> eval;
  // contravariant chart components of grad f; empty when unavailable
  std::function<Vec2(const ChartPoint&)> gradient;
  std::optional<DecaySpec> decay;
  double support_radius = std::numeric_limits<double>::infinity();

  double operator()(const ChartPoint& x) const { return eval(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool compactly_supported() const { return std::isfinite(support_radius); }
};

// --- radial field builders ---------------------------------------------------
// All built-in fields are functions of the distance d(x, p); their gradient is
// F'(d) times the unit radial vector.

inline ScalarField radial_field(const MetricSpec& spec, std::string name,
                                std::function<double(double)> F,
                                std::function<double(double)> dF,
                                std::optional<DecaySpec> decay,
                                double support_radius =
                                    std::numeric_limits<double>::infinity()) {
  ScalarField f;
  f.name = std::move(name);
  f.eval = [spec, F](const ChartPoint& x) {
    return F(spec.distance_to_base(x));
  };
  if (dF)
    f.gradient = [spec, dF](const ChartPoint& x) {
      const double d = spec.distance_to_base(x);
      const Vec2 rad = distance_gradient(spec, x);
      const double s = dF(d);
      return Vec2{s * rad[0], s * rad[1]};
    };
  f.decay = decay;
  f.support_radius = support_radius;
  return f;
}

// e^{-sigma d^2}; lies in every E_eta class.
inline ScalarField make_gaussian_field(const MetricSpec& spec,
                                       double sigma = 1.0, double eta_tag = 2.0) {
  const double c_tag = std::exp(eta_tag * eta_tag / (4.0 * sigma));
  return radial_field(
      spec, "gaussian",
      [sigma](double d) { return std::exp(-sigma * d * d); },
      [sigma](double d) { return -2.0 * sigma * d * std::exp(-sigma * d * d); },
      DecaySpec::exp(eta_tag, c_tag, true));
}

// (1+d)^{-eta}
inline ScalarField make_poly_field(const MetricSpec& spec, double eta) {
  return radial_field(
      spec, "polybump",
      [eta](double d) { return std::pow(1.0 + d, -eta); },
      [eta](double d) { return -eta * std::pow(1.0 + d, -eta - 1.0); },
      DecaySpec::poly(eta, 1.0, true));
}

// e^{-eta d}; the gradient is undefined at the base point only.
inline ScalarField make_exp_field(const MetricSpec& spec, double eta) {
  return radial_field(
      spec, "expdecay", [eta](double d) { return std::exp(-eta * d); },
      [eta](double d) { return -eta * std::exp(-eta * d); },
      DecaySpec::exp(eta, 1.0, true));
}

// --- smooth transition profile ----------------------------------------------

namespace detail {
inline double smooth_sigma(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
inline double smooth_sigma_prime(double t) {
  return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0;
}
}  // namespace detail

// C-infinity transition: 1 on (-inf, 1], 0 on [2, inf).
inline double smooth_step_down(double s) {
  const double a = detail::smooth_sigma(2.0 - s);
  const double b = detail::smooth_sigma(s - 1.0);
  return a / (a + b);
}

inline double smooth_step_down_prime(double s) {
  const double a = detail::smooth_sigma(2.0 - s);
  const double b = detail::smooth_sigma(s - 1.0);
  if (a + b == 0.0) return 0.0;
  const double da = -detail::smooth_sigma_prime(2.0 - s);
  const double db = detail::smooth_sigma_prime(s - 1.0);
  return (da * b - a * db) / ((a + b) * (a + b));
}

// C^infinity bump of the distance, identically 1 for d <= R/2 and supported
// in d <= R.
inline ScalarField make_compact_bump(const MetricSpec& spec, double R,
                                     double amplitude = 1.0) {
  if (R <= 0.0) throw std::invalid_argument("make_compact_bump: R must be > 0");
  const double h = R / 2.0;
  return radial_field(
      spec, "compactbump",
      [h, amplitude](double d) { return amplitude * smooth_step_down(d / h); },
      [h, amplitude](double d) {
        return amplitude * smooth_step_down_prime(d / h) / h;
      },
      std::nullopt, R);
}

inline ScalarField make_zero_field(const MetricSpec& spec) {
  return radial_field(
      spec, "zero", [](double) { return 0.0; }, [](double) { return 0.0; },
      std::nullopt, 0.0);
}

inline ScalarField make_field(const MetricSpec& spec, const std::string& name,
                              const std::vector<double>& params = {}) {
  auto param = [&](std::size_t i, double def) {
    return i < params.size() ? params[i] : def;
  };
  if (name == "gaussian") return make_gaussian_field(spec, param(0, 1.0), param(1, 2.0));
  if (name == "polybump") return make_poly_field(spec, param(0, 3.0));
  if (name == "expdecay") return make_exp_field(spec, param(0, 1.0));
  if (name == "compactbump") return make_compact_bump(spec, param(0, 2.0), param(1, 1.0));
  if (name == "zero") return make_zero_field(spec);
  throw std::invalid_argument("make_field: unknown field '" + name + "'");
}

// --- cutoff family ------------------------------------------------------------

// phi_k(x) = S(d(x,p)/k) with S the smooth transition above: equal to 1 on
// B(p,k), vanishing outside B(p,2k), |grad phi_k|_g <= sup|S'|/k.
struct CutoffFamily {
  double k = 1.0;

  double value(const MetricSpec& spec, const ChartPoint& x) const {
    return smooth_step_down(spec.distance_to_base(x) / k);
  }
  Vec2 grad(const MetricSpec& spec, const ChartPoint& x) const {
    const double d = spec.distance_to_base(x);
    const double s = smooth_step_down_prime(d / k) / k;
    if (s == 0.0) return {0.0, 0.0};
    const Vec2 rad = distance_gradient(spec, x);
    return {s * rad[0], s * rad[1]};
  }
};

// Pointwise product phi_k * f with the product-rule gradient; the support
// radius shrinks to min(support f, 2k).
inline ScalarField cutoff_field(const MetricSpec& spec, const CutoffFamily& fam,
                                const ScalarField& f) {
  ScalarField g;
  g.name = f.name + "_cut";
  g.eval = [spec, fam, fe = f.eval](const ChartPoint& x) {
    const double c = fam.value(spec, x);
    return c == 0.0 ? 0.0 : c * fe(x);
  };
  if (f.has_gradient()) {
    g.gradient = [spec, fam, fe = f.eval, fg = f.gradient](const ChartPoint& x) {
      const double c = fam.value(spec, x);
      const Vec2 dc = fam.grad(spec, x);
      Vec2 out{0.0, 0.0};
      if (c != 0.0) {
        const Vec2 df = fg(x);
        out = {c * df[0], c * df[1]};
      }
      if (dc[0] != 0.0 || dc[1] != 0.0) {
        const double v = fe(x);
        out[0] += v * dc[0];
        out[1] += v * dc[1];
      }
      return out;
    };
  }
  g.decay = f.decay;
  g.support_radius = std::min(f.support_radius, 2.0 * fam.k);
  return g;
}

}  // namespace grt
