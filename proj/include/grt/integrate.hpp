#pragma once

// Low-level numerics shared by the whole library: an adaptive embedded
// Runge-Kutta integrator (Dormand-Prince 5(4)) with dense output, adaptive
// Gauss-Kronrod quadrature, Gauss-Legendre nodes and golden-section search.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace grt {

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with continuous (dense) output.
// ---------------------------------------------------------------------------

template <std::size_t N>
using State = std::array<double, N>;

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

// One accepted step together with the coefficients of the DOPRI5 continuous
// extension, evaluable anywhere inside [t0, t0+h].
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  State<N> r1, r2, r3, r4, r5;

  State<N> eval(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
    return y;
  }
  // Exact derivative of the quartic interpolant
  //   y(s) = r1 + s r2 + s(1-s) r3 + s^2(1-s) r4 + s^2(1-s)^2 r5.
  State<N> eval_derivative(double t) const {
    const double s = (t - t0) / h;
    State<N> d;
    for (std::size_t i = 0; i < N; ++i) {
      const double ds = r2[i] + (1 - 2 * s) * r3[i] +
                        (2 * s - 3 * s * s) * r4[i] +
                        (2 * s - 6 * s * s + 4 * s * s * s) * r5[i];
      d[i] = ds / h;
    }
    return d;
  }
};

// Integrates y' = f(t, y) from (t0, y0) to t_end, recording dense steps.
// rhs: void(double t, const State&, State& dydt).
// post_step: optional hook applied to the running state after each accepted
// step (used for velocity renormalisation); it must not perturb the state by
// more than the local tolerance.
template <std::size_t N, class Rhs, class PostStep>
std::vector<DenseStep<N>> integrate_dense(Rhs&& rhs, double t0, State<N> y0,
                                          double t_end, const OdeOptions& opt,
                                          PostStep&& post_step) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  // Dense-output coefficients (Hairer-Norsett-Wanner dopri5).
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  if (!(t_end > t0)) throw std::invalid_argument("integrate_dense: t_end <= t0");

  std::vector<DenseStep<N>> steps;
  State<N> y = y0, k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  double t = t0;
  double h = std::min(opt.initial_step, t_end - t0);
  rhs(t, y, k1);

  // treat t_end as reached once the remaining span is at roundoff level,
  // otherwise the final clamped step can shrink below the underflow guard
  const double t_snap = 1e-13 * std::max(1.0, std::abs(t_end));
  for (std::size_t n = 0; n < opt.max_steps && t < t_end - t_snap; ++n) {
    h = std::min(h, t_end - t);
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw std::runtime_error("integrate_dense: step size underflow");

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                            b6 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / N);

    if (err <= 1.0) {
      DenseStep<N> ds;
      ds.t0 = t;
      ds.h = h;
      for (std::size_t i = 0; i < N; ++i) {
        const double dy = ynew[i] - y[i];
        const double bspl = h * k1[i] - dy;
        ds.r1[i] = y[i];
        ds.r2[i] = dy;
        ds.r3[i] = bspl;
        ds.r4[i] = dy - h * k7[i] - bspl;
        ds.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                        d6 * k6[i] + d7 * k7[i]);
      }
      steps.push_back(ds);
      t += h;
      y = ynew;
      post_step(t, y);
      if (y != ynew) rhs(t, y, k7);  // state was adjusted, refresh slope
      k1 = k7;
    }

    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.2, 5.0);
    h = std::min(h * fac, opt.max_step);
  }
  if (t < t_end - t_snap)
    throw std::runtime_error("integrate_dense: max step count hit");
  return steps;
}

template <std::size_t N, class Rhs>
std::vector<DenseStep<N>> integrate_dense(Rhs&& rhs, double t0, State<N> y0,
                                          double t_end, const OdeOptions& opt) {
  return integrate_dense<N>(std::forward<Rhs>(rhs), t0, y0, t_end, opt,
                            [](double, State<N>&) {});
}

// Piecewise dense trajectory with binary-search evaluation.
template <std::size_t N>
class DenseTrajectory {
 public:
  DenseTrajectory() = default;
  explicit DenseTrajectory(std::vector<DenseStep<N>> steps)
      : steps_(std::move(steps)) {}

  bool empty() const { return steps_.empty(); }
  double t_begin() const { return steps_.front().t0; }
  double t_end() const { return steps_.back().t0 + steps_.back().h; }

  void append(std::vector<DenseStep<N>> more) {
    steps_.insert(steps_.end(), more.begin(), more.end());
  }

  State<N> eval(double t) const {
    return locate(t).eval(std::clamp(t, t_begin(), t_end()));
  }

  const DenseStep<N>& locate(double t) const {
    if (steps_.empty()) throw std::logic_error("DenseTrajectory: empty");
    std::size_t lo = 0, hi = steps_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (steps_[mid].t0 <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    return steps_[lo];
  }

  const std::vector<DenseStep<N>>& steps() const { return steps_; }

 private:
  std::vector<DenseStep<N>> steps_;
};

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (G7, K15) quadrature.
// ---------------------------------------------------------------------------

namespace detail {
// abscissa, Gauss weight, Kronrod weight
inline constexpr double gk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529}};

template <class F>
inline double gk15_panel(F&& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double y0 = f(mid);
  double g = gk15[0][1] * y0;
  double k = gk15[0][2] * y0;
  for (int i = 1; i < 8; ++i) {
    const double dx = half * gk15[i][0];
    const double yi = f(mid + dx) + f(mid - dx);
    g += gk15[i][1] * yi;
    k += gk15[i][2] * yi;
  }
  g *= half;
  k *= half;
  err = std::abs(k - g);
  return k;
}
}  // namespace detail

// Integrates f over [a, b] by recursive bisection until the summed Kronrod
// error estimate is below tol (absolute).
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol,
                          int max_depth = 48) {
  if (a == b) return 0.0;
  struct Seg {
    double a, b, val, err;
    int depth;
  };
  double err0;
  const double v0 = detail::gk15_panel(f, a, b, err0);
  std::vector<Seg> work{{a, b, v0, err0, 0}};
  double total = v0, total_err = err0;
  // stop at the roundoff floor of the running value, whatever tol asks for
  auto goal = [&] { return std::max(tol, 1e-14 * std::abs(total)); };
  for (std::size_t it = 0; total_err > goal() && it < 100000; ++it) {
    // split the worst segment
    std::size_t worst = 0;
    for (std::size_t i = 1; i < work.size(); ++i)
      if (work[i].err > work[worst].err) worst = i;
    Seg s = work[worst];
    if (s.depth >= max_depth) break;
    const double m = 0.5 * (s.a + s.b);
    double e1, e2;
    const double v1 = detail::gk15_panel(f, s.a, m, e1);
    const double v2 = detail::gk15_panel(f, m, s.b, e2);
    total += v1 + v2 - s.val;
    total_err += e1 + e2 - s.err;
    work[worst] = {s.a, m, v1, e1, s.depth + 1};
    work.push_back({m, s.b, v2, e2, s.depth + 1});
  }
  return total;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
// ---------------------------------------------------------------------------

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

// Maps a [-1,1] rule onto [a,b].
inline QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule r = gauss_legendre(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = 0.5 * (a + b) + 0.5 * (b - a) * r.nodes[i];
    r.weights[i] *= 0.5 * (b - a);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Golden-section minimisation of a unimodal function.
// ---------------------------------------------------------------------------

template <class F>
double golden_section_min(F&& f, double a, double b, double tol) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace grt
