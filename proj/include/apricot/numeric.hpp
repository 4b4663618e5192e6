#pragma once

// Small numerical kernel: Brent root bracketing, golden-section maximization
// and adaptive Gauss-Kronrod quadrature. Everything here is deterministic and
// allocation-free so callers can run it from concurrent contexts.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace apricot {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double achieved = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), achieved_error(achieved) {}
  double achieved_error;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule,
// tabulated on [0, 1] half-interval (symmetric).
inline constexpr double kronrod_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kronrod_weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gauss_weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename F>
inline void gk15(const F& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fk = 0.0, fg = 0.0;
  // The embedded G7 rule lives on the odd-indexed Kronrod nodes.
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kronrod_nodes[i];
    const double fv = (i == 7) ? f(c) : f(c - dx) + f(c + dx);
    fk += kronrod_weights[i] * fv;
    if (i % 2 == 1) fg += gauss_weights[i / 2] * fv;
  }
  kronrod = fk * h;
  const double diff = std::fabs(fk - fg) * std::fabs(h);
  err = std::pow(200.0 * diff, 1.5);
  if (err > diff) err = diff;
  if (err == 0.0) err = std::fabs(kronrod) * 1e-16;
}

}  // namespace detail

// Adaptive bisection over GK15 panels. Returns value plus an error estimate;
// converged=false when the tolerance could not be met within the depth cap.
template <typename F>
QuadratureResult integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                           int max_depth = 48) {
  if (!(b >= a)) throw std::invalid_argument("integrate: bad interval");
  if (a == b) return {0.0, 0.0, true};
  struct Panel {
    double a, b, tol;
    int depth;
  };
  QuadratureResult total;
  // Explicit DFS stack; the panel budget bounds work when the tolerance is
  // unreachable (e.g. below machine precision).
  Panel stack[2048];
  int top = 0;
  int panels = 0;
  constexpr int kPanelBudget = 20000;
  stack[top++] = {a, b, abs_tol, 0};
  while (top > 0) {
    Panel p = stack[--top];
    ++panels;
    double v, e;
    detail::gk15(f, p.a, p.b, v, e);
    if (e <= p.tol || p.depth >= max_depth || panels >= kPanelBudget || top > 2040) {
      total.value += v;
      total.error_estimate += e;
      if (e > p.tol) total.converged = false;
      continue;
    }
    const double m = 0.5 * (p.a + p.b);
    stack[top++] = {p.a, m, 0.5 * p.tol, p.depth + 1};
    stack[top++] = {m, p.b, 0.5 * p.tol, p.depth + 1};
  }
  return total;
}

// Brent's method on [lo, hi]; requires a sign change. Tolerance is absolute
// on the argument plus a machine-precision relative floor.
template <typename F>
double brent_root(const F& f, double lo, double hi, double x_tol = 1e-13,
                  int max_iter = 200) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw std::invalid_argument("brent_root: endpoints do not bracket a root");
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * x_tol;
    const double m = 0.5 * (c - b);
    if (std::fabs(m) <= tol || fb == 0.0) return b;
    if (std::fabs(e) < tol || std::fabs(fa) <= std::fabs(fb)) {
      d = e = m;  // bisection
    } else {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double r = fb / fc;
        const double t = fa / fc;
        p = s * (2.0 * m * t * (t - r) - (b - a) * (r - 1.0));
        q = (t - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = e = m;
      }
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  return b;
}

// Golden-section search for the maximum of a unimodal-ish f on [lo, hi].
// Returns {argmax, max}. Not guaranteed global on multimodal input; callers
// seed it per bracket between candidate points.
template <typename F>
std::pair<double, double> golden_max(const F& f, double lo, double hi, double x_tol) {
  static const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2; f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1; f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

}  // namespace apricot
