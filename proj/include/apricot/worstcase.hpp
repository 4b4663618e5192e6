#pragma once

// Worst-case instance solver. The instance that keeps anonymous-pricing
// revenue pinned at 1 for every price x >= 1/k has its first-order statistic
// D_1(x) defined implicitly by
//
//   1 = x * (k - S),   S = sum_{t=0}^{k-1} ((k-t)/t!) * D_1 * (-ln D_1)^t.
//
// Everything here works in Lambda = -ln D_1 space. With N ~ Poisson(Lambda),
//
//   k - S        = k * Pr[N >= k] + Lambda * Pr[N <= k-2],
//   dS/dD_1      = sum_{t<k} Lambda^t / t!              (> 0, so the root in
//                  D_1 is unique and x(Lambda) = 1/(k-S) is a closed form),
//
// and the cumulative quantile function reduces to the cancellation-free
//
//   Q(x) = integral_0^{Lambda(x)} k*Pr[N >= k+1] /
//          (k*Pr[N >= k] + Lambda*Pr[N <= k-2]) dLambda.
//
// The cumulative revenue function is R(x) = x * Lambda(x); R -> 1 and Q -> 0
// as x -> infinity, both diverge at x = 1/k.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "apricot/dists.hpp"
#include "apricot/numeric.hpp"
#include "apricot/orderstats.hpp"

namespace apricot {

inline constexpr double kDefaultQuadTol = 1e-8;

namespace wc_detail {

// k - S at a given Lambda; strictly increasing in Lambda from 0 to k.
inline double k_minus_s(int k, double lambda) {
  return k * detail::poisson_tail(k, lambda) + lambda * detail::poisson_cdf(k - 2, lambda);
}

// Integrand of Q in Lambda space: 1 - f, where f = Lambda*Pr[N<=k-1]/(k-S).
inline double q_integrand(int k, double lambda) {
  if (lambda <= 0.0) return 0.0;
  const double denom = k_minus_s(k, lambda);
  if (denom <= 0.0) return 0.0;
  return k * detail::poisson_tail(k + 1, lambda) / denom;
}

inline void check_k(std::int64_t k) {
  if (k < 1) throw std::invalid_argument("worstcase: k must be >= 1");
}

}  // namespace wc_detail

// Lambda(x) = -ln D_1(x) solving the implicit equation; +inf at x = 1/k.
inline double first_order_lambda(std::int64_t k, double x) {
  wc_detail::check_k(k);
  const int ki = static_cast<int>(k);
  const double support_left = 1.0 / static_cast<double>(k);
  if (x < support_left * (1.0 - 1e-12))
    throw std::domain_error("first_order_lambda: x below support 1/k");
  if (x <= support_left * (1.0 + 1e-15)) return std::numeric_limits<double>::infinity();
  auto h = [&](double lambda) { return x * wc_detail::k_minus_s(ki, lambda) - 1.0; };
  double hi = 1.0;
  while (h(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e7) throw NumericError("first_order_lambda: bracket expansion failed");
  }
  return brent_root(h, 0.0, hi, 1e-14);
}

// D_1(x) of the worst-case instance; 0 at the left support edge x = 1/k.
inline double solve_first_order_cdf(std::int64_t k, double x) {
  const double lambda = first_order_lambda(k, x);
  return std::isinf(lambda) ? 0.0 : std::exp(-lambda);
}

// x as a function of Lambda along the solution curve (closed form).
inline double x_of_lambda(std::int64_t k, double lambda) {
  wc_detail::check_k(k);
  const double d = wc_detail::k_minus_s(static_cast<int>(k), lambda);
  return d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity();
}

// Cumulative monopoly revenue R(x) = x * Lambda(x).
inline double cumulative_revenue(std::int64_t k, double x) {
  wc_detail::check_k(k);
  if (x < (1.0 / static_cast<double>(k)) * (1.0 - 1e-12))
    throw std::domain_error("cumulative_revenue: x below support 1/k");
  return x * first_order_lambda(k, x);
}

namespace wc_detail {

// integral_0^lambda of the Q integrand; throws NumericError on non-convergence.
inline double q_of_lambda(std::int64_t k, double lambda, double quad_tol) {
  if (lambda <= 0.0) return 0.0;
  const int ki = static_cast<int>(k);
  const auto res = integrate([&](double l) { return q_integrand(ki, l); }, 0.0, lambda, quad_tol);
  if (!res.converged)
    throw NumericError("cumulative_quantile: quadrature did not converge", res.error_estimate);
  return res.value;
}

}  // namespace wc_detail

// Cumulative monopoly quantile Q(x), by quadrature in Lambda space.
inline double cumulative_quantile(std::int64_t k, double x, double quad_tol = kDefaultQuadTol) {
  wc_detail::check_k(k);
  if (x < (1.0 / static_cast<double>(k)) * (1.0 - 1e-12))
    throw std::domain_error("cumulative_quantile: x below support 1/k");
  return wc_detail::q_of_lambda(k, first_order_lambda(k, x), quad_tol);
}

// alpha = Q^{-1}(k): the quantile budget of the ex-ante relaxation is
// exhausted here. Solved in Lambda space where Q is strictly increasing.
inline double alpha(std::int64_t k, double quad_tol = kDefaultQuadTol) {
  wc_detail::check_k(k);
  auto g = [&](double lambda) {
    return wc_detail::q_of_lambda(k, lambda, quad_tol) - static_cast<double>(k);
  };
  double hi = 1.0;
  while (g(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e9) throw NumericError("alpha: bracket expansion failed");
  }
  const double lam = brent_root(g, 0.0, hi, 1e-11);
  return x_of_lambda(k, lam);
}

// beta = D_1^{-1}(e^{-k}), via the explicit formula
// beta = (1/k) / (1 - k^k/(k! e^k)), evaluated through log-gamma.
inline double beta(std::int64_t k) {
  wc_detail::check_k(k);
  const double kd = static_cast<double>(k);
  const double log_ratio = kd * std::log(kd) - std::lgamma(kd + 1.0) - kd;
  return (1.0 / kd) / (-std::expm1(log_ratio));
}

// EAR of the worst-case instance: R(alpha).
inline double ear_worst_case(std::int64_t k, double quad_tol = kDefaultQuadTol) {
  return cumulative_revenue(k, alpha(k, quad_tol));
}

namespace wc_detail {

// Real dilogarithm on [0, 1]: series below 1/2, reflection above.
inline double li2(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("li2: argument outside [0,1]");
  if (u == 1.0) return 1.6449340668482264;  // pi^2/6
  if (u > 0.5)
    return 1.6449340668482264 - std::log(u) * std::log1p(-u) - li2(1.0 - u);
  double s = 0.0, p = 1.0;
  for (int t = 1; t <= 64; ++t) {
    p *= u;
    s += p / (static_cast<double>(t) * t);
    if (p < 1e-18) break;
  }
  return s;
}

// k = 1 closed form: Q(x) = -ln(1 - 1/x) - Li2(1/x).
inline double q1_closed_form(double x) {
  const double u = 1.0 / x;
  return -std::log1p(-u) - li2(u);
}

}  // namespace wc_detail

// Optimal revenue of the k = 1 worst-case instance:
// 2 + integral_1^inf (1 - e^{-Q(x)}) dx, with Q in closed form. The head
// near x = 1 uses the substitution u = ln(x - 1); the tail beyond x = 100 is
// the series sum_{t>=2} x^{1-t}/t^2.
inline double opt_k1(double abs_tol = 1e-5) {
  // head: x in [1, 1+1e-6], x = 1 + e^u
  const auto head = integrate(
      [&](double u) {
        const double w = std::exp(u);
        const double one_minus_over = w / (1.0 + w);      // 1 - 1/x
        const double li2_arg_small = one_minus_over;      // 1 - 1/x, small side
        const double li2_big = 1.6449340668482264 -
                               std::log(1.0 / (1.0 + w)) * std::log(li2_arg_small) -
                               wc_detail::li2(li2_arg_small);
        const double q = -std::log(one_minus_over) - li2_big;
        return (1.0 - std::exp(-q)) * w;
      },
      -60.0, std::log(1e-6), abs_tol * 0.1);
  // middle: adaptive on [1+1e-6, 100]
  const auto middle = integrate(
      [&](double x) { return 1.0 - std::exp(-wc_detail::q1_closed_form(x)); }, 1.0 + 1e-6, 100.0,
      abs_tol * 0.5);
  if (!head.converged || !middle.converged)
    throw NumericError("opt_k1: quadrature did not converge",
                       head.error_estimate + middle.error_estimate);
  // tail: integral_100^inf Q(x) dx = sum_{t>=2} 100^{1-t}/t^2
  double tail = 0.0, pw = 1.0 / 100.0;
  for (int t = 2; t < 40; ++t) {
    tail += pw / (static_cast<double>(t) * t);
    pw /= 100.0;
    if (pw < 1e-20) break;
  }
  return 2.0 + head.value + middle.value + tail;
}

// (2/(1 - k^k/(k! e^k)), 2/(1 - 1/sqrt(2 pi k))); the first is exactly
// 2 k beta(k), the second applies Stirling's approximation to it.
inline std::pair<double, double> asymptotic_upper_bound(std::int64_t k) {
  wc_detail::check_k(k);
  const double exact = 2.0 * static_cast<double>(k) * beta(k);
  const double stirling = 2.0 / (1.0 - 1.0 / std::sqrt(2.0 * 3.141592653589793 * static_cast<double>(k)));
  return {exact, stirling};
}

struct BoundRow {
  std::int64_t k = 1;
  std::optional<double> ear_value;   // R(alpha), when the quadrature converged
  double asymptotic_exact = 0.0;
  double asymptotic_stirling = 0.0;
  double tightest = 0.0;
  std::string source;  // which bound supplied `tightest`
};

struct BoundTable {
  std::vector<BoundRow> rows;
  double universal = 0.0;  // max of tightest over k = 1..k_max
};

// Per-k tightest available upper bound on OPT(F*): the k = 1 value from the
// virtual-value integral, EAR elsewhere, falling back to the asymptotic
// bound if the quadrature fails.
inline BoundTable universal_bound_table(std::int64_t k_max, double quad_tol = kDefaultQuadTol) {
  if (k_max < 1) throw std::invalid_argument("universal_bound_table: k_max must be >= 1");
  BoundTable table;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    BoundRow row;
    row.k = k;
    const auto [ex, st] = asymptotic_upper_bound(k);
    row.asymptotic_exact = ex;
    row.asymptotic_stirling = st;
    try {
      row.ear_value = ear_worst_case(k, quad_tol);
    } catch (const NumericError&) {
      row.ear_value = std::nullopt;
    }
    if (k == 1) {
      row.tightest = opt_k1();
      row.source = "opt_k1";
    } else if (row.ear_value && *row.ear_value <= ex) {
      row.tightest = *row.ear_value;
      row.source = "ear";
    } else {
      row.tightest = ex;
      row.source = "asymptotic";
    }
    table.universal = std::max(table.universal, row.tightest);
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct WorstCasePoint {
  double x = 0.0;
  double d1 = 0.0;
  double r = 0.0;
  double q = 0.0;
};

struct WorstCaseSolution {
  std::int64_t k = 1;
  std::vector<WorstCasePoint> d1_table;
  double alpha = 0.0;
  double d1_alpha = 0.0;
  double beta = 0.0;
  double ear_value = 0.0;
  std::optional<double> opt_k1;  // only for k = 1
  double asymptotic_exact = 0.0;
  double asymptotic_stirling = 0.0;
};

// Tabulate D_1, R, Q on a geometric Lambda grid spanning
// [1/k * (1 + 1e-6), x_max] and collect the scalar outputs.
inline WorstCaseSolution solve_worst_case(std::int64_t k, int grid_n = 200, double x_max = 1e4,
                                          double quad_tol = kDefaultQuadTol) {
  wc_detail::check_k(k);
  if (grid_n < 2) throw std::invalid_argument("solve_worst_case: grid_n must be >= 2");
  const double x_lo = (1.0 / static_cast<double>(k)) * (1.0 + 1e-6);
  if (!(x_max > x_lo)) throw std::invalid_argument("solve_worst_case: x_max too small");
  WorstCaseSolution sol;
  sol.k = k;
  const double lam_hi = first_order_lambda(k, x_lo);
  const double lam_lo = first_order_lambda(k, x_max);
  const double ratio = std::log(lam_lo / lam_hi) / static_cast<double>(grid_n - 1);
  std::vector<double> lambdas(static_cast<std::size_t>(grid_n));
  for (int i = 0; i < grid_n; ++i)
    lambdas[static_cast<std::size_t>(i)] = lam_hi * std::exp(ratio * i);
  // Q accumulates from the right (x_max side): Q_i = Q_{i+1} + dQ
  std::vector<double> q(static_cast<std::size_t>(grid_n));
  q.back() = wc_detail::q_of_lambda(k, lambdas.back(), quad_tol);
  for (int i = grid_n - 2; i >= 0; --i) {
    const auto seg = integrate(
        [&](double l) { return wc_detail::q_integrand(static_cast<int>(k), l); },
        lambdas[static_cast<std::size_t>(i + 1)], lambdas[static_cast<std::size_t>(i)], quad_tol);
    if (!seg.converged) throw NumericError("solve_worst_case: Q segment quadrature failed", seg.error_estimate);
    q[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i + 1)] + seg.value;
  }
  sol.d1_table.resize(static_cast<std::size_t>(grid_n));
  for (int i = 0; i < grid_n; ++i) {
    const double lam = lambdas[static_cast<std::size_t>(i)];
    const double x = x_of_lambda(k, lam);
    sol.d1_table[static_cast<std::size_t>(i)] = {x, std::exp(-lam), x * lam, q[static_cast<std::size_t>(i)]};
  }
  sol.alpha = alpha(k, quad_tol);
  sol.d1_alpha = solve_first_order_cdf(k, sol.alpha);
  sol.beta = beta(k);
  sol.ear_value = cumulative_revenue(k, sol.alpha);
  if (k == 1) sol.opt_k1 = opt_k1();
  const auto [ex, st] = asymptotic_upper_bound(k);
  sol.asymptotic_exact = ex;
  sol.asymptotic_stirling = st;
  return sol;
}

// Discretize the worst-case instance into a finite triangular market. The
// shard between consecutive grid points (x_a, x_b) carries total revenue
// R(x_a) - R(x_b) and total quantile Q(x_a) - Q(x_b), split into pieces of
// revenue at most eps_target; the mass beyond x_max becomes one more shard
// with monopoly value R(x_max)/Q(x_max). By construction AP(x) stays near 1
// across the grid.
inline Market worst_case_market(std::int64_t k, int n_shards, double x_max,
                                double eps_target = 1e-3, double quad_tol = kDefaultQuadTol) {
  wc_detail::check_k(k);
  if (n_shards < 10) throw std::invalid_argument("worst_case_market: n_shards must be >= 10");
  const double x_lo = (1.0 / static_cast<double>(k)) * (1.0 + 1e-3);
  if (!(x_max > x_lo)) throw std::invalid_argument("worst_case_market: x_max too small");
  if (!(eps_target > 0.0)) throw std::invalid_argument("worst_case_market: eps_target must be positive");
  const double lam_hi = first_order_lambda(k, x_lo);
  const double lam_lo = first_order_lambda(k, x_max);
  const double ratio = std::log(lam_lo / lam_hi) / static_cast<double>(n_shards);
  std::vector<double> lambdas(static_cast<std::size_t>(n_shards) + 1);
  for (int i = 0; i <= n_shards; ++i)
    lambdas[static_cast<std::size_t>(i)] = lam_hi * std::exp(ratio * i);

  Market m;
  m.supply = k;
  auto add_shard = [&](double r_total, double q_total) {
    if (!(r_total > 0.0) || !(q_total > 0.0)) return;
    const auto count = static_cast<std::int64_t>(std::ceil(r_total / eps_target));
    m.agents.push_back(TriangularAgent(r_total / static_cast<double>(count),
                                       q_total / static_cast<double>(count), count));
  };
  // interior shards, high value (small Lambda) to low
  for (int i = n_shards; i >= 1; --i) {
    const double lam_a = lambdas[static_cast<std::size_t>(i - 1)];  // bigger Lambda, smaller x
    const double lam_b = lambdas[static_cast<std::size_t>(i)];
    const double xa = x_of_lambda(k, lam_a);
    const double xb = x_of_lambda(k, lam_b);
    const double dr = xa * lam_a - xb * lam_b;
    const auto seg = integrate(
        [&](double l) { return wc_detail::q_integrand(static_cast<int>(k), l); }, lam_b, lam_a,
        quad_tol);
    if (!seg.converged) throw NumericError("worst_case_market: Q segment quadrature failed", seg.error_estimate);
    add_shard(dr, seg.value);
  }
  // tail mass above x_max
  const double r_tail = x_max * lam_lo;
  const double q_tail = wc_detail::q_of_lambda(k, lam_lo, quad_tol);
  add_shard(r_tail, q_tail);
  return m;
}

}  // namespace apricot
