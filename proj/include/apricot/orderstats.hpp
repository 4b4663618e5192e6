#pragma once

// Order-statistic CDFs for the number of agents whose value clears a price.
// D_j(p) = Pr[fewer than j agents exceed p] is a Poisson-binomial tail; the
// approximate form replaces the count by a Poisson with mean
// Lambda = sum_i -ln F_i(p). Exact values come from the O(n*j) counting
// recurrence rather than the exponential subset-sum expansion.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "apricot/dists.hpp"

namespace apricot {

namespace detail {

// Pr[Poisson(lambda) <= j]; j < 0 gives 0. Falls back to log-space
// accumulation when e^-lambda underflows.
inline double poisson_cdf(int j, double lambda) {
  if (j < 0) return 0.0;
  if (lambda == 0.0) return 1.0;
  if (std::isinf(lambda)) return 0.0;
  if (lambda < 700.0) {
    double term = std::exp(-lambda);
    double sum = term;
    for (int t = 1; t <= j; ++t) {
      term *= lambda / t;
      sum += term;
    }
    return std::min(sum, 1.0);
  }
  // log-space: sum exp(t ln l - l - lgamma(t+1)), largest term last when j < lambda
  double log_term = -lambda;
  double max_log = log_term;
  std::vector<double> logs(static_cast<std::size_t>(j) + 1);
  logs[0] = log_term;
  for (int t = 1; t <= j; ++t) {
    log_term += std::log(lambda) - std::log(static_cast<double>(t));
    logs[static_cast<std::size_t>(t)] = log_term;
    max_log = std::max(max_log, log_term);
  }
  double sum = 0.0;
  for (double lt : logs) sum += std::exp(lt - max_log);
  return std::exp(max_log) * sum;
}

// Pr[Poisson(lambda) >= j], computed without cancellation for lambda << j.
inline double poisson_tail(int j, double lambda) {
  if (j <= 0) return 1.0;
  if (lambda == 0.0) return 0.0;
  if (std::isinf(lambda)) return 1.0;
  if (lambda >= static_cast<double>(j) || lambda >= 700.0)
    return std::max(0.0, 1.0 - poisson_cdf(j - 1, lambda));
  // terms decrease from t = j on since lambda < j
  double log_term = j * std::log(lambda) - lambda - std::lgamma(static_cast<double>(j) + 1.0);
  double term = std::exp(log_term);
  double sum = 0.0;
  for (int t = j; term > sum * 1e-18; ++t) {
    sum += term;
    term *= lambda / (t + 1);
  }
  return sum;
}

// pmf of Binomial(m, a) truncated at cap: out[c] = Pr[X = c] for c < cap,
// out[cap] = Pr[X >= cap]. Stable for huge m (log-space recurrence).
inline std::vector<double> binomial_prefix_pmf(std::int64_t m, double a, int cap) {
  std::vector<double> pmf(static_cast<std::size_t>(cap) + 1, 0.0);
  if (a <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (a >= 1.0) {
    pmf[static_cast<std::size_t>(std::min<std::int64_t>(m, cap))] = 1.0;
    return pmf;
  }
  const double md = static_cast<double>(m);
  const double log_ratio = std::log(a) - std::log1p(-a);
  double log_p = md * std::log1p(-a);
  double total = 0.0;
  const int last = static_cast<int>(std::min<std::int64_t>(m, cap - 1));
  for (int c = 0; c <= last; ++c) {
    pmf[static_cast<std::size_t>(c)] = std::exp(log_p);
    total += pmf[static_cast<std::size_t>(c)];
    if (c < last) log_p += std::log(md - c) + log_ratio - std::log(static_cast<double>(c) + 1.0);
  }
  if (m >= cap) pmf[static_cast<std::size_t>(cap)] = std::max(0.0, 1.0 - total);
  return pmf;
}

}  // namespace detail

// Pr[at most j-1 of the independent indicators fire], given each agent's
// exceedance probability. Counting recurrence, O(n * j).
inline double exact_order_stat_cdf(std::span<const double> accept_probs, int j) {
  if (j < 1) throw std::invalid_argument("exact_order_stat_cdf: j must be >= 1");
  for (double a : accept_probs)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("exact_order_stat_cdf: probability out of [0,1]");
  std::vector<double> dp(static_cast<std::size_t>(j), 0.0);  // dp[c] = Pr[count == c], c <= j-1
  dp[0] = 1.0;
  for (double a : accept_probs) {
    if (a == 0.0) continue;
    for (int c = j - 1; c >= 1; --c) dp[c] = dp[c] * (1.0 - a) + dp[c - 1] * a;
    dp[0] *= (1.0 - a);
  }
  double sum = 0.0;
  for (double v : dp) sum += v;
  return sum;
}

// Approximate j-th order statistic D^_j = D_1 * sum_{t<j} (-ln D_1)^t / t!,
// with D^_j = 0 when D_1 = 0.
inline double approx_order_stat_cdf(double first_order, int j) {
  if (j < 1) throw std::invalid_argument("approx_order_stat_cdf: j must be >= 1");
  if (!(first_order >= 0.0 && first_order <= 1.0))
    throw std::invalid_argument("approx_order_stat_cdf: first_order out of [0,1]");
  if (first_order == 0.0) return 0.0;
  const double lambda = -std::log(first_order);
  double term = first_order;
  double sum = term;
  for (int t = 1; t < j; ++t) {
    term *= lambda / t;
    sum += term;
  }
  return std::min(sum, 1.0);
}

// Same quantity from Lambda = sum_i -ln F_i(p) directly; usable when D_1
// itself underflows.
inline double approx_order_stat_cdf_from_lambda(double lambda, int j) {
  if (j < 1) throw std::invalid_argument("approx_order_stat_cdf_from_lambda: j must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("approx_order_stat_cdf_from_lambda: lambda must be >= 0");
  return detail::poisson_cdf(j - 1, lambda);
}

// Checks (1 - delta j) D^_j <= D_j <= (1 + 2 delta j) D^_j. Preconditions
// (delta <= 1/(4j), every exceedance probability <= delta) are errors when
// violated, not a false result.
inline bool verify_sandwich(std::span<const double> accept_probs, int j, double delta) {
  if (j < 1) throw std::invalid_argument("verify_sandwich: j must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0 / (4.0 * j)))
    throw std::invalid_argument("verify_sandwich: delta must satisfy 0 < delta <= 1/(4j)");
  double lambda = 0.0;
  for (double a : accept_probs) {
    if (!(a >= 0.0 && a <= delta))
      throw std::invalid_argument("verify_sandwich: accept probability exceeds delta");
    lambda -= std::log1p(-a);
  }
  const double exact = exact_order_stat_cdf(accept_probs, j);
  const double approx = approx_order_stat_cdf_from_lambda(lambda, j);
  const double slack = 1e-12 * std::max(1.0, approx);
  return (1.0 - delta * j) * approx - slack <= exact &&
         exact <= (1.0 + 2.0 * delta * j) * approx + slack;
}

// Distribution of min(cap, #accepts) for a whole market at a price.
// Multiplicity-aware: deterministic acceptors shift the count, random types
// enter via their binomial pmf truncated at cap. pmf[c] for c < cap,
// pmf[cap] = Pr[count >= cap].
inline std::vector<double> count_distribution(const Market& market, double p, int cap) {
  if (cap < 1) throw std::invalid_argument("count_distribution: cap must be >= 1");
  std::vector<double> dp(static_cast<std::size_t>(cap) + 1, 0.0);
  dp[0] = 1.0;
  std::int64_t shift = 0;  // deterministic accepts
  auto apply_shift = [&](std::int64_t s) {
    if (s <= 0) return;
    if (s >= cap) {
      double mass = 0.0;
      for (double& v : dp) { mass += v; v = 0.0; }
      dp[static_cast<std::size_t>(cap)] = mass;
      return;
    }
    for (int c = cap; c >= 0; --c) {
      const int src = c - static_cast<int>(s);
      double v = (src >= 0) ? dp[static_cast<std::size_t>(src)] : 0.0;
      if (c == cap) {  // everything at or above cap pools
        v = 0.0;
        for (int u = cap - static_cast<int>(s); u <= cap; ++u)
          if (u >= 0) v += dp[static_cast<std::size_t>(u)];
      }
      dp[static_cast<std::size_t>(c)] = v;
    }
  };
  for (const auto& agent : market.agents) {
    const double a = tri_accept_prob(agent, p);
    if (a == 0.0) continue;
    if (a == 1.0) {
      shift += agent.count;
      if (shift >= cap) shift = cap;  // saturated; further shifts are no-ops
      continue;
    }
    const auto type_pmf = detail::binomial_prefix_pmf(agent.count, a, cap);
    // convolve, pooling overflow at cap
    std::vector<double> next(static_cast<std::size_t>(cap) + 1, 0.0);
    for (int c1 = 0; c1 <= cap; ++c1) {
      const double w = dp[static_cast<std::size_t>(c1)];
      if (w == 0.0) continue;
      for (int c2 = 0; c2 <= cap; ++c2) {
        const double t = type_pmf[static_cast<std::size_t>(c2)];
        if (t == 0.0) continue;
        next[static_cast<std::size_t>(std::min(cap, c1 + c2))] += w * t;
      }
    }
    dp.swap(next);
  }
  apply_shift(shift);
  return dp;
}

// Total Poisson parameter Lambda(p) = sum_i count_i * (-ln F_i(p)).
// Infinite when some agent accepts surely.
inline double market_lambda(const Market& market, double p) {
  double lambda = 0.0;
  for (const auto& agent : market.agents) {
    const double a = tri_accept_prob(agent, p);
    if (a >= 1.0) return std::numeric_limits<double>::infinity();
    lambda += static_cast<double>(agent.count) * -std::log1p(-a);
  }
  return lambda;
}

struct OrderStatProfile {
  double price = 0.0;
  std::vector<double> exact;   // D_j(p), j = 1..k (empty when not requested)
  std::vector<double> approx;  // D^_j(p), j = 1..k
  double first_order = 0.0;    // D_1(p)
};

// Bundles exact and approximate order-statistic CDFs for j = 1..k.
inline OrderStatProfile order_profile(const Market& market, double p, bool with_exact = true) {
  if (!(p > 0.0)) throw std::invalid_argument("order_profile: p must be positive");
  const int k = static_cast<int>(market.supply);
  OrderStatProfile out;
  out.price = p;
  const double lambda = market_lambda(market, p);
  out.first_order = std::isinf(lambda) ? 0.0 : std::exp(-lambda);
  out.approx.resize(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j)
    out.approx[static_cast<std::size_t>(j - 1)] = approx_order_stat_cdf_from_lambda(lambda, j);
  if (with_exact) {
    const auto dist = count_distribution(market, p, k);
    out.exact.resize(static_cast<std::size_t>(k));
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) {
      acc += dist[static_cast<std::size_t>(j - 1)];
      out.exact[static_cast<std::size_t>(j - 1)] = std::min(acc, 1.0);
    }
  }
  return out;
}

}  // namespace apricot
