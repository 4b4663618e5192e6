#pragma once

// Revenue evaluators for the mechanisms under study: anonymous pricing (one
// price for everyone, first-come until the k units run out), sequential
// posted pricing (personalized prices offered in decreasing order), the
// revenue-optimal mechanism on triangular instances (= SPP at monopoly
// values) and the ex-ante relaxation. Plus the named instance generators.
//
// All evaluators are multiplicity-aware: a type with count m never
// materializes m agents; binomial pmfs do the work instead.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "apricot/dists.hpp"
#include "apricot/numeric.hpp"
#include "apricot/orderstats.hpp"

namespace apricot {

enum class Mechanism { AP, SPP, OPT, EAR };

inline const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::AP: return "AP";
    case Mechanism::SPP: return "SPP";
    case Mechanism::OPT: return "OPT";
    case Mechanism::EAR: return "EAR";
  }
  return "?";
}

struct RevenueReport {
  Mechanism mechanism = Mechanism::AP;
  double revenue = 0.0;
  std::vector<double> prices;   // one entry for anonymous pricing
  double std_error = 0.0;       // 0 for analytic results
  std::int64_t trials = 0;      // 0 for analytic results
  std::uint64_t seed = 0;
};

struct GapReport {
  std::string market_id;
  std::int64_t k = 1;
  double opt = 0.0;
  double ap = 0.0;
  double ratio = 1.0;  // opt / ap
  double epsilon = 0.0;
};

namespace detail {

inline void require_attainable_monopoly(const Market& market, const char* who) {
  if (market.agents.empty()) throw std::invalid_argument(std::string(who) + ": empty market");
  for (const auto& a : market.agents)
    if (a.q_star == 0.0)
      throw std::invalid_argument(std::string(who) + ": q* = 0 agent has no attainable monopoly price");
}

}  // namespace detail

// Expected anonymous-pricing revenue at price p:
// p * sum_{j<=k} (1 - D_j(p)) = p * E[min(k, #accepts)].
inline double ap_revenue_analytic(const Market& market, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("ap_revenue_analytic: p must be positive");
  if (market.agents.empty()) throw std::invalid_argument("ap_revenue_analytic: empty market");
  const int k = static_cast<int>(market.supply);
  if (k == 1) {
    const double lambda = market_lambda(market, p);
    return p * (std::isinf(lambda) ? 1.0 : -std::expm1(-lambda));
  }
  const auto dist = count_distribution(market, p, k);
  double expect = 0.0;
  for (int c = 1; c < k; ++c) expect += c * dist[static_cast<std::size_t>(c)];
  expect += k * dist[static_cast<std::size_t>(k)];
  return p * expect;
}

// Cross-check route for the same quantity through the per-j order-statistic
// CDFs; kept separate so tests can pit the two code paths against each other.
inline double ap_revenue_via_order_stats(const Market& market, double p) {
  const auto profile = order_profile(market, p, true);
  double sum = 0.0;
  for (double dj : profile.exact) sum += 1.0 - dj;
  return p * sum;
}

// Best anonymous price: sweep the candidate set {v*_i}, then refine each
// bracket between consecutive candidates by golden-section search. Ties are
// broken toward the lowest price.
inline RevenueReport ap_optimal(const Market& market) {
  detail::require_attainable_monopoly(market, "ap_optimal");
  std::vector<double> candidates;
  candidates.reserve(market.agents.size());
  for (const auto& a : market.agents) candidates.push_back(a.monopoly_value());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best_p = candidates.front();
  double best_rev = -1.0;
  auto consider = [&](double p, double rev) {
    if (rev > best_rev * (1.0 + 1e-12)) {
      best_rev = rev;
      best_p = p;
    }
  };
  for (double p : candidates) consider(p, ap_revenue_analytic(market, p));
  // prices below best/k can never win: AP(p) <= p*k
  const double floor_p = std::max(best_rev / static_cast<double>(market.supply) * 0.5,
                                  candidates.front() * 1e-9);
  std::vector<double> edges;
  edges.push_back(std::min(floor_p, candidates.front()));
  for (double p : candidates) edges.push_back(p);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i], hi = edges[i + 1];
    if (!(hi > lo)) continue;
    auto [p, rev] = golden_max([&](double x) { return ap_revenue_analytic(market, x); }, lo, hi,
                               std::max(1e-12, 1e-9 * (hi - lo)));
    consider(p, rev);
  }
  RevenueReport out;
  out.mechanism = Mechanism::AP;
  out.revenue = best_rev;
  out.prices = {best_p};
  return out;
}

// Sequential posted pricing with one price per agent type. Agents are
// visited in decreasing price order (ties: input order); the distribution of
// units sold so far is maintained by the counting recurrence, so a type with
// count m costs O(k^2), never O(m).
inline double spp_revenue(const Market& market, std::span<const double> prices) {
  if (prices.size() != market.agents.size())
    throw std::invalid_argument("spp_revenue: one price per agent type required");
  for (double p : prices)
    if (!(p > 0.0)) throw std::invalid_argument("spp_revenue: prices must be positive");
  const int k = static_cast<int>(market.supply);
  std::vector<std::size_t> order(market.agents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return prices[a] > prices[b]; });

  std::vector<double> dp(static_cast<std::size_t>(k) + 1, 0.0);  // units sold so far; dp[k] = sold out
  dp[0] = 1.0;
  double revenue = 0.0;
  for (std::size_t idx : order) {
    const auto& agent = market.agents[idx];
    const double p = prices[idx];
    if (std::isinf(p)) continue;
    const double a = tri_accept_prob(agent, p);
    if (a == 0.0) continue;
    const auto pmf = detail::binomial_prefix_pmf(agent.count, a, k);
    // prefix[c] = Pr[A < c], weighted[c] = E[A ; A < c]
    std::vector<double> prefix(static_cast<std::size_t>(k) + 1, 0.0);
    std::vector<double> weighted(static_cast<std::size_t>(k) + 1, 0.0);
    for (int c = 1; c <= k; ++c) {
      prefix[static_cast<std::size_t>(c)] = prefix[static_cast<std::size_t>(c - 1)] + pmf[static_cast<std::size_t>(c - 1)];
      weighted[static_cast<std::size_t>(c)] =
          weighted[static_cast<std::size_t>(c - 1)] + (c - 1) * pmf[static_cast<std::size_t>(c - 1)];
    }
    std::vector<double> next(static_cast<std::size_t>(k) + 1, 0.0);
    for (int s = 0; s <= k; ++s) {
      const double w = dp[static_cast<std::size_t>(s)];
      if (w == 0.0) continue;
      const int room = k - s;
      if (room == 0) {
        next[static_cast<std::size_t>(k)] += w;
        continue;
      }
      // E[min(A, room)] = E[A ; A < room] + room * Pr[A >= room]
      const double tail = std::max(0.0, 1.0 - prefix[static_cast<std::size_t>(room)]);
      revenue += p * w * (weighted[static_cast<std::size_t>(room)] + room * tail);
      for (int d = 0; d < room; ++d)
        next[static_cast<std::size_t>(s + d)] += w * pmf[static_cast<std::size_t>(d)];
      next[static_cast<std::size_t>(k)] += w * tail;
    }
    dp.swap(next);
  }
  return revenue;
}

// Revenue-optimal mechanism on a triangular instance: sequential posted
// pricing at the monopoly values, highest first.
inline RevenueReport opt_revenue_triangular(const Market& market) {
  detail::require_attainable_monopoly(market, "opt_revenue_triangular");
  std::vector<double> prices;
  prices.reserve(market.agents.size());
  for (const auto& a : market.agents) prices.push_back(a.monopoly_value());
  RevenueReport out;
  out.mechanism = Mechanism::OPT;
  out.revenue = spp_revenue(market, prices);
  out.prices = std::move(prices);
  return out;
}

// Ex-ante relaxation: fractional greedy by monopoly value under the budget
// E[units sold] <= k. Returns sum r* when the total quantile is below k.
inline double ear(const Market& market) {
  if (market.agents.empty()) throw std::invalid_argument("ear: empty market");
  std::vector<std::size_t> order(market.agents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return market.agents[a].monopoly_value() > market.agents[b].monopoly_value();
  });
  double budget = static_cast<double>(market.supply);
  double revenue = 0.0;
  for (std::size_t idx : order) {
    const auto& agent = market.agents[idx];
    const double total_q = agent.q_star * static_cast<double>(agent.count);
    const double total_r = agent.r_star * static_cast<double>(agent.count);
    if (total_q <= budget) {
      revenue += total_r;
      budget -= total_q;
    } else {
      revenue += budget * agent.monopoly_value();
      budget = 0.0;
      break;
    }
  }
  return revenue;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Monte Carlo estimate of AP(p): each agent's acceptance is sampled
// independently and min(k, #accepts) units sell at p. Deterministic for a
// fixed (seed, shards); shards split the trial budget with derived seeds and
// may run on separate threads.
inline RevenueReport ap_revenue_mc(const Market& market, double p, std::int64_t trials,
                                   std::uint64_t seed, int shards = 1) {
  if (trials < 1) throw std::invalid_argument("ap_revenue_mc: trials must be >= 1");
  if (!(p > 0.0)) throw std::invalid_argument("ap_revenue_mc: p must be positive");
  if (shards < 1) throw std::invalid_argument("ap_revenue_mc: shards must be >= 1");
  const std::int64_t k = market.supply;

  struct TypeDraw {
    std::int64_t count;
    double accept;
  };
  std::vector<TypeDraw> types;
  std::int64_t sure = 0;  // deterministic accepts
  for (const auto& agent : market.agents) {
    const double a = tri_accept_prob(agent, p);
    if (a == 0.0) continue;
    if (a == 1.0)
      sure += agent.count;
    else
      types.push_back({agent.count, a});
  }

  std::vector<double> shard_sum(static_cast<std::size_t>(shards), 0.0);
  std::vector<double> shard_sumsq(static_cast<std::size_t>(shards), 0.0);
  auto run_shard = [&](int s) {
    const std::int64_t base = trials / shards;
    const std::int64_t n = base + (s < trials % shards ? 1 : 0);
    std::mt19937_64 rng(detail::splitmix64(seed + 0x51edULL * static_cast<std::uint64_t>(s)));
    double sum = 0.0, sumsq = 0.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::int64_t t = 0; t < n; ++t) {
      std::int64_t accepts = sure;
      for (const auto& ty : types) {
        if (accepts >= k) break;  // further accepts cannot change min(k, N)
        if (ty.count <= 16) {
          for (std::int64_t i = 0; i < ty.count; ++i)
            if (unif(rng) < ty.accept) ++accepts;
        } else {
          std::binomial_distribution<std::int64_t> bin(ty.count, ty.accept);
          accepts += bin(rng);
        }
      }
      const double rev = p * static_cast<double>(std::min(k, accepts));
      sum += rev;
      sumsq += rev * rev;
    }
    shard_sum[static_cast<std::size_t>(s)] = sum;
    shard_sumsq[static_cast<std::size_t>(s)] = sumsq;
  };

  if (shards == 1) {
    run_shard(0);
  } else {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    std::atomic_int next{0};
    const unsigned n_threads = std::min<unsigned>(hw, static_cast<unsigned>(shards));
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (int s = next.fetch_add(1); s < shards; s = next.fetch_add(1)) run_shard(s);
      });
    for (auto& th : pool) th.join();
  }

  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < shards; ++s) {
    sum += shard_sum[static_cast<std::size_t>(s)];
    sumsq += shard_sumsq[static_cast<std::size_t>(s)];
  }
  const double mean = sum / static_cast<double>(trials);
  double se = 0.0;
  if (trials > 1) {
    const double var = std::max(0.0, (sumsq - mean * sum) / static_cast<double>(trials - 1));
    se = std::sqrt(var / static_cast<double>(trials));
  }
  RevenueReport out;
  out.mechanism = Mechanism::AP;
  out.revenue = mean;
  out.prices = {p};
  out.std_error = se;
  out.trials = trials;
  out.seed = seed;
  return out;
}

// k agents, agent i deterministic at 1/i (a triangular agent with q* = 1).
inline Market example1_market(std::int64_t k) {
  if (k < 1) throw std::invalid_argument("example1_market: k must be >= 1");
  Market m;
  m.supply = k;
  m.agents.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 1; i <= k; ++i)
    m.agents.push_back(TriangularAgent(1.0 / static_cast<double>(i), 1.0));
  return m;
}

inline constexpr std::int64_t kLowerBoundCountCap = 1'000'000'000'000LL;

// Two-group instance whose OPT/AP gap tends to 2 as delta -> 0: round(1/delta)
// agents Tri(delta, delta^2) with monopoly reserve 1/delta, plus delta^-10
// agents Tri(delta/k, delta) with monopoly reserve 1/k. The second group's
// count is capped at 1e12 (reported through count_capped).
inline Market lower_bound_instance(std::int64_t k, double delta, bool* count_capped = nullptr) {
  if (k < 1) throw std::invalid_argument("lower_bound_instance: k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("lower_bound_instance: delta must be in (0,1)");
  const auto group1 = static_cast<std::int64_t>(std::llround(1.0 / delta));
  if (group1 < 1) throw std::invalid_argument("lower_bound_instance: delta too large");
  const double raw2 = std::pow(delta, -10.0);
  std::int64_t group2 = kLowerBoundCountCap;
  bool capped = true;
  if (raw2 < static_cast<double>(kLowerBoundCountCap)) {
    group2 = static_cast<std::int64_t>(std::llround(raw2));
    capped = false;
  }
  if (count_capped) *count_capped = capped;
  Market m;
  m.supply = k;
  m.agents.push_back(TriangularAgent(delta, delta * delta, group1));
  m.agents.push_back(TriangularAgent(delta / static_cast<double>(k), delta, group2));
  return m;
}

// OPT, AP, their ratio and the market's epsilon in one record.
inline GapReport gap_report(const Market& market, std::string market_id = {}) {
  GapReport g;
  g.market_id = std::move(market_id);
  g.k = market.supply;
  g.opt = opt_revenue_triangular(market).revenue;
  g.ap = ap_optimal(market).revenue;
  if (!(g.ap > 0.0)) throw std::invalid_argument("gap_report: anonymous pricing revenue is zero");
  g.ratio = g.opt / g.ap;
  g.epsilon = epsilon_of_market(market, g.opt);
  return g;
}

// The reduction path for non-triangular quasi-regular instances: iron each
// revenue curve, flatten the tail, truncate at the monopoly knot and
// decompose into triangular agents.
inline Market reduce_to_triangular_market(std::int64_t k,
                                          std::span<const PiecewiseDistribution> dists) {
  Market m;
  m.supply = k;
  for (const auto& d : dists) {
    const RevenueCurve flat = flatten_negative_virtual(iron(revenue_curve_of(d)));
    const RevenueCurve head = truncate_at_monopoly(flat);
    for (auto& agent : decompose_to_triangles(head)) m.agents.push_back(agent);
  }
  return m;
}

}  // namespace apricot
