#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "apricot/mechanisms.hpp"
#include "helpers.hpp"

using namespace apricot;
using Catch::Approx;

namespace {

double harmonic(std::int64_t k) {
  double h = 0.0;
  for (std::int64_t i = 1; i <= k; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

}  // namespace

TEST_CASE("ap_revenue_analytic named cases") {
  SECTION("monopoly price extracts monopoly revenue from one agent") {
    Market m{1, {TriangularAgent{1.0, 0.5}}};
    CHECK(ap_revenue_analytic(m, 2.0) == Approx(1.0));
  }
  SECTION("two agents accepting w.p. 1/2 at p = 1, k = 2") {
    // E[min(2, Binomial(2, 1/2))] = 1, so revenue is exactly the price
    Market m{2, {TriangularAgent{0.5, 0.5, 2}}};  // v* = 1, accept(1) = q* = 1/2
    CHECK(ap_revenue_analytic(m, 1.0) == Approx(1.0));
  }
  SECTION("example-1 market earns 1 at every price 1/i, i <= k") {
    auto m = example1_market(6);
    for (std::int64_t i = 1; i <= 6; ++i)
      CHECK(ap_revenue_analytic(m, 1.0 / static_cast<double>(i)) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("two AP code paths agree") {
  std::mt19937_64 rng(41);
  for (int it = 0; it < 200; ++it) {
    auto m = test_util::random_market(rng, 8, 15, 3);
    std::uniform_real_distribution<double> pd(0.05, 5.0);
    const double p = pd(rng);
    const double direct = ap_revenue_analytic(m, p);
    const double via_os = ap_revenue_via_order_stats(m, p);
    CHECK(direct == Approx(via_os).margin(1e-12 * std::max(1.0, direct)));
  }
}

TEST_CASE("ap_optimal") {
  SECTION("single agent picks the monopoly price") {
    Market m{1, {TriangularAgent{1.0, 0.5}}};
    auto r = ap_optimal(m);
    CHECK(r.prices[0] == Approx(2.0));
    CHECK(r.revenue == Approx(1.0));
  }
  SECTION("example-1 ties resolve to the lowest price") {
    auto m = example1_market(8);
    auto r = ap_optimal(m);
    CHECK(r.revenue == Approx(1.0).epsilon(1e-12));
    CHECK(r.prices[0] == Approx(1.0 / 8.0).epsilon(1e-9));
  }
  SECTION("many small shards sell all k units at 1/k") {
    // N shards Tri(delta/k, delta): as N grows the optimum approaches price
    // 1/k with revenue 1
    const std::int64_t k = 4;
    const double delta = 1e-4;
    Market m{k, {TriangularAgent{delta / static_cast<double>(k), delta, 4000000}}};
    auto r = ap_optimal(m);
    CHECK(r.prices[0] == Approx(1.0 / static_cast<double>(k)).epsilon(1e-6));
    CHECK(r.revenue == Approx(1.0).epsilon(0.01));
  }
  SECTION("q* = 0 agents are rejected") {
    Market m{1, {TriangularAgent{1.0, 0.0}}};
    CHECK_THROWS_AS(ap_optimal(m), std::invalid_argument);
  }
}

TEST_CASE("spp_revenue") {
  SECTION("example-1 prices 1/i collect the harmonic sum") {
    for (std::int64_t k : {1, 4, 16}) {
      auto m = example1_market(k);
      std::vector<double> prices;
      for (const auto& a : m.agents) prices.push_back(a.monopoly_value());
      CHECK(spp_revenue(m, prices) == Approx(harmonic(k)).epsilon(1e-12));
    }
  }
  SECTION("single agent at its monopoly value earns r*") {
    Market m{1, {TriangularAgent{0.7, 0.3}}};
    std::vector<double> prices{m.agents[0].monopoly_value()};
    CHECK(spp_revenue(m, prices) == Approx(0.7).epsilon(1e-12));
  }
  SECTION("supply exhaustion: first sure sale wins") {
    Market m{1, {TriangularAgent{3.0, 1.0}, TriangularAgent{2.0, 1.0}}};
    std::vector<double> prices{3.0, 2.0};
    CHECK(spp_revenue(m, prices) == Approx(3.0));
  }
  SECTION("invariant to permuting equal-priced agents") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 50; ++it) {
      auto m = test_util::random_market(rng, 5, 6, 2);
      std::vector<double> prices(m.agents.size(), 1.25);
      const double base = spp_revenue(m, prices);
      std::shuffle(m.agents.begin(), m.agents.end(), rng);
      CHECK(spp_revenue(m, prices) == Approx(base).epsilon(1e-12));
    }
  }
  SECTION("one price per type enforced") {
    Market m{1, {TriangularAgent{1.0, 0.5}}};
    std::vector<double> prices{1.0, 2.0};
    CHECK_THROWS_AS(spp_revenue(m, prices), std::invalid_argument);
  }
}

TEST_CASE("opt_revenue_triangular") {
  SECTION("example-1 gives H_k") {
    for (std::int64_t k : {1, 4, 64}) {
      auto r = opt_revenue_triangular(example1_market(k));
      CHECK(r.revenue == Approx(harmonic(k)).epsilon(1e-12));
    }
  }
  SECTION("single agent gives r*") {
    Market m{1, {TriangularAgent{1.4, 0.25}}};
    CHECK(opt_revenue_triangular(m).revenue == Approx(1.4).epsilon(1e-12));
  }
  SECTION("lower-bound instance approaches 2") {
    auto m = lower_bound_instance(4, 1e-3);
    CHECK(opt_revenue_triangular(m).revenue == Approx(2.0).margin(0.01));
  }
}

TEST_CASE("ear") {
  SECTION("total quantile below k returns sum of r*") {
    Market m{3, {TriangularAgent{1.0, 0.5}, TriangularAgent{0.5, 0.25}}};
    CHECK(ear(m) == Approx(1.5));
    Market single{1, {TriangularAgent{1.0, 0.5}}};
    CHECK(ear(single) == Approx(1.0));
  }
  SECTION("fractional crossing agent") {
    Market m{1, {TriangularAgent{1.0, 0.6, 2}}};
    CHECK(ear(m) == Approx(1.0 + 0.4 * (1.0 / 0.6)).epsilon(1e-12));
  }
}

TEST_CASE("ap_revenue_mc") {
  SECTION("matches analytic within 4 standard errors") {
    std::mt19937_64 rng(55);
    int outside = 0;
    for (int it = 0; it < 60; ++it) {
      auto m = test_util::random_market(rng, 6, 12, 2);
      const double p = ap_optimal(m).prices[0];
      const double truth = ap_revenue_analytic(m, p);
      auto mc = ap_revenue_mc(m, p, 20000, static_cast<std::uint64_t>(900 + it), 4);
      if (std::fabs(mc.revenue - truth) > 4.0 * std::max(mc.std_error, 1e-12)) ++outside;
    }
    CHECK(outside <= 1);
  }
  SECTION("no acceptance gives zero with zero error") {
    Market m{2, {TriangularAgent{1.0, 0.5}}};
    auto mc = ap_revenue_mc(m, 50.0, 1000, 1);
    CHECK(mc.revenue == 0.0);
    CHECK(mc.std_error == 0.0);
  }
  SECTION("bit-identical for a fixed seed and shard count") {
    std::mt19937_64 rng(56);
    auto m = test_util::random_market(rng, 4, 8, 2);
    auto a = ap_revenue_mc(m, 1.0, 30000, 42, 8);
    auto b = ap_revenue_mc(m, 1.0, 30000, 42, 8);
    CHECK(a.revenue == b.revenue);
    CHECK(a.std_error == b.std_error);
    CHECK(a.trials == 30000);
    CHECK(a.seed == 42);
    // different shard split is allowed to differ, but stays close
    auto c = ap_revenue_mc(m, 1.0, 30000, 42, 1);
    CHECK(std::fabs(c.revenue - a.revenue) < 10.0 * std::max(a.std_error, 1e-6));
  }
}

TEST_CASE("example1_market") {
  auto m1 = example1_market(1);
  auto g1 = gap_report(m1);
  CHECK(g1.opt == Approx(1.0));
  CHECK(g1.ap == Approx(1.0));
  CHECK(g1.ratio == Approx(1.0));

  auto g4 = gap_report(example1_market(4));
  CHECK(g4.opt == Approx(25.0 / 12.0).epsilon(1e-12));
  CHECK(g4.ap == Approx(1.0).epsilon(1e-12));

  auto g1024 = gap_report(example1_market(1024));
  CHECK(g1024.ratio == Approx(harmonic(1024)).epsilon(1e-9));
  CHECK(g1024.ratio == Approx(7.509).epsilon(1e-3));
}

TEST_CASE("lower_bound_instance") {
  SECTION("group sizes and parameters") {
    bool capped = false;
    auto m = lower_bound_instance(2, 0.1, &capped);
    REQUIRE(m.agents.size() == 2);
    CHECK(m.agents[0].count == 10);
    CHECK(m.agents[0].r_star == Approx(0.1));
    CHECK(m.agents[0].q_star == Approx(0.01));
    CHECK(m.agents[1].count == 10000000000LL);
    CHECK_FALSE(capped);
    CHECK(m.agents[1].monopoly_value() == Approx(0.5));
  }
  SECTION("count cap engages for tiny delta") {
    bool capped = false;
    auto m = lower_bound_instance(2, 1e-3, &capped);
    CHECK(capped);
    CHECK(m.agents[1].count == kLowerBoundCountCap);
  }
  SECTION("AP stays near 1, ratio grows toward 2") {
    double prev = 0.0;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
      auto g = gap_report(lower_bound_instance(2, delta));
      CHECK(g.ap <= 1.0 + 2.0 * delta);
      CHECK(g.ratio > prev);
      prev = g.ratio;
    }
    CHECK(prev > 1.9);
  }
  SECTION("group-2 sub-market sells out at 1/k as delta shrinks") {
    // exact D_k at p = 1/k tends to 0 (it underflows almost immediately:
    // delta^-10 agents accept w.p. delta each)
    for (std::int64_t k : {2, 4}) {
      double prev = 1.0;
      for (double delta : {1e-1, 1e-2}) {
        auto full = lower_bound_instance(k, delta);
        Market g2{k, {full.agents[1]}};
        auto prof = order_profile(g2, 1.0 / static_cast<double>(k));
        const double dk = prof.exact[static_cast<std::size_t>(k - 1)];
        CHECK(dk <= prev);
        prev = dk;
      }
      CHECK(prev < 1e-6);
    }
  }
}

TEST_CASE("gap_report") {
  SECTION("single agent has ratio 1") {
    Market m{1, {TriangularAgent{1.0, 0.5}}};
    auto g = gap_report(m, "one");
    CHECK(g.ratio == Approx(1.0).epsilon(1e-9));
    CHECK(g.market_id == "one");
    CHECK(g.epsilon == Approx(1.0).epsilon(1e-9));
  }
  SECTION("revenue chain AP <= OPT <= EAR on random markets") {
    std::mt19937_64 rng(60);
    for (int it = 0; it < 300; ++it) {
      auto m = test_util::random_market(rng);
      const double ap = ap_optimal(m).revenue;
      const double opt = opt_revenue_triangular(m).revenue;
      const double e = ear(m);
      CHECK(ap <= opt * (1.0 + 1e-9));
      CHECK(opt <= e * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("reduce_to_triangular_market") {
  std::mt19937_64 rng(61);
  for (int it = 0; it < 100; ++it) {
    std::vector<PiecewiseDistribution> dists;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) dists.push_back(test_util::random_quasi_regular(rng));
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 4);
    auto market = reduce_to_triangular_market(k, dists);
    REQUIRE(!market.agents.empty());

    // independent fractional-greedy oracle over the ironed curve segments
    std::vector<std::pair<double, double>> segs;  // (slope, dq)
    for (const auto& d : dists) {
      auto c = truncate_at_monopoly(iron(revenue_curve_of(d)));
      for (std::size_t i = 1; i < c.knots.size(); ++i) {
        const double dq = c.knots[i].q - c.knots[i - 1].q;
        const double dr = c.knots[i].r - c.knots[i - 1].r;
        segs.emplace_back(dr / dq, dq);
      }
    }
    std::sort(segs.begin(), segs.end(), [](auto& a, auto& b) { return a.first > b.first; });
    double budget = static_cast<double>(k), oracle = 0.0;
    for (auto& [slope, dq] : segs) {
      const double take = std::min(budget, dq);
      oracle += take * slope;
      budget -= take;
      if (budget <= 0.0) break;
    }
    CHECK(ear(market) == Approx(oracle).margin(1e-9));
  }
}
