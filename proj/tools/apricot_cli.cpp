// apricot: command-line front end for the k-unit auction pricing toolkit.
//
// Subcommands: worst-case, order-stats, simulate, gap, example1, lower-bound,
// decompose. Inputs are Market / RevenueCurve JSON files; outputs are
// deterministic JSON/CSV (and optional SVG plots), written atomically.
//
// Exit codes: 0 success, 2 input error, 3 numerical non-convergence.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apricot/csv.hpp"
#include "apricot/json_io.hpp"
#include "apricot/mechanisms.hpp"
#include "apricot/svg.hpp"
#include "apricot/worstcase.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 0xA9C0;

double quad_tol_from_env() {
  const char* env = std::getenv("APRICOT_TOL");
  if (!env) return apricot::kDefaultQuadTol;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0))
    throw apricot::ParseError(std::string("APRICOT_TOL is not a positive number: ") + env);
  return v;
}

apricot::Market load_market(const std::string& path) {
  const auto j = apricot::parse_json_text(apricot::read_file(path));
  auto m = apricot::market_from_json(j);
  if (m.agents.empty()) throw apricot::ParseError("market has no agents: " + path);
  return m;
}

void write_json(const std::string& path, const apricot::json& j) {
  apricot::atomic_write_file(path, j.dump(2) + "\n");
}

std::string dump_gap_csv(const apricot::GapReport& g) {
  apricot::CsvWriter w;
  w.row({"market_id", "k", "opt", "ap", "ratio", "epsilon"});
  w.row({g.market_id, g.k, g.opt, g.ap, g.ratio, g.epsilon});
  return w.str();
}

void emit_gap(const apricot::GapReport& g, const std::string& out, const std::string& format) {
  if (format == "csv")
    apricot::atomic_write_file(out, dump_gap_csv(g));
  else
    write_json(out, apricot::to_json(g));
}

struct WorstCaseArgs {
  std::int64_t k = 1;
  std::int64_t table_kmax = 0;  // 0 = no table
  int grid = 200;
  double x_max = 1e4;
  double eps_target = 1e-3;
  std::string out = "worst-case.json";
  std::string format = "json";
  std::string emit_market;
  std::string plot;
};

int run_worst_case(const WorstCaseArgs& a) {
  const double tol = quad_tol_from_env();
  if (a.table_kmax > 0) {
    const auto table = apricot::universal_bound_table(a.table_kmax, tol);
    if (a.format == "csv") {
      apricot::CsvWriter w;
      w.row({"k", "ear", "asymptotic_exact", "asymptotic_stirling", "tightest", "source"});
      for (const auto& r : table.rows)
        w.row({r.k, r.ear_value ? apricot::CsvField(*r.ear_value) : apricot::CsvField(""),
               r.asymptotic_exact, r.asymptotic_stirling, r.tightest, r.source});
      apricot::atomic_write_file(a.out, w.str());
    } else {
      write_json(a.out, apricot::to_json(table));
    }
    std::printf("worst-case table k_max=%" PRId64 " universal=%.6f -> %s\n", a.table_kmax,
                table.universal, a.out.c_str());
    return 0;
  }

  const auto sol = apricot::solve_worst_case(a.k, a.grid, a.x_max, tol);
  if (a.format == "csv") {
    apricot::CsvWriter w;
    w.row({"x", "d1", "r", "q"});
    for (const auto& p : sol.d1_table) w.row({p.x, p.d1, p.r, p.q});
    apricot::atomic_write_file(a.out, w.str());
  } else {
    write_json(a.out, apricot::to_json(sol));
  }
  if (!a.emit_market.empty()) {
    const auto market = apricot::worst_case_market(a.k, a.grid, a.x_max, a.eps_target, tol);
    write_json(a.emit_market, apricot::to_json(market));
  }
  if (!a.plot.empty()) {
    apricot::PlotSeries d1{"D1(x)", {}}, r{"R(x)", {}};
    for (const auto& p : sol.d1_table) {
      d1.points.emplace_back(std::log10(p.x), p.d1);
      r.points.emplace_back(std::log10(p.x), p.r);
    }
    apricot::atomic_write_file(a.plot, apricot::render_plot({d1, r}, "log10(x)", "value"));
  }
  if (sol.opt_k1)
    std::printf("worst-case k=%" PRId64 " OPT=%.6f alpha=%.6f ear=%.6f -> %s\n", a.k, *sol.opt_k1,
                sol.alpha, sol.ear_value, a.out.c_str());
  else
    std::printf("worst-case k=%" PRId64 " ear=%.6f alpha=%.6f beta=%.6f -> %s\n", a.k,
                sol.ear_value, sol.alpha, sol.beta, a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anonymous pricing analysis toolkit for k-unit auctions"};
  app.require_subcommand(1);

  // worst-case
  WorstCaseArgs wc;
  auto* cmd_wc = app.add_subcommand("worst-case", "solve the worst-case instance for a given k");
  cmd_wc->add_option("--k", wc.k, "number of units")->check(CLI::PositiveNumber);
  cmd_wc->add_option("--table", wc.table_kmax, "emit the bound table for k = 1..K");
  cmd_wc->add_option("--grid", wc.grid, "table grid size")->check(CLI::Range(2, 2000000));
  cmd_wc->add_option("--x-max", wc.x_max, "right end of the tabulated support");
  cmd_wc->add_option("--eps-target", wc.eps_target, "max per-agent revenue in emitted markets");
  cmd_wc->add_option("--out", wc.out, "output path");
  cmd_wc->add_option("--format", wc.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  cmd_wc->add_option("--emit-market", wc.emit_market, "write the discretized market JSON here");
  cmd_wc->add_option("--plot", wc.plot, "write an SVG of D1(x) and R(x) here");

  // order-stats
  std::string os_input, os_out = "order-stats.csv";
  double os_pmin = 0.1, os_pmax = 10.0;
  int os_grid = 50;
  auto* cmd_os = app.add_subcommand("order-stats", "exact vs approximate order-statistic CDFs on a price grid");
  cmd_os->add_option("--input", os_input, "market JSON")->required();
  cmd_os->add_option("--pmin", os_pmin, "lowest price");
  cmd_os->add_option("--pmax", os_pmax, "highest price");
  cmd_os->add_option("--grid", os_grid, "number of prices")->check(CLI::Range(1, 1000000));
  cmd_os->add_option("--out", os_out, "output CSV path");

  // simulate
  std::string sim_input, sim_out = "simulate.csv";
  double sim_price = 0.0;
  std::int64_t sim_trials = 100000;
  std::uint64_t sim_seed = kDefaultSeed;
  int sim_shards = 1;
  auto* cmd_sim = app.add_subcommand("simulate", "analytic and Monte Carlo revenue at a price");
  cmd_sim->add_option("--input", sim_input, "market JSON")->required();
  cmd_sim->add_option("--price", sim_price, "anonymous price (default: the optimal one)");
  cmd_sim->add_option("--trials", sim_trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--seed", sim_seed, "RNG seed");
  cmd_sim->add_option("--shards", sim_shards, "Monte Carlo shards")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--out", sim_out, "output CSV path");

  // gap
  std::string gap_input, gap_out = "gap.json", gap_format = "json";
  auto* cmd_gap = app.add_subcommand("gap", "OPT / AP gap report for a market");
  cmd_gap->add_option("--input", gap_input, "market JSON")->required();
  cmd_gap->add_option("--out", gap_out, "output path");
  cmd_gap->add_option("--format", gap_format, "output format")->check(CLI::IsMember({"csv", "json"}));

  // example1
  std::int64_t ex1_k = 4;
  std::string ex1_out = "example1.json", ex1_format = "json";
  auto* cmd_ex1 = app.add_subcommand("example1", "deterministic 1/i market with a log k gap");
  cmd_ex1->add_option("--k", ex1_k, "number of units/agents")->check(CLI::PositiveNumber);
  cmd_ex1->add_option("--out", ex1_out, "output path");
  cmd_ex1->add_option("--format", ex1_format, "output format")->check(CLI::IsMember({"csv", "json"}));

  // lower-bound
  std::int64_t lb_k = 1;
  double lb_delta = 1e-2;
  std::string lb_out = "lower-bound.json", lb_format = "json";
  auto* cmd_lb = app.add_subcommand("lower-bound", "two-group instance with gap tending to 2");
  cmd_lb->add_option("--k", lb_k, "number of units")->check(CLI::PositiveNumber);
  cmd_lb->add_option("--delta", lb_delta, "construction parameter in (0,1)");
  cmd_lb->add_option("--out", lb_out, "output path");
  cmd_lb->add_option("--format", lb_format, "output format")->check(CLI::IsMember({"csv", "json"}));

  // decompose
  std::string dec_input, dec_out = "decompose.json";
  std::int64_t dec_k = 1;
  auto* cmd_dec = app.add_subcommand("decompose", "iron + flatten + split a revenue curve into triangular agents");
  cmd_dec->add_option("--input", dec_input, "revenue curve JSON")->required();
  cmd_dec->add_option("--k", dec_k, "supply for the emitted market")->check(CLI::PositiveNumber);
  cmd_dec->add_option("--out", dec_out, "output market JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cmd_wc->parsed()) return run_worst_case(wc);

    if (cmd_os->parsed()) {
      const auto market = load_market(os_input);
      if (!(os_pmax >= os_pmin) || !(os_pmin > 0.0))
        throw apricot::ParseError("order-stats: need 0 < pmin <= pmax");
      apricot::CsvWriter w;
      w.row({"price", "j", "exact", "approx", "lower_bound", "upper_bound"});
      const int k = static_cast<int>(market.supply);
      for (int i = 0; i < os_grid; ++i) {
        const double p = os_grid == 1
                             ? os_pmin
                             : os_pmin * std::pow(os_pmax / os_pmin, static_cast<double>(i) / (os_grid - 1));
        const auto prof = apricot::order_profile(market, p, true);
        double delta = 0.0;
        for (const auto& ag : market.agents)
          delta = std::max(delta, apricot::tri_accept_prob(ag, p));
        for (int j = 1; j <= k; ++j) {
          const double approx = prof.approx[static_cast<std::size_t>(j - 1)];
          w.row({p, j, prof.exact[static_cast<std::size_t>(j - 1)], approx,
                 (1.0 - delta * j) * approx, (1.0 + 2.0 * delta * j) * approx});
        }
      }
      apricot::atomic_write_file(os_out, w.str());
      std::printf("order-stats k=%" PRId64 " prices=%d -> %s\n", market.supply, os_grid,
                  os_out.c_str());
      return 0;
    }

    if (cmd_sim->parsed()) {
      const auto market = load_market(sim_input);
      const auto ap_best = apricot::ap_optimal(market);
      const double price = sim_price > 0.0 ? sim_price : ap_best.prices[0];
      const double analytic = apricot::ap_revenue_analytic(market, price);
      const auto mc = apricot::ap_revenue_mc(market, price, sim_trials, sim_seed, sim_shards);
      const auto opt = apricot::opt_revenue_triangular(market);
      const double ear_v = apricot::ear(market);
      apricot::CsvWriter w;
      w.row({"mechanism", "revenue", "stderr", "price", "seed"});
      w.row({"AP", analytic, 0.0, price, std::uint64_t{0}});
      w.row({"AP_MC", mc.revenue, mc.std_error, price, mc.seed});
      w.row({"OPT", opt.revenue, 0.0, "", std::uint64_t{0}});
      w.row({"EAR", ear_v, 0.0, "", std::uint64_t{0}});
      apricot::atomic_write_file(sim_out, w.str());
      std::printf("simulate price=%.6g analytic=%.6f mc=%.6f(se %.2e) -> %s\n", price, analytic,
                  mc.revenue, mc.std_error, sim_out.c_str());
      return 0;
    }

    if (cmd_gap->parsed()) {
      const auto market = load_market(gap_input);
      const auto g = apricot::gap_report(market, gap_input);
      emit_gap(g, gap_out, gap_format);
      std::printf("gap k=%" PRId64 " opt=%.6f ap=%.6f ratio=%.6f -> %s\n", g.k, g.opt, g.ap,
                  g.ratio, gap_out.c_str());
      return 0;
    }

    if (cmd_ex1->parsed()) {
      const auto market = apricot::example1_market(ex1_k);
      const auto g = apricot::gap_report(market, "example1:k=" + std::to_string(ex1_k));
      emit_gap(g, ex1_out, ex1_format);
      std::printf("example1 k=%" PRId64 " opt=%.6f ap=%.6f ratio=%.6f -> %s\n", g.k, g.opt, g.ap,
                  g.ratio, ex1_out.c_str());
      return 0;
    }

    if (cmd_lb->parsed()) {
      bool capped = false;
      const auto market = apricot::lower_bound_instance(lb_k, lb_delta, &capped);
      if (capped)
        std::fprintf(stderr, "warning: group-2 count delta^-10 capped at %" PRId64 " agents\n",
                     apricot::kLowerBoundCountCap);
      const auto g = apricot::gap_report(
          market, "lower-bound:k=" + std::to_string(lb_k) + ",delta=" + apricot::csv_num(lb_delta));
      emit_gap(g, lb_out, lb_format);
      std::printf("lower-bound k=%" PRId64 " delta=%g ratio=%.6f -> %s\n", lb_k, lb_delta, g.ratio,
                  lb_out.c_str());
      return 0;
    }

    if (cmd_dec->parsed()) {
      const auto j = apricot::parse_json_text(apricot::read_file(dec_input));
      const auto curve = apricot::curve_from_json(j);
      const auto flat = apricot::flatten_negative_virtual(apricot::iron(curve));
      const auto head = apricot::truncate_at_monopoly(flat);
      apricot::Market market;
      market.supply = dec_k;
      for (auto& ag : apricot::decompose_to_triangles(head)) market.agents.push_back(ag);
      write_json(dec_out, apricot::to_json(market));
      std::printf("decompose pieces=%zu -> %s\n", market.agents.size(), dec_out.c_str());
      return 0;
    }
  } catch (const apricot::ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const apricot::NumericError& e) {
    if (std::isnan(e.achieved_error))
      std::fprintf(stderr, "numerical error: %s\n", e.what());
    else
      std::fprintf(stderr, "numerical error: %s (achieved error %.3e)\n", e.what(),
                   e.achieved_error);
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
