#pragma once

// JSON adapters for the wire formats:
//   Market        {"k": int, "agents": [{"r_star": f, "q_star": f, "count": n}, ...]}
//   RevenueCurve  {"knots": [[q, r], ...]}
// plus serializers/parsers for the report types the CLI emits. Parse
// failures surface as ParseError so callers can map them to input-error
// exits.

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "apricot/dists.hpp"
#include "apricot/mechanisms.hpp"
#include "apricot/worstcase.hpp"

namespace apricot {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

inline json to_json(const Market& m) {
  json agents = json::array();
  for (const auto& a : m.agents)
    agents.push_back({{"r_star", a.r_star}, {"q_star", a.q_star}, {"count", a.count}});
  return json{{"k", m.supply}, {"agents", std::move(agents)}};
}

inline Market market_from_json(const json& j) {
  try {
    Market m;
    m.supply = j.at("k").get<std::int64_t>();
    for (const auto& a : j.at("agents")) {
      TriangularAgent t;
      t.r_star = a.at("r_star").get<double>();
      t.q_star = a.at("q_star").get<double>();
      t.count = a.value("count", static_cast<std::int64_t>(1));
      m.agents.push_back(t);
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("market: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("market: ") + e.what());
  }
}

inline json to_json(const RevenueCurve& c) {
  json knots = json::array();
  for (const auto& p : c.knots) knots.push_back({p.q, p.r});
  return json{{"knots", std::move(knots)}};
}

inline RevenueCurve curve_from_json(const json& j) {
  try {
    std::vector<CurvePoint> knots;
    for (const auto& kn : j.at("knots"))
      knots.push_back({kn.at(0).get<double>(), kn.at(1).get<double>()});
    return RevenueCurve(std::move(knots));
  } catch (const json::exception& e) {
    throw ParseError(std::string("curve: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("curve: ") + e.what());
  }
}

inline json to_json(const GapReport& g) {
  return json{{"market_id", g.market_id}, {"k", g.k},         {"opt", g.opt},
              {"ap", g.ap},               {"ratio", g.ratio}, {"epsilon", g.epsilon}};
}

inline GapReport gap_from_json(const json& j) {
  try {
    GapReport g;
    g.market_id = j.at("market_id").get<std::string>();
    g.k = j.at("k").get<std::int64_t>();
    g.opt = j.at("opt").get<double>();
    g.ap = j.at("ap").get<double>();
    g.ratio = j.at("ratio").get<double>();
    g.epsilon = j.at("epsilon").get<double>();
    return g;
  } catch (const json::exception& e) {
    throw ParseError(std::string("gap report: ") + e.what());
  }
}

inline json to_json(const RevenueReport& r) {
  return json{{"mechanism", mechanism_name(r.mechanism)},
              {"revenue", r.revenue},
              {"prices", r.prices},
              {"stderr", r.std_error},
              {"trials", r.trials},
              {"seed", r.seed}};
}

inline RevenueReport revenue_report_from_json(const json& j) {
  try {
    RevenueReport r;
    const auto name = j.at("mechanism").get<std::string>();
    if (name == "AP") r.mechanism = Mechanism::AP;
    else if (name == "SPP") r.mechanism = Mechanism::SPP;
    else if (name == "OPT") r.mechanism = Mechanism::OPT;
    else if (name == "EAR") r.mechanism = Mechanism::EAR;
    else throw ParseError("revenue report: unknown mechanism " + name);
    r.revenue = j.at("revenue").get<double>();
    r.prices = j.at("prices").get<std::vector<double>>();
    r.std_error = j.at("stderr").get<double>();
    r.trials = j.at("trials").get<std::int64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("revenue report: ") + e.what());
  }
}

inline json to_json(const WorstCaseSolution& s) {
  json table = json::array();
  for (const auto& p : s.d1_table) table.push_back({p.x, p.d1, p.r, p.q});
  json out{{"k", s.k},
           {"alpha", s.alpha},
           {"d1_alpha", s.d1_alpha},
           {"beta", s.beta},
           {"ear", s.ear_value},
           {"asymptotic_exact", s.asymptotic_exact},
           {"asymptotic_stirling", s.asymptotic_stirling},
           {"d1_table", std::move(table)}};
  if (s.opt_k1) out["opt_k1"] = *s.opt_k1;
  return out;
}

inline WorstCaseSolution worst_case_from_json(const json& j) {
  try {
    WorstCaseSolution s;
    s.k = j.at("k").get<std::int64_t>();
    s.alpha = j.at("alpha").get<double>();
    s.d1_alpha = j.at("d1_alpha").get<double>();
    s.beta = j.at("beta").get<double>();
    s.ear_value = j.at("ear").get<double>();
    s.asymptotic_exact = j.at("asymptotic_exact").get<double>();
    s.asymptotic_stirling = j.at("asymptotic_stirling").get<double>();
    if (j.contains("opt_k1")) s.opt_k1 = j.at("opt_k1").get<double>();
    for (const auto& row : j.at("d1_table"))
      s.d1_table.push_back({row.at(0).get<double>(), row.at(1).get<double>(),
                            row.at(2).get<double>(), row.at(3).get<double>()});
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("worst-case solution: ") + e.what());
  }
}

inline json to_json(const BoundTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row{{"k", r.k},
             {"asymptotic_exact", r.asymptotic_exact},
             {"asymptotic_stirling", r.asymptotic_stirling},
             {"tightest", r.tightest},
             {"source", r.source}};
    if (r.ear_value) row["ear"] = *r.ear_value;
    rows.push_back(std::move(row));
  }
  return json{{"rows", std::move(rows)}, {"universal", t.universal}};
}

inline BoundTable bound_table_from_json(const json& j) {
  try {
    BoundTable t;
    t.universal = j.at("universal").get<double>();
    for (const auto& row : j.at("rows")) {
      BoundRow r;
      r.k = row.at("k").get<std::int64_t>();
      r.asymptotic_exact = row.at("asymptotic_exact").get<double>();
      r.asymptotic_stirling = row.at("asymptotic_stirling").get<double>();
      r.tightest = row.at("tightest").get<double>();
      r.source = row.at("source").get<std::string>();
      if (row.contains("ear")) r.ear_value = row.at("ear").get<double>();
      t.rows.push_back(std::move(r));
    }
    return t;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bound table: ") + e.what());
  }
}

inline json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
}

}  // namespace apricot
