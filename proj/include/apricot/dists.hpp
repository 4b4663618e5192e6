#pragma once

// Value distributions in quantile space: truncated-Pareto ("triangular")
// agents, piecewise revenue curves, regularity checks, ironing, tail
// flattening and the decomposition of a curve into triangular agents.
//
// A triangular agent is parameterized by its monopoly revenue r* and
// monopoly quantile q*; the monopoly value is v* = r*/q* (+inf when q* = 0).
// Its revenue curve is the triangle (0,0) -> (q*, r*) -> (1, 0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace apricot {

inline constexpr double kSlopeTol = 1e-9;  // relative tolerance for slope/concavity checks

struct TriangularAgent {
  double r_star = 1.0;      // monopoly revenue, > 0
  double q_star = 1.0;      // monopoly quantile, in [0, 1]
  std::int64_t count = 1;   // multiplicity of identical agents

  TriangularAgent() = default;
  TriangularAgent(double r, double q, std::int64_t n = 1) : r_star(r), q_star(q), count(n) {
    validate();
  }

  void validate() const {
    if (!(r_star > 0.0) || !std::isfinite(r_star))
      throw std::invalid_argument("TriangularAgent: r_star must be positive");
    if (!(q_star >= 0.0 && q_star <= 1.0))
      throw std::invalid_argument("TriangularAgent: q_star must be in [0,1]");
    if (count < 1) throw std::invalid_argument("TriangularAgent: count must be >= 1");
  }

  // Monopoly value r*/q*; +inf for q* = 0.
  double monopoly_value() const {
    return q_star > 0.0 ? r_star / q_star : std::numeric_limits<double>::infinity();
  }
};

struct Market {
  std::int64_t supply = 1;             // number of identical units, k >= 1
  std::vector<TriangularAgent> agents; // agent types; multiplicity via count

  Market() = default;
  Market(std::int64_t k, std::vector<TriangularAgent> a) : supply(k), agents(std::move(a)) {
    validate();
  }

  void validate() const {
    if (supply < 1) throw std::invalid_argument("Market: supply must be >= 1");
    for (const auto& a : agents) a.validate();
  }

  std::int64_t total_agents() const {
    std::int64_t n = 0;
    for (const auto& a : agents) n += a.count;
    return n;
  }
};

// CDF of a triangular agent at value v.
inline double tri_cdf(const TriangularAgent& agent, double v) {
  if (!(v >= 0.0)) throw std::invalid_argument("tri_cdf: v must be nonnegative");
  if (agent.q_star > 0.0 && v >= agent.monopoly_value()) return 1.0;
  return 1.0 - 1.0 / (1.0 + (v / agent.r_star) * (1.0 - agent.q_star));
}

// Pr[value >= p]; at p = v* this includes the point mass, so the result is
// exactly q*. Above v* it is zero.
inline double tri_accept_prob(const TriangularAgent& agent, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("tri_accept_prob: p must be positive");
  const double vstar = agent.monopoly_value();
  if (p > vstar) return 0.0;
  if (p == vstar) return agent.q_star;
  return 1.0 / (1.0 + (p / agent.r_star) * (1.0 - agent.q_star));
}

struct CurvePoint {
  double q = 0.0;
  double r = 0.0;
};

// Piecewise-linear revenue curve in quantile space. Knots start at (0, 0);
// quantiles strictly increase; evaluation interpolates linearly.
struct RevenueCurve {
  std::vector<CurvePoint> knots;

  RevenueCurve() = default;
  explicit RevenueCurve(std::vector<CurvePoint> k) : knots(std::move(k)) { validate(); }

  void validate() const {
    if (knots.size() < 2) throw std::invalid_argument("RevenueCurve: needs at least two knots");
    if (knots.front().q != 0.0 || knots.front().r != 0.0)
      throw std::invalid_argument("RevenueCurve: first knot must be (0,0)");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(knots[i].q >= 0.0 && knots[i].q <= 1.0 + 1e-12))
        throw std::invalid_argument("RevenueCurve: quantiles must lie in [0,1]");
      if (!(knots[i].r >= 0.0)) throw std::invalid_argument("RevenueCurve: revenues must be nonnegative");
      if (i > 0 && !(knots[i].q > knots[i - 1].q))
        throw std::invalid_argument("RevenueCurve: quantiles must strictly increase");
    }
  }

  double max_quantile() const { return knots.back().q; }

  double operator()(double q) const {
    if (q <= 0.0) return 0.0;
    if (q >= knots.back().q) return knots.back().r;
    auto it = std::upper_bound(knots.begin(), knots.end(), q,
                               [](double x, const CurvePoint& p) { return x < p.q; });
    const CurvePoint& hi = *it;
    const CurvePoint& lo = *(it - 1);
    const double t = (q - lo.q) / (hi.q - lo.q);
    return lo.r + t * (hi.r - lo.r);
  }

  // Index of the monopoly knot: max revenue, smallest quantile on ties
  // (ties within 1e-12 relative count as equal).
  std::size_t monopoly_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (knots[i].r > knots[best].r * (1.0 + 1e-12)) best = i;
    return best;
  }

  bool is_concave(double rel_tol = kSlopeTol) const {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < knots.size(); ++i) {
      const double s = (knots[i].r - knots[i - 1].r) / (knots[i].q - knots[i - 1].q);
      const double scale = std::max({std::fabs(s), std::fabs(prev), 1.0});
      if (s > prev + rel_tol * scale) return false;
      prev = std::min(prev, s);
    }
    return true;
  }
};

// A distribution over nonnegative values, stored as its revenue curve
// extended to quantile 1 (so the CDF reaches 1). Atoms appear as segments
// collinear with the origin; every other segment is a continuous
// truncated-Pareto piece. The maximum value is the initial slope.
struct PiecewiseDistribution {
  RevenueCurve curve;

  explicit PiecewiseDistribution(RevenueCurve c) : curve(std::move(c)) {
    if (std::fabs(curve.knots.back().q - 1.0) > 1e-12)
      throw std::invalid_argument("PiecewiseDistribution: curve must extend to quantile 1");
    // v(q) = R(q)/q must be nonincreasing for the curve to define a distribution.
    for (std::size_t i = 1; i < curve.knots.size(); ++i) {
      const auto& a = curve.knots[i - 1];
      const auto& b = curve.knots[i];
      const double s = (b.r - a.r) / (b.q - a.q);
      if (i > 1) {
        const double v_left = a.r / a.q;
        if (s > v_left * (1.0 + kSlopeTol) + kSlopeTol)
          throw std::invalid_argument("PiecewiseDistribution: value map not nonincreasing");
      }
    }
  }

  // Distribution whose revenue curve is the standard piecewise-linear curve
  // of the given (value, probability) atoms, with knots at the cumulative
  // quantiles. Between adjacent support values the curve distribution
  // interpolates continuously (mixing the two neighboring prices).
  static PiecewiseDistribution from_atoms(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw std::invalid_argument("from_atoms: no atoms");
    double mass = 0.0;
    for (auto& [v, p] : atoms) {
      if (v < 0.0) throw std::invalid_argument("from_atoms: negative value");
      if (!(p > 0.0)) throw std::invalid_argument("from_atoms: nonpositive mass");
      mass += p;
    }
    if (std::fabs(mass - 1.0) > 1e-9) throw std::invalid_argument("from_atoms: masses must sum to 1");
    for (auto& [v, p] : atoms) p /= mass;
    std::sort(atoms.begin(), atoms.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::vector<CurvePoint> knots{{0.0, 0.0}};
    double q = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      double p = atoms[i].second;
      while (i + 1 < atoms.size() && atoms[i + 1].first == atoms[i].first) p += atoms[++i].second;
      q = std::min(q + p, 1.0);
      knots.push_back({q, q * atoms[i].first});
    }
    knots.back().q = 1.0;
    knots.back().r = atoms.back().first;  // R(1) = lowest support value
    return PiecewiseDistribution(RevenueCurve(std::move(knots)));
  }

  static PiecewiseDistribution from_triangular(const TriangularAgent& a) {
    if (a.q_star == 0.0)
      throw std::invalid_argument("from_triangular: q* = 0 has no finite revenue-curve representation");
    std::vector<CurvePoint> knots{{0.0, 0.0}};
    if (a.q_star < 1.0) {
      knots.push_back({a.q_star, a.r_star});
      knots.push_back({1.0, 0.0});
    } else {
      knots.push_back({1.0, a.r_star});
    }
    return PiecewiseDistribution(RevenueCurve(std::move(knots)));
  }

  double max_value() const {
    const auto& k = curve.knots;
    return k[1].r / k[1].q;
  }

  // Quantile map q(v) = Pr[value >= v] when strict = false, Pr[value > v]
  // when strict = true. The value map v(q) = R(q)/q is continuous and
  // nonincreasing; an atom occupies a quantile interval where it is constant.
  double exceed_prob(double v, bool strict) const {
    if (v < 0.0) throw std::invalid_argument("exceed_prob: negative value");
    const auto& k = curve.knots;
    for (std::size_t i = 1; i < k.size(); ++i) {
      const auto& a = k[i - 1];
      const auto& b = k[i];
      const double s = (b.r - a.r) / (b.q - a.q);
      const double v_hi = (i == 1) ? s : a.r / a.q;  // value at the left end
      const double v_lo = b.r / b.q;                 // value at the right end
      if (strict ? v >= v_hi : v > v_hi) return a.q;
      if (strict ? v >= v_lo : v > v_lo) {
        if (v_hi - v_lo <= std::fabs(v_hi) * 1e-14)  // atom: constant value piece
          return strict ? a.q : b.q;
        return (a.r - s * a.q) / (v - s);  // solve (r_a + s (q - q_a)) / q = v
      }
    }
    return 1.0;
  }

  double quantile_of_value(double v) const { return exceed_prob(v, false); }

  double cdf(double v) const { return 1.0 - exceed_prob(v, true); }

  double value_at_quantile(double q) const {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("value_at_quantile: q must be in (0,1]");
    return curve(q) / q;
  }
};

// Revenue curve of a distribution; knots at every quantile breakpoint.
inline RevenueCurve revenue_curve_of(const PiecewiseDistribution& dist) { return dist.curve; }

// Least concave upper envelope (upper convex hull of the knots). The output
// knots are a subset of the input knots; endpoints are preserved.
inline RevenueCurve iron(const RevenueCurve& curve) {
  const auto& kn = curve.knots;
  std::vector<CurvePoint> hull;
  hull.reserve(kn.size());
  for (const auto& p : kn) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      // drop b when it lies on or below chord a..p
      const double cross = (b.q - a.q) * (p.r - a.r) - (p.q - a.q) * (b.r - a.r);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  return RevenueCurve(std::move(hull));
}

// Replace the curve past its monopoly knot by the straight tail to (1, 0),
// i.e. give the distribution a constant negative virtual value below v*.
// Requires a concave input defined up to quantile 1.
inline RevenueCurve flatten_negative_virtual(const RevenueCurve& curve) {
  if (!curve.is_concave()) throw std::invalid_argument("flatten_negative_virtual: curve not concave");
  const std::size_t m = curve.monopoly_index();
  std::vector<CurvePoint> knots(curve.knots.begin(), curve.knots.begin() + m + 1);
  if (knots.back().q < 1.0 - 1e-12) knots.push_back({1.0, 0.0});
  return RevenueCurve(std::move(knots));
}

// Prefix of the curve up to (and including) the monopoly knot.
inline RevenueCurve truncate_at_monopoly(const RevenueCurve& curve) {
  const std::size_t m = curve.monopoly_index();
  if (m == 0) throw std::invalid_argument("truncate_at_monopoly: monopoly at q = 0");
  return RevenueCurve(std::vector<CurvePoint>(curve.knots.begin(), curve.knots.begin() + m + 1));
}

// One triangular agent per linear segment of a concave increasing curve
// (iron and truncate at the monopoly knot first). Piece z gets
// (r_z - r_{z-1}, q_z - q_{z-1}); its monopoly value is the segment slope.
inline std::vector<TriangularAgent> decompose_to_triangles(const RevenueCurve& curve) {
  std::vector<TriangularAgent> out;
  out.reserve(curve.knots.size() - 1);
  for (std::size_t i = 1; i < curve.knots.size(); ++i) {
    const double dr = curve.knots[i].r - curve.knots[i - 1].r;
    const double dq = curve.knots[i].q - curve.knots[i - 1].q;
    if (!(dr > 0.0))
      throw std::invalid_argument("decompose_to_triangles: nonpositive revenue increment (truncate at the monopoly knot first)");
    out.emplace_back(dr, dq);
  }
  return out;
}

inline bool check_regular(const PiecewiseDistribution& dist) {
  return revenue_curve_of(dist).is_concave();
}

// Quasi-regularity: the conditional expected virtual value E[phi(v^) | v^ <= v]
// must be weakly increasing in v. With phi read off as marginal revenue
// (curve slope), E[phi ; v^ <= v(q_z)] telescopes to R(1) - R(q_z), so the
// condition is that the chord slope from (q_z, R(q_z)) to (1, R(1)) is
// nonincreasing across knots. Between knots the chord slope is monotone, so
// checking knots is exact.
inline bool check_quasi_regular(const PiecewiseDistribution& dist) {
  const auto& kn = dist.curve.knots;
  const double q1 = kn.back().q;
  const double r1 = kn.back().r;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < kn.size(); ++i) {
    const double g = (r1 - kn[i].r) / (q1 - kn[i].q);
    const double scale = std::max({std::fabs(g), std::fabs(prev), 1.0});
    if (g > prev + kSlopeTol * scale) return false;
    prev = std::min(prev, g);
  }
  return true;
}

// Largest single-agent share of the given optimal revenue: max_i r*_i / OPT.
// The market is eps-large for every eps at or above this value.
inline double epsilon_of_market(const Market& market, double opt_revenue) {
  if (!(opt_revenue > 0.0)) throw std::invalid_argument("epsilon_of_market: opt_revenue must be positive");
  double top = 0.0;
  for (const auto& a : market.agents) top = std::max(top, a.r_star);
  return top / opt_revenue;
}

// Split every agent into m equal triangular shards Tri(r*/m, q*/m). Monopoly
// values are preserved; each shard's revenue share drops by a factor m.
inline Market split_agents(const Market& market, std::int64_t m) {
  if (m < 1) throw std::invalid_argument("split_agents: m must be >= 1");
  Market out;
  out.supply = market.supply;
  out.agents.reserve(market.agents.size());
  for (const auto& a : market.agents)
    out.agents.push_back(TriangularAgent(a.r_star / static_cast<double>(m),
                                         a.q_star / static_cast<double>(m), a.count * m));
  return out;
}

}  // namespace apricot
