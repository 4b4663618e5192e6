#pragma once

// Shared test utilities: seeded generators for random markets, atomic
// distributions and curves, plus the exhaustive 2^n order-statistic oracle
// that the DP implementations are checked against.

#include <random>
#include <utility>
#include <vector>

#include "apricot/dists.hpp"

namespace test_util {

// Pr[at most j-1 indicators fire], by summing over all 2^n outcomes.
// Independent of the counting-recurrence implementation path.
inline double enumeration_order_stat_cdf(const std::vector<double>& probs, int j) {
  const std::size_t n = probs.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    int fired = 0;
    double pr = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        ++fired;
        pr *= probs[i];
      } else {
        pr *= 1.0 - probs[i];
      }
    }
    if (fired <= j - 1) total += pr;
  }
  return total;
}

inline apricot::Market random_market(std::mt19937_64& rng, int max_k = 8, int max_types = 50,
                                     std::int64_t max_count = 3) {
  std::uniform_int_distribution<int> kd(1, max_k);
  std::uniform_int_distribution<int> nd(1, max_types);
  std::uniform_int_distribution<std::int64_t> cd(1, max_count);
  std::uniform_real_distribution<double> rd(-2.0, 1.0);
  std::uniform_real_distribution<double> qd(0.02, 1.0);
  apricot::Market m;
  m.supply = kd(rng);
  const int n = nd(rng);
  for (int i = 0; i < n; ++i)
    m.agents.push_back(apricot::TriangularAgent(std::exp(rd(rng)), qd(rng), cd(rng)));
  return m;
}

inline std::vector<std::pair<double, double>> random_atoms(std::mt19937_64& rng, int n_atoms) {
  std::uniform_real_distribution<double> vd(0.05, 10.0);
  std::uniform_real_distribution<double> pd(0.05, 1.0);
  std::vector<std::pair<double, double>> atoms;
  double mass = 0.0;
  for (int i = 0; i < n_atoms; ++i) {
    atoms.emplace_back(vd(rng), pd(rng));
    mass += atoms.back().second;
  }
  for (auto& [v, p] : atoms) p /= mass;
  return atoms;
}

// Random quasi-regular atomic distribution (rejection sampling).
inline apricot::PiecewiseDistribution random_quasi_regular(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nd(1, 6);
  for (;;) {
    auto d = apricot::PiecewiseDistribution::from_atoms(random_atoms(rng, nd(rng)));
    if (apricot::check_quasi_regular(d)) return d;
  }
}

}  // namespace test_util
