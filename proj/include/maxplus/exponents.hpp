#pragma once

// Lyapunov exponents: exact maximum cycle means for deterministic laws and
// Monte Carlo estimators for the top and bottom exponents of general laws,
// plus per-component exponents and the exact coordinate limits of the
// bundled Markov scenario.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "maxplus/estimate.hpp"
#include "maxplus/law.hpp"
#include "maxplus/parallel.hpp"
#include "maxplus/structure.hpp"
#include "maxplus/tropical.hpp"

namespace maxplus {

/// Maximum circuit mean of the finite-entry graph of a square matrix, via
/// the d+1-level dynamic program run per strongly connected component.
/// Bottom when the graph has no circuit.
inline TropicalValue karp_max_cycle_mean(const TropicalMatrix& a) {
  if (!a.square()) throw std::invalid_argument("cycle mean needs a square matrix");
  const double ninf = -std::numeric_limits<double>::infinity();
  const SccSkeleton s = scc_skeleton(support_graph_of(a));

  double best = ninf;
  for (const auto& comp : s.components) {
    if (comp.trivial) continue;
    const std::size_t m = comp.nodes.size();
    // Arcs inside the component, relabeled to 0..m-1.
    std::vector<std::size_t> pos(a.rows(), 0);
    for (std::size_t k = 0; k < m; ++k) pos[comp.nodes[k]] = k;
    struct Arc {
      std::size_t from, to;
      double weight;
    };
    std::vector<Arc> arcs;
    for (std::size_t u = 0; u < m; ++u) {
      for (std::size_t v = 0; v < m; ++v) {
        const TropicalValue w = a.at(comp.nodes[u], comp.nodes[v]);
        if (w.is_finite()) arcs.push_back({pos[comp.nodes[u]], pos[comp.nodes[v]], w.raw()});
      }
    }
    // Longest walks of each length from a fixed source (node 0 of the
    // component; every node is reachable inside an s.c.c.).
    std::vector<std::vector<double>> walk(m + 1, std::vector<double>(m, ninf));
    walk[0][0] = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
      for (const Arc& arc : arcs) {
        if (walk[k - 1][arc.from] == ninf) continue;
        walk[k][arc.to] = std::max(walk[k][arc.to], walk[k - 1][arc.from] + arc.weight);
      }
    }
    for (std::size_t v = 0; v < m; ++v) {
      if (walk[m][v] == ninf) continue;
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < m; ++k) {
        if (walk[k][v] == ninf) continue;
        worst = std::min(worst,
                         (walk[m][v] - walk[k][v]) / static_cast<double>(m - k));
      }
      best = std::max(best, worst);
    }
  }
  return TropicalValue::from_raw(best);
}

struct McParams {
  std::int64_t steps = 10'000;
  std::int64_t trials = 1'000;
  std::uint64_t seed = 0;
};

namespace detail {

enum class TrajectoryStat { kMax, kMin };

inline double trajectory_statistic(const MatrixLaw& law, std::int64_t steps,
                                   std::uint64_t seed, std::uint64_t trial,
                                   TrajectoryStat stat) {
  SampleStream stream(law, seed, trial);
  ShiftedVector x = ShiftedVector::zeros(law.dimension());
  for (std::int64_t k = 0; k < steps; ++k) x.step(stream.next());
  const TropicalValue v = stat == TrajectoryStat::kMax ? x.max_coordinate()
                                                       : x.min_coordinate();
  return v.raw() / static_cast<double>(steps);
}

inline ExponentEstimate run_trajectory_estimate(const MatrixLaw& law,
                                                const McParams& p,
                                                TrajectoryStat stat) {
  if (p.steps < 1 || p.trials < 1) {
    throw std::invalid_argument("estimation needs steps >= 1 and trials >= 1");
  }
  const std::int64_t trials =
      law.family() == LawFamily::kDeterministic ? 1 : p.trials;
  std::vector<double> stats(static_cast<std::size_t>(trials));
  parallel_for_trials(stats.size(), [&](std::size_t t) {
    stats[t] = trajectory_statistic(law, p.steps, p.seed, t, stat);
  });
  // A trial whose statistic is -inf (no finite coordinate survived) drags the
  // mean to -inf, matching the extended-real semantics of the average.
  bool any_bottom = false;
  double mean = 0.0;
  for (const double s : stats) {
    if (std::isinf(s)) any_bottom = true;
    mean += s;
  }
  if (any_bottom) {
    return ExponentEstimate::monte_carlo(TropicalValue::bottom(), 0.0, p.steps,
                                         trials);
  }
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (const double s : stats) var += (s - mean) * (s - mean);
  const double std_error =
      trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1) /
                             static_cast<double>(trials))
                 : 0.0;
  return ExponentEstimate::monte_carlo(TropicalValue::finite(mean), std_error,
                                       p.steps, trials);
}

inline std::string describe_matrix(const MatrixLaw& law, std::size_t index) {
  if (law.family() == LawFamily::kMarkovModulated) {
    return "emission \"" + law.states()[index] + "\"";
  }
  std::ostringstream out;
  out << "atom " << index;
  return out.str();
}

}  // namespace detail

/// Monte Carlo estimate of lim max_i x_i(n,0)/n. Deterministic laws run a
/// single trial (the trajectory carries no randomness).
inline ExponentEstimate estimate_top_exponent(const MatrixLaw& law,
                                              const McParams& p) {
  return detail::run_trajectory_estimate(law, p, detail::TrajectoryStat::kMax);
}

/// Monte Carlo estimate of lim min_i x_i(n,0)/n. Requires every matrix the
/// law can emit to have a finite entry on each row, otherwise the minimum
/// statistic degenerates.
inline ExponentEstimate estimate_bottom_exponent(const MatrixLaw& law,
                                                 const McParams& p) {
  if (const auto v = law.row_condition_violation()) {
    std::ostringstream msg;
    msg << "bottom exponent requires a finite entry on each row: "
        << detail::describe_matrix(law, v->first) << ", row node "
        << (v->second + 1) << " is all -inf";
    throw std::invalid_argument(msg.str());
  }
  return detail::run_trajectory_estimate(law, p, detail::TrajectoryStat::kMin);
}

/// Exponent of every component's submatrix law: exact bottom for trivial
/// components, exact cycle means for deterministic laws, Monte Carlo
/// otherwise. Component c uses the derived seed mix64(seed + c + 1) so
/// component estimates are decorrelated but reproducible.
inline std::vector<ExponentEstimate> component_exponents(
    const MatrixLaw& law, const SccSkeleton& skeleton, const McParams& p) {
  std::vector<ExponentEstimate> out(skeleton.components.size());
  for (std::size_t c = 0; c < skeleton.components.size(); ++c) {
    const auto& comp = skeleton.components[c];
    if (comp.trivial) {
      out[c] = ExponentEstimate::exact(TropicalValue::bottom());
      continue;
    }
    const MatrixLaw sub = submatrix_law(law, comp.nodes);
    if (law.family() == LawFamily::kDeterministic) {
      out[c] = ExponentEstimate::exact(karp_max_cycle_mean(sub.support_matrices()[0]));
    } else {
      McParams sp = p;
      sp.seed = maxplus::detail::mix64(p.seed + c + 1);
      out[c] = estimate_top_exponent(sub, sp);
    }
  }
  return out;
}

/// Per-coordinate scaled limits of the bundled two-mode Markov scenario and
/// the exact law of the first coordinate's limit, read off the stationary
/// distribution.
struct MarkovCoordinateLimits {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double prob_gamma1 = 0.0;  // P(limit of y_1(n,0)/n equals gamma1)
  double prob_gamma2 = 0.0;
  double expected_reward = 0.0;  // stationary mean of the tracked increment
};

inline MarkovCoordinateLimits exact_markov_coordinate_limits(const MatrixLaw& law) {
  if (law.family() != LawFamily::kMarkovModulated || !law.example1_params()) {
    throw std::invalid_argument(
        "coordinate limits are defined for laws built by example1_law");
  }
  const Example1Params& params = *law.example1_params();
  MarkovCoordinateLimits out;
  out.gamma1 = params.gamma1;
  out.gamma2 = params.gamma2;

  // The increment of the tracked coordinate is the single finite entry on
  // the row the chain points at; it is nonzero only in state (A,1).
  const auto& states = law.states();
  const auto& pi = law.stationary();
  std::unordered_map<std::string, double> reward;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const std::size_t row = static_cast<std::size_t>(states[s].back() - '1');
    const TropicalMatrix& emission = law.support_matrices()[s];
    for (std::size_t j = 0; j < emission.cols(); ++j) {
      if (emission.at(row, j).is_finite()) {
        reward[states[s]] = emission.at(row, j).raw();
        break;
      }
    }
    if (states[s].back() == '1') {
      out.prob_gamma1 += pi[s];
    } else {
      out.prob_gamma2 += pi[s];
    }
  }
  out.expected_reward = stationary_analysis(law, reward).expected_reward;
  return out;
}

}  // namespace maxplus
