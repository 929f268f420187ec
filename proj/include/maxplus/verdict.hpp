#pragma once

// The cycle-time decision for finitely-supported i.i.d. laws: row conditions
// on the class submatrices, the verdict with witnesses, the limit vector on
// success, plus simulation probes (limit distribution, oscillation tracking)
// and an exact small-horizon distribution oracle.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "maxplus/estimate.hpp"
#include "maxplus/exponents.hpp"
#include "maxplus/law.hpp"
#include "maxplus/parallel.hpp"
#include "maxplus/structure.hpp"
#include "maxplus/tropical.hpp"

namespace maxplus {

struct RowConditionWitness {
  std::size_t atom;  // index into the law's matrices
  std::size_t node;  // 0-based row node whose restricted row is all bottom
};

struct RowConditionResult {
  std::size_t component = 0;
  bool holds = true;
  std::vector<RowConditionWitness> witnesses;
};

/// Checks that every atom of the law, restricted to `nodes`, has a finite
/// entry on each row; collects every violating (atom, node) pair.
inline RowConditionResult check_row_condition(const MatrixLaw& law,
                                              std::span<const std::size_t> nodes) {
  if (law.family() == LawFamily::kMarkovModulated) {
    throw std::invalid_argument("row-condition check applies to finite-support laws");
  }
  if (nodes.empty()) throw std::invalid_argument("empty node set");
  for (const std::size_t v : nodes) {
    if (v >= law.dimension()) {
      throw std::invalid_argument("node set exceeds the law dimension");
    }
  }
  RowConditionResult result;
  for (std::size_t k = 0; k < law.support_matrices().size(); ++k) {
    const TropicalMatrix& m = law.support_matrices()[k];
    for (const std::size_t i : nodes) {
      bool finite = false;
      for (const std::size_t j : nodes) {
        if (m.at(i, j).is_finite()) {
          finite = true;
          break;
        }
      }
      if (!finite) result.witnesses.push_back({k, i});
    }
  }
  result.holds = result.witnesses.empty();
  return result;
}

enum class Convergence { kConverges, kDiverges, kIndeterminateTie };

struct CycleTimeVerdict {
  Convergence converges = Convergence::kDiverges;
  SccAnalysis analysis;
  std::vector<RowConditionResult> row_conditions;  // per component
  std::optional<TropicalVector> limit;             // present iff converges
  std::vector<EstimateMode> limit_provenance;      // per coordinate
  bool tie_sensitive = false;
};

struct VerdictParams {
  std::int64_t steps = 10'000;
  std::int64_t trials = 1'000;
  std::uint64_t seed = 0;
  double epsilon_gamma = kDefaultEpsilonGamma;
};

/// Full decision pipeline: support graph, components, component exponents,
/// class sets, row condition on every class submatrix. Requires a
/// deterministic or finitely-supported i.i.d. law whose every atom has a
/// finite entry on each row (otherwise the recursion itself is ill-posed).
inline CycleTimeVerdict decide_cycle_time(const MatrixLaw& law,
                                          const VerdictParams& p) {
  if (law.family() == LawFamily::kMarkovModulated) {
    throw std::invalid_argument(
        "the cycle-time criterion is for i.i.d. laws; use the simulation "
        "commands for Markov-modulated models");
  }
  if (const auto v = law.row_condition_violation()) {
    std::ostringstream msg;
    msg << "ill-posed recursion: " << detail::describe_matrix(law, v->first)
        << " has no finite entry on row node " << (v->second + 1);
    throw std::invalid_argument(msg.str());
  }

  const SupportGraph graph = build_support_graph(law);
  const SccSkeleton skeleton = scc_skeleton(graph);
  auto gammas =
      component_exponents(law, skeleton, McParams{p.steps, p.trials, p.seed});
  CycleTimeVerdict verdict;
  verdict.analysis = scc_decompose(graph, std::move(gammas), p.epsilon_gamma);
  verdict.tie_sensitive = verdict.analysis.tie_sensitive;

  bool all_hold = true;
  for (std::size_t c = 0; c < verdict.analysis.skeleton.components.size(); ++c) {
    RowConditionResult rc =
        check_row_condition(law, verdict.analysis.classes[c].class_nodes);
    rc.component = c;
    all_hold = all_hold && rc.holds;
    verdict.row_conditions.push_back(std::move(rc));
  }

  if (verdict.tie_sensitive) {
    verdict.converges = Convergence::kIndeterminateTie;
  } else if (all_hold) {
    verdict.converges = Convergence::kConverges;
  } else {
    verdict.converges = Convergence::kDiverges;
  }

  if (verdict.converges == Convergence::kConverges) {
    TropicalVector limit(law.dimension());
    verdict.limit_provenance.assign(law.dimension(), EstimateMode::kExact);
    for (std::size_t i = 0; i < law.dimension(); ++i) {
      const std::size_t c = verdict.analysis.skeleton.component_of[i];
      const auto& cls = verdict.analysis.classes[c];
      limit[i] = cls.gamma_downstream;
      for (const std::size_t t : cls.downstream_components) {
        if (verdict.analysis.gamma[t].mode == EstimateMode::kMonteCarlo) {
          verdict.limit_provenance[i] = EstimateMode::kMonteCarlo;
          break;
        }
      }
    }
    verdict.limit = std::move(limit);
  }
  return verdict;
}

inline nlohmann::json verdict_to_json(const CycleTimeVerdict& v) {
  nlohmann::json j;
  switch (v.converges) {
    case Convergence::kConverges:
      j["converges"] = true;
      break;
    case Convergence::kDiverges:
      j["converges"] = false;
      break;
    case Convergence::kIndeterminateTie:
      j["converges"] = "indeterminate-tie";
      break;
  }
  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t c = 0; c < v.analysis.skeleton.components.size(); ++c) {
    const auto& comp = v.analysis.skeleton.components[c];
    nlohmann::json jc;
    jc["id"] = c + 1;
    jc["nodes"] = detail::nodes_to_json(comp.nodes);
    jc["H"] = detail::nodes_to_json(v.analysis.classes[c].class_nodes);
    nlohmann::json wits = nlohmann::json::array();
    for (const auto& w : v.row_conditions[c].witnesses) {
      wits.push_back({{"atom", w.atom}, {"row", w.node + 1}});
    }
    jc["rowCondition"] = {{"holds", v.row_conditions[c].holds},
                          {"witnesses", std::move(wits)}};
    jc["gamma"] = estimate_to_json(v.analysis.gamma[c]);
    comps.push_back(std::move(jc));
  }
  j["components"] = std::move(comps);
  if (v.limit) {
    j["limit"] = vector_to_json(*v.limit);
    nlohmann::json prov = nlohmann::json::array();
    for (const auto mode : v.limit_provenance) {
      prov.push_back(mode == EstimateMode::kExact ? "exact" : "estimated");
    }
    j["limitProvenance"] = std::move(prov);
  }
  j["tieSensitive"] = v.tie_sensitive;
  return j;
}

struct LimitCluster {
  double center = 0.0;
  std::size_t count = 0;
  double mass = 0.0;
};

struct LimitDistribution {
  std::vector<double> finals;  // scaled final coordinates; -inf possible
  std::vector<LimitCluster> clusters;
  std::size_t bottom_trials = 0;
  std::int64_t steps = 0;
  std::int64_t trials = 0;
  std::size_t coordinate = 0;  // 0-based

  /// Empirical mass within `radius` of `center`.
  double mass_near(double center, double radius) const {
    std::size_t count = 0;
    for (const double v : finals) {
      if (std::isfinite(v) && std::abs(v - center) <= radius) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(finals.size());
  }
};

inline constexpr double kDefaultClusterRadius = 0.05;

/// Per trial, the scaled final coordinate of the backward product applied to
/// the 0-vector. Finite values are grouped greedily into clusters of the
/// given radius.
inline LimitDistribution simulate_limit_distribution(
    const MatrixLaw& law, std::int64_t steps, std::int64_t trials,
    std::uint64_t seed, std::size_t coordinate,
    double radius = kDefaultClusterRadius) {
  if (steps < 1 || trials < 1) {
    throw std::invalid_argument("simulation needs steps >= 1 and trials >= 1");
  }
  if (coordinate >= law.dimension()) {
    throw std::invalid_argument("coordinate out of range");
  }
  LimitDistribution dist;
  dist.steps = steps;
  dist.trials = trials;
  dist.coordinate = coordinate;
  dist.finals.assign(static_cast<std::size_t>(trials), 0.0);
  detail::parallel_for_trials(dist.finals.size(), [&](std::size_t t) {
    SampleStream stream(law, seed, t, SampleDirection::kBackward);
    const auto seq = sample_forward_refs(law, static_cast<std::size_t>(steps), stream);
    ShiftedVector y = ShiftedVector::zeros(law.dimension());
    for (std::size_t k = seq.size(); k-- > 0;) y.step(*seq[k]);
    dist.finals[t] = y.coordinate(coordinate).raw() / static_cast<double>(steps);
  });

  std::vector<double> sorted;
  for (const double v : dist.finals) {
    if (std::isfinite(v)) {
      sorted.push_back(v);
    } else {
      ++dist.bottom_trials;
    }
  }
  std::sort(sorted.begin(), sorted.end());
  std::size_t begin = 0;
  while (begin < sorted.size()) {
    std::size_t end = begin;
    while (end < sorted.size() && sorted[end] - sorted[begin] <= radius) ++end;
    LimitCluster cluster;
    cluster.count = end - begin;
    for (std::size_t k = begin; k < end; ++k) cluster.center += sorted[k];
    cluster.center /= static_cast<double>(cluster.count);
    cluster.mass = static_cast<double>(cluster.count) / static_cast<double>(trials);
    dist.clusters.push_back(cluster);
    begin = end;
  }
  return dist;
}

struct OscillationTrace {
  std::vector<std::pair<std::int64_t, double>> checkpoints;  // powers of two
  std::int64_t window_begin = 0;
  std::int64_t window_end = 0;
  double window_min = 0.0;
  double window_max = 0.0;
};

/// Forward simulation of one trajectory; records the scaled coordinate at
/// power-of-two checkpoints and its extrema over the window [n/10, n].
inline OscillationTrace track_oscillation(const MatrixLaw& law,
                                          std::int64_t steps, std::uint64_t seed,
                                          std::size_t coordinate) {
  if (steps < 1) throw std::invalid_argument("simulation needs steps >= 1");
  if (coordinate >= law.dimension()) {
    throw std::invalid_argument("coordinate out of range");
  }
  OscillationTrace trace;
  trace.window_begin = std::max<std::int64_t>(1, steps / 10);
  trace.window_end = steps;
  trace.window_min = std::numeric_limits<double>::infinity();
  trace.window_max = -std::numeric_limits<double>::infinity();

  SampleStream stream(law, seed, 0);
  ShiftedVector x = ShiftedVector::zeros(law.dimension());
  std::int64_t next_checkpoint = 1;
  for (std::int64_t k = 1; k <= steps; ++k) {
    x.step(stream.next());
    const double scaled = x.coordinate(coordinate).raw() / static_cast<double>(k);
    if (k == next_checkpoint || k == steps) {
      trace.checkpoints.emplace_back(k, scaled);
      if (k == next_checkpoint) next_checkpoint *= 2;
    }
    if (k >= trace.window_begin) {
      trace.window_min = std::min(trace.window_min, scaled);
      trace.window_max = std::max(trace.window_max, scaled);
    }
  }
  return trace;
}

struct SmallHorizonDistribution {
  std::vector<std::pair<TropicalValue, double>> support;  // ascending values

  double probability_of(TropicalValue v) const {
    for (const auto& [value, prob] : support) {
      if (value == v) return prob;
    }
    return 0.0;
  }
};

inline constexpr std::size_t kSmallHorizonCap = 1'000'000;

/// Exact distribution of x_coordinate(n, 0) by enumerating every atom
/// sequence with its probability. Capped at (#atoms)^n <= 1e6.
inline SmallHorizonDistribution exact_small_n_distribution(const MatrixLaw& law,
                                                           std::int64_t steps,
                                                           std::size_t coordinate) {
  if (law.family() == LawFamily::kMarkovModulated) {
    throw std::invalid_argument("exact distribution applies to finite-support laws");
  }
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (coordinate >= law.dimension()) {
    throw std::invalid_argument("coordinate out of range");
  }
  const std::size_t atom_count = law.support_matrices().size();
  double sequences = 1.0;
  for (std::int64_t k = 0; k < steps; ++k) {
    sequences *= static_cast<double>(atom_count);
    if (sequences > static_cast<double>(kSmallHorizonCap)) {
      throw std::runtime_error("atom-sequence enumeration exceeds the cap");
    }
  }

  std::map<double, double> out;  // raw coordinate value -> probability
  if (atom_count == 1) {
    TropicalVector x = TropicalVector::zeros(law.dimension());
    for (std::int64_t k = 0; k < steps; ++k) x = apply(law.support_matrices()[0], x);
    out[x[coordinate].raw()] = 1.0;
  } else {
    // Depth-first over atom choices, sharing trajectory prefixes. The cap
    // bounds the depth by log2(1e6), so recursion is safe.
    std::vector<TropicalVector> stack{TropicalVector::zeros(law.dimension())};
    auto recurse = [&](auto&& self, std::int64_t depth, double prob) -> void {
      if (depth == steps) {
        out[stack.back()[coordinate].raw()] += prob;
        return;
      }
      for (std::size_t a = 0; a < atom_count; ++a) {
        stack.push_back(apply(law.support_matrices()[a], stack.back()));
        self(self, depth + 1, prob * law.atom_probs()[a]);
        stack.pop_back();
      }
    };
    recurse(recurse, 0, 1.0);
  }

  SmallHorizonDistribution dist;
  for (const auto& [value, p] : out) {
    dist.support.emplace_back(TropicalValue::from_raw(value), p);
  }
  return dist;
}

}  // namespace maxplus
