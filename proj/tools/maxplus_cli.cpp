// Command-line harness: load model documents, run the cycle-time analysis,
// simulate trajectories and limit distributions, estimate exponents, close
// pattern semigroups, reproduce the bundled scenarios, and expose the exact
// oracles. Reports are deterministic for a fixed command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "maxplus/maxplus.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNoCycleTime = 2;
constexpr int kExitIndeterminate = 3;

struct OutputOpts {
  std::string path;
  std::string format = "json";
};

void emit(const OutputOpts& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out.path);
  if (!file) throw std::runtime_error("cannot write output file: " + out.path);
  file << text;
}

std::string render_json(const json& j) { return j.dump(2) + "\n"; }

bool law_is_stochastic(const maxplus::MatrixLaw& law) {
  if (law.family() == maxplus::LawFamily::kDeterministic) return false;
  if (law.family() == maxplus::LawFamily::kFiniteIid) {
    return law.support_matrices().size() > 1;
  }
  return true;
}

std::uint64_t require_seed(const maxplus::MatrixLaw& law,
                           const std::optional<std::uint64_t>& seed) {
  if (law_is_stochastic(law) && !seed) {
    throw std::invalid_argument("this model is stochastic; pass an explicit --seed");
  }
  return seed.value_or(0);
}

std::size_t to_internal_coordinate(std::int64_t coordinate, std::size_t dim) {
  if (coordinate < 1 || static_cast<std::size_t>(coordinate) > dim) {
    throw std::invalid_argument("coordinate must be in 1.." + std::to_string(dim));
  }
  return static_cast<std::size_t>(coordinate - 1);
}

std::vector<std::size_t> parse_node_list(const std::string& text, std::size_t dim) {
  std::vector<std::size_t> nodes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const long v = std::stol(item);
    if (v < 1 || static_cast<std::size_t>(v) > dim) {
      throw std::invalid_argument("node " + item + " out of range 1.." +
                                  std::to_string(dim));
    }
    nodes.push_back(static_cast<std::size_t>(v - 1));
  }
  if (nodes.empty()) throw std::invalid_argument("empty node list");
  return nodes;
}

json finite_or_ninf(double v) {
  return std::isfinite(v) ? json(v) : json("-inf");
}

// ---------------------------------------------------------------------------
// analyze

std::string verdict_text(const maxplus::CycleTimeVerdict& v) {
  std::ostringstream out;
  switch (v.converges) {
    case maxplus::Convergence::kConverges:
      out << "cycle time exists: the scaled trajectory converges almost surely\n";
      break;
    case maxplus::Convergence::kDiverges:
      out << "no cycle time: a class submatrix can lose every finite entry on a "
             "row\n";
      break;
    case maxplus::Convergence::kIndeterminateTie:
      out << "indeterminate: estimated exponents tie within the tolerance\n";
      break;
  }
  for (std::size_t c = 0; c < v.analysis.skeleton.components.size(); ++c) {
    const auto& comp = v.analysis.skeleton.components[c];
    out << "  component " << (c + 1) << " nodes {";
    for (std::size_t k = 0; k < comp.nodes.size(); ++k) {
      out << (k ? "," : "") << comp.nodes[k] + 1;
    }
    out << "} gamma " << maxplus::to_string(v.analysis.gamma[c].value)
        << (v.analysis.gamma[c].mode == maxplus::EstimateMode::kExact ? " (exact)"
                                                                      : " (mc)")
        << " rowCondition " << (v.row_conditions[c].holds ? "holds" : "fails");
    for (const auto& w : v.row_conditions[c].witnesses) {
      out << " [atom " << w.atom << ", row " << (w.node + 1) << "]";
    }
    out << "\n";
  }
  if (v.limit) {
    out << "  limit:";
    for (std::size_t i = 0; i < v.limit->dim(); ++i) {
      out << " " << maxplus::to_string((*v.limit)[i]);
    }
    out << "\n";
  }
  return out.str();
}

int cmd_analyze(const std::string& model_path, std::int64_t steps,
                std::int64_t trials, std::optional<std::uint64_t> seed,
                double epsilon_gamma, const OutputOpts& out) {
  const maxplus::MatrixLaw law = maxplus::load_law_file(model_path);
  const maxplus::VerdictParams params{steps, trials, require_seed(law, seed),
                                      epsilon_gamma};
  const maxplus::CycleTimeVerdict verdict = maxplus::decide_cycle_time(law, params);

  if (out.format == "json") {
    json report;
    report["model"] = model_path;
    report["analysis"] = maxplus::analysis_to_json(verdict.analysis);
    report["verdict"] = maxplus::verdict_to_json(verdict);
    emit(out, render_json(report));
  } else if (out.format == "text") {
    emit(out, verdict_text(verdict));
  } else {
    throw std::invalid_argument("analyze supports --format json|text");
  }

  switch (verdict.converges) {
    case maxplus::Convergence::kConverges:
      return kExitOk;
    case maxplus::Convergence::kDiverges:
      return kExitNoCycleTime;
    case maxplus::Convergence::kIndeterminateTie:
      return kExitIndeterminate;
  }
  return kExitInputError;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& model_path, std::int64_t steps,
                 std::int64_t trials, std::optional<std::uint64_t> seed_opt,
                 std::int64_t coordinate, const std::string& mode, double radius,
                 const OutputOpts& out) {
  const maxplus::MatrixLaw law = maxplus::load_law_file(model_path);
  const std::uint64_t seed = require_seed(law, seed_opt);
  const std::size_t coord = to_internal_coordinate(coordinate, law.dimension());
  if (trials < 1) throw std::invalid_argument("--trials must be >= 1");

  std::vector<std::pair<std::int64_t, double>> checkpoints;
  std::vector<double> finals;
  maxplus::LimitDistribution dist;

  if (mode == "forward") {
    const auto trace = maxplus::track_oscillation(law, steps, seed, coord);
    checkpoints = trace.checkpoints;
    finals.resize(static_cast<std::size_t>(trials));
    maxplus::detail::parallel_for_trials(finals.size(), [&](std::size_t t) {
      maxplus::SampleStream stream(law, seed, t);
      maxplus::ShiftedVector x = maxplus::ShiftedVector::zeros(law.dimension());
      for (std::int64_t k = 0; k < steps; ++k) x.step(stream.next());
      finals[t] = x.coordinate(coord).raw() / static_cast<double>(steps);
    });
  } else if (mode == "backward") {
    dist = maxplus::simulate_limit_distribution(law, steps, trials, seed, coord,
                                                radius);
    finals = dist.finals;
    // Stepwise series of the first trial, via the running product.
    maxplus::SampleStream stream(law, seed, 0, maxplus::SampleDirection::kBackward);
    maxplus::RunningProduct product(law.dimension());
    std::int64_t next_checkpoint = 1;
    for (std::int64_t k = 1; k <= steps; ++k) {
      product.append(stream.next());
      if (k == next_checkpoint || k == steps) {
        const auto y = product.apply_to_zeros();
        checkpoints.emplace_back(k, y[coord].raw() / static_cast<double>(k));
        if (k == next_checkpoint) next_checkpoint *= 2;
      }
    }
  } else {
    throw std::invalid_argument("--mode must be forward or backward");
  }

  if (out.format == "json") {
    json report;
    report["model"] = model_path;
    report["mode"] = mode;
    report["steps"] = steps;
    report["trials"] = trials;
    report["seed"] = seed;
    report["coordinate"] = coordinate;
    json cps = json::array();
    for (const auto& [step, value] : checkpoints) {
      cps.push_back({{"step", step}, {"value", finite_or_ninf(value)}});
    }
    report["checkpoints"] = std::move(cps);
    json jf = json::array();
    for (const double v : finals) jf.push_back(finite_or_ninf(v));
    report["finals"] = std::move(jf);
    if (mode == "backward") {
      json hist = json::array();
      for (const auto& c : dist.clusters) {
        hist.push_back({{"center", c.center}, {"count", c.count}, {"mass", c.mass}});
      }
      report["histogram"] = std::move(hist);
    }
    emit(out, render_json(report));
  } else if (out.format == "csv") {
    std::ostringstream csv;
    if (mode == "forward") {
      csv << "step,value\n";
      for (const auto& [step, value] : checkpoints) {
        csv << step << "," << value << "\n";
      }
    } else {
      csv << "trial,final\n";
      for (std::size_t t = 0; t < finals.size(); ++t) {
        csv << t << "," << finals[t] << "\n";
      }
    }
    emit(out, csv.str());
  } else if (out.format == "text") {
    std::ostringstream text;
    text << mode << " simulation of coordinate " << coordinate << " over " << steps
         << " steps, " << trials << " trials\n";
    for (const auto& [step, value] : checkpoints) {
      text << "  n=" << step << "  value/n=" << value << "\n";
    }
    emit(out, text.str());
  } else {
    throw std::invalid_argument("simulate supports --format json|text|csv");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate-gamma

int cmd_estimate_gamma(const std::string& model_path, std::int64_t steps,
                       std::int64_t trials, std::optional<std::uint64_t> seed_opt,
                       bool bottom, const OutputOpts& out) {
  const maxplus::MatrixLaw law = maxplus::load_law_file(model_path);
  const maxplus::McParams params{steps, trials, require_seed(law, seed_opt)};
  const auto top = maxplus::estimate_top_exponent(law, params);

  json report;
  report["model"] = model_path;
  report["top"] = maxplus::estimate_to_json(top);
  if (law.family() == maxplus::LawFamily::kDeterministic) {
    report["cycleMean"] = maxplus::tropical_value_to_json(
        maxplus::karp_max_cycle_mean(law.support_matrices()[0]));
  }
  if (bottom) {
    report["bottom"] =
        maxplus::estimate_to_json(maxplus::estimate_bottom_exponent(law, params));
  }

  if (out.format == "json") {
    emit(out, render_json(report));
  } else if (out.format == "text") {
    std::ostringstream text;
    text << "top exponent: " << maxplus::to_string(top.value);
    if (top.mode == maxplus::EstimateMode::kMonteCarlo) {
      text << " +/- " << 1.96 * top.std_error << " (95%)";
    }
    text << "\n";
    if (report.contains("bottom")) {
      text << "bottom exponent: " << report["bottom"]["value"].dump() << "\n";
    }
    emit(out, text.str());
  } else {
    throw std::invalid_argument("estimate-gamma supports --format json|text");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// semigroup

int cmd_semigroup(const std::string& model_path, std::size_t cap, bool list,
                  const std::string& from_set, const std::string& to_set,
                  const OutputOpts& out) {
  const maxplus::MatrixLaw law = maxplus::load_law_file(model_path);
  const auto sg = maxplus::semigroup_closure(law, cap);

  json report;
  report["model"] = model_path;
  report["generators"] = sg.generators.size();
  report["size"] = sg.elements.size();
  report["closed"] = sg.closed;
  if (list) {
    json elems = json::array();
    for (const auto& m : sg.elements) elems.push_back(maxplus::matrix_to_json(m));
    report["elements"] = std::move(elems);
  }
  if (!from_set.empty() || !to_set.empty()) {
    if (from_set.empty() || to_set.empty()) {
      throw std::invalid_argument("--from-set and --to-set go together");
    }
    const auto block_i = parse_node_list(from_set, law.dimension());
    const auto block_j = parse_node_list(to_set, law.dimension());
    const auto cert = maxplus::block_reachability_certificate(sg, block_i, block_j);
    json jc;
    jc["found"] = cert.certificate.has_value();
    jc["elementsSearched"] = cert.elements_searched;
    if (cert.certificate) {
      jc["witness"] = maxplus::matrix_to_json(*cert.certificate);
    }
    report["certificate"] = std::move(jc);
  }

  if (out.format == "json") {
    emit(out, render_json(report));
  } else if (out.format == "text") {
    std::ostringstream text;
    text << "pattern semigroup: " << sg.elements.size() << " elements from "
         << sg.generators.size() << " generators\n";
    emit(out, text.str());
  } else {
    throw std::invalid_argument("semigroup supports --format json|text");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct ScenarioCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<ScenarioCheck> reproduce_example1(double gamma1, double gamma2,
                                              std::int64_t steps,
                                              std::int64_t trials,
                                              std::uint64_t seed) {
  std::vector<ScenarioCheck> checks;
  const maxplus::MatrixLaw law = maxplus::example1_law(gamma1, gamma2);
  const double delta = law.example1_params()->delta;

  {
    ScenarioCheck c;
    c.name = "stationary distribution matches the closed form";
    const auto& pi = law.stationary();
    c.pass = std::abs(pi[0] - gamma1) < 1e-12 && std::abs(pi[1] - delta) < 1e-12 &&
             std::abs(pi[2] - gamma2) < 1e-12 && std::abs(pi[3] - delta) < 1e-12;
    checks.push_back(c);
  }
  const auto limits = maxplus::exact_markov_coordinate_limits(law);
  {
    ScenarioCheck c;
    c.name = "exact limit law of the first coordinate";
    c.pass = std::abs(limits.prob_gamma1 - (gamma1 + delta)) < 1e-12 &&
             std::abs(limits.prob_gamma2 - (gamma2 + delta)) < 1e-12 &&
             std::abs(limits.expected_reward - gamma1) < 1e-12;
    std::ostringstream d;
    d << "P(" << gamma1 << ")=" << limits.prob_gamma1 << ", P(" << gamma2
      << ")=" << limits.prob_gamma2;
    c.detail = d.str();
    checks.push_back(c);
  }
  {
    ScenarioCheck c;
    c.name = "backward Monte Carlo splits mass between the two rates";
    const auto dist =
        maxplus::simulate_limit_distribution(law, steps, trials, seed, 0);
    const double high = dist.mass_near(gamma1, 0.05);
    const double low = dist.mass_near(gamma2, 0.05);
    c.pass = std::abs(high - limits.prob_gamma1) <= 0.03 &&
             std::abs(low - limits.prob_gamma2) <= 0.03;
    std::ostringstream d;
    d << "mass near " << gamma1 << ": " << high << ", near " << gamma2 << ": " << low;
    c.detail = d.str();
    checks.push_back(c);
  }
  return checks;
}

std::vector<ScenarioCheck> reproduce_example2(double p, std::int64_t steps,
                                              std::int64_t trials,
                                              std::uint64_t seed) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("example2 needs 0 < p < 1");
  }
  const double ninf = -std::numeric_limits<double>::infinity();
  const maxplus::MatrixLaw law(std::vector<maxplus::LawAtom>{
      {p, maxplus::TropicalMatrix::from_raw(
              {{0, ninf, ninf}, {0, ninf, ninf}, {0, 1, 1}})},
      {1.0 - p, maxplus::TropicalMatrix::from_raw(
                    {{0, ninf, ninf}, {0, ninf, 0}, {0, 0, ninf}})},
  });
  std::vector<ScenarioCheck> checks;

  {
    ScenarioCheck c;
    c.name = "verdict: no cycle time, witnessed on the class submatrix";
    const auto verdict =
        maxplus::decide_cycle_time(law, maxplus::VerdictParams{10'000, 1'000, seed});
    bool witness_ok = false;
    for (const auto& rc : verdict.row_conditions) {
      for (const auto& w : rc.witnesses) {
        witness_ok = witness_ok || (w.atom == 0 && w.node == 1);
      }
    }
    c.pass = verdict.converges == maxplus::Convergence::kDiverges && witness_ok;
    checks.push_back(c);
  }
  {
    ScenarioCheck c;
    c.name = "first coordinate stays at zero; the maximum counts atoms";
    maxplus::SampleStream stream(law, seed, 0);
    maxplus::ShiftedVector x = maxplus::ShiftedVector::zeros(3);
    std::int64_t stack_draws = 0;
    bool exact = true;
    for (std::int64_t k = 0; k < steps && exact; ++k) {
      const maxplus::TropicalMatrix& m = stream.next();
      if (m.at(2, 2).is_finite()) ++stack_draws;  // the stacking atom
      x.step(m);
      exact = x.coordinate(0) == maxplus::TropicalValue::finite(0) &&
              x.max_coordinate() ==
                  maxplus::TropicalValue::finite(static_cast<double>(stack_draws));
    }
    c.pass = exact;
    checks.push_back(c);
  }
  {
    ScenarioCheck c;
    c.name = "third coordinate oscillates between 0 and the atom rate";
    const auto trace = maxplus::track_oscillation(law, steps, seed, 2);
    c.pass = trace.window_min <= 0.05 && trace.window_max >= p - 0.05;
    std::ostringstream d;
    d << "window [" << trace.window_min << ", " << trace.window_max << "]";
    c.detail = d.str();
    checks.push_back(c);
  }
  {
    ScenarioCheck c;
    c.name = "sampled small-horizon frequencies match the exact law";
    const std::int64_t horizon = 8;
    const auto exact_dist = maxplus::exact_small_n_distribution(law, horizon, 2);
    std::map<double, int> counts;
    for (std::int64_t t = 0; t < trials; ++t) {
      maxplus::SampleStream stream(law, seed + 1, static_cast<std::uint64_t>(t));
      maxplus::TropicalVector x = maxplus::TropicalVector::zeros(3);
      for (std::int64_t k = 0; k < horizon; ++k) x = stream.next() * x;
      counts[x[2].raw()] += 1;
    }
    double tv = 0.0;
    for (const auto& [value, prob] : exact_dist.support) {
      const auto it = counts.find(value.raw());
      const double freq =
          it == counts.end() ? 0.0 : it->second / static_cast<double>(trials);
      tv += std::abs(prob - freq);
    }
    for (const auto& [value, count] : counts) {
      if (exact_dist.probability_of(maxplus::TropicalValue::from_raw(value)) == 0.0) {
        tv += count / static_cast<double>(trials);
      }
    }
    tv /= 2.0;
    c.pass = tv <= 0.02;
    std::ostringstream d;
    d << "total variation " << tv;
    c.detail = d.str();
    checks.push_back(c);
  }
  return checks;
}

int cmd_reproduce(const std::string& name, double gamma1, double gamma2, double p,
                  std::optional<std::int64_t> steps_opt,
                  std::optional<std::int64_t> trials_opt, std::uint64_t seed,
                  const OutputOpts& out) {
  std::vector<ScenarioCheck> checks;
  if (name == "example1") {
    checks = reproduce_example1(gamma1, gamma2, steps_opt.value_or(10'000),
                                trials_opt.value_or(2'000), seed);
  } else if (name == "example2") {
    checks = reproduce_example2(p, steps_opt.value_or(100'000),
                                trials_opt.value_or(10'000), seed);
  } else {
    throw std::invalid_argument("unknown scenario \"" + name +
                                "\" (expected example1 or example2)");
  }

  bool all_pass = true;
  json jc = json::array();
  for (const auto& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    jc.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all_pass = all_pass && c.pass;
  }
  json report;
  report["scenario"] = name;
  report["checks"] = std::move(jc);
  report["allPass"] = all_pass;
  emit(out, render_json(report));
  return all_pass ? kExitOk : kExitNoCycleTime;
}

// ---------------------------------------------------------------------------
// oracle

int cmd_oracle(const std::string& kind, const std::string& model_path,
               const std::string& matrix_path, std::int64_t steps,
               std::optional<std::uint64_t> seed_opt, std::int64_t coordinate,
               const OutputOpts& out) {
  json report;
  if (kind == "karp") {
    maxplus::TropicalMatrix m = maxplus::TropicalMatrix::identity(1);
    if (!matrix_path.empty()) {
      std::ifstream in(matrix_path);
      if (!in) throw std::invalid_argument("cannot open matrix file: " + matrix_path);
      json doc;
      in >> doc;
      m = maxplus::matrix_from_json(doc);
    } else if (!model_path.empty()) {
      const auto law = maxplus::load_law_file(model_path);
      if (law.family() != maxplus::LawFamily::kDeterministic) {
        throw std::invalid_argument("karp oracle needs a deterministic model");
      }
      m = law.support_matrices()[0];
    } else {
      throw std::invalid_argument("karp oracle needs --matrix or --model");
    }
    report["value"] =
        maxplus::tropical_value_to_json(maxplus::karp_max_cycle_mean(m));
  } else if (kind == "paths") {
    if (model_path.empty()) throw std::invalid_argument("paths oracle needs --model");
    const auto law = maxplus::load_law_file(model_path);
    const std::uint64_t seed = require_seed(law, seed_opt);
    maxplus::SampleStream stream(law, seed, 0);
    const auto seq =
        maxplus::sample_forward(law, static_cast<std::size_t>(steps), stream);
    const auto product = maxplus::product_range(seq).reconstruct();
    json entries = json::array();
    bool all_match = true;
    for (std::size_t i = 0; i < law.dimension(); ++i) {
      for (std::size_t j = 0; j < law.dimension(); ++j) {
        const auto path_max = maxplus::path_weight_oracle(seq, i, j);
        const bool match = path_max == product.at(i, j);
        all_match = all_match && match;
        entries.push_back(
            {{"from", i + 1},
             {"to", j + 1},
             {"pathMax", maxplus::tropical_value_to_json(path_max)},
             {"productEntry", maxplus::tropical_value_to_json(product.at(i, j))},
             {"match", match}});
      }
    }
    report["steps"] = steps;
    report["entries"] = std::move(entries);
    report["allMatch"] = all_match;
  } else if (kind == "exact-dist") {
    if (model_path.empty()) {
      throw std::invalid_argument("exact-dist oracle needs --model");
    }
    const auto law = maxplus::load_law_file(model_path);
    const std::size_t coord = to_internal_coordinate(coordinate, law.dimension());
    const auto dist = maxplus::exact_small_n_distribution(law, steps, coord);
    report["steps"] = steps;
    report["coordinate"] = coordinate;
    json support = json::array();
    for (const auto& [value, prob] : dist.support) {
      support.push_back(
          {{"value", maxplus::tropical_value_to_json(value)}, {"prob", prob}});
    }
    report["support"] = std::move(support);
  } else {
    throw std::invalid_argument("oracle kinds: karp, paths, exact-dist");
  }
  emit(out, render_json(report));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "max-plus recursions: cycle-time analysis, exponent estimation and "
      "reproducible simulation"};
  app.require_subcommand(1);

  std::string model_path;
  std::string matrix_path;
  std::int64_t steps = 10'000;
  std::int64_t trials = 1'000;
  std::optional<std::uint64_t> seed;
  std::int64_t coordinate = 1;
  std::string mode = "forward";
  double epsilon_gamma = maxplus::kDefaultEpsilonGamma;
  double radius = maxplus::kDefaultClusterRadius;
  std::size_t cap = maxplus::kDefaultSemigroupCap;
  bool with_bottom = false;
  bool list_elements = false;
  std::string from_set, to_set;
  double gamma1 = 0.3, gamma2 = 0.2, p = 0.5;
  std::string scenario;
  std::string oracle_kind;
  std::optional<std::int64_t> steps_opt, trials_opt;
  OutputOpts out;

  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--output", out.path, "write the report to a file");
    cmd->add_option("--format", out.format, "json|text|csv")->default_val("json");
  };

  CLI::App* analyze =
      app.add_subcommand("analyze", "decide cycle-time existence and the limit");
  analyze->add_option("model", model_path, "model document (JSON)")->required();
  analyze->add_option("--steps", steps, "trajectory length per trial");
  analyze->add_option("--trials", trials, "Monte Carlo trials per exponent");
  analyze->add_option("--seed", seed, "master seed (required for stochastic models)");
  analyze->add_option("--epsilon-gamma", epsilon_gamma,
                      "equality tolerance for estimated exponents");
  add_output(analyze);

  CLI::App* simulate =
      app.add_subcommand("simulate", "simulate scaled trajectories");
  simulate->add_option("model", model_path, "model document (JSON)")->required();
  simulate->add_option("--steps", steps, "trajectory length");
  simulate->add_option("--trials", trials, "number of trials");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--coordinate", coordinate, "1-based coordinate to track");
  simulate->add_option("--mode", mode, "forward|backward");
  simulate->add_option("--radius", radius, "histogram clustering radius");
  add_output(simulate);

  CLI::App* estimate = app.add_subcommand(
      "estimate-gamma", "estimate the top (and optionally bottom) exponent");
  estimate->add_option("model", model_path, "model document (JSON)")->required();
  estimate->add_option("--steps", steps, "trajectory length per trial");
  estimate->add_option("--trials", trials, "Monte Carlo trials");
  estimate->add_option("--seed", seed, "master seed");
  estimate->add_flag("--bottom", with_bottom, "also estimate the bottom exponent");
  add_output(estimate);

  CLI::App* semigroup = app.add_subcommand(
      "semigroup", "close the pattern semigroup of a finite-support law");
  semigroup->add_option("model", model_path, "model document (JSON)")->required();
  semigroup->add_option("--cap", cap, "element cap for the closure");
  semigroup->add_flag("--list", list_elements, "include the elements in the report");
  semigroup->add_option("--from-set", from_set,
                        "comma-separated 1-based nodes that must reach --to-set");
  semigroup->add_option("--to-set", to_set, "comma-separated 1-based target nodes");
  add_output(semigroup);

  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "run the bundled scenario checks (example1 | example2)");
  reproduce->add_option("name", scenario, "example1 | example2")->required();
  reproduce->add_option("--gamma1", gamma1, "example1 rate of state (A,1)");
  reproduce->add_option("--gamma2", gamma2, "example1 rate of state (A,2)");
  reproduce->add_option("--p", p, "example2 stacking probability");
  reproduce->add_option("--steps", steps_opt, "override the scenario horizon");
  reproduce->add_option("--trials", trials_opt, "override the trial count");
  reproduce->add_option("--seed", seed, "master seed")->required();
  add_output(reproduce);

  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact cross-checking oracles (karp | paths | exact-dist)");
  oracle->add_option("kind", oracle_kind, "karp | paths | exact-dist")->required();
  oracle->add_option("--model", model_path, "model document (JSON)");
  oracle->add_option("--matrix", matrix_path, "bare matrix literal (JSON)");
  oracle->add_option("--steps", steps, "sequence length / horizon");
  oracle->add_option("--seed", seed, "master seed");
  oracle->add_option("--coordinate", coordinate, "1-based coordinate");
  add_output(oracle);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      return cmd_analyze(model_path, steps, trials, seed, epsilon_gamma, out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(model_path, steps, trials, seed, coordinate, mode,
                          radius, out);
    }
    if (estimate->parsed()) {
      return cmd_estimate_gamma(model_path, steps, trials, seed, with_bottom, out);
    }
    if (semigroup->parsed()) {
      return cmd_semigroup(model_path, cap, list_elements, from_set, to_set, out);
    }
    if (reproduce->parsed()) {
      if (!seed) throw std::invalid_argument("reproduce requires --seed");
      return cmd_reproduce(scenario, gamma1, gamma2, p, steps_opt, trials_opt,
                           *seed, out);
    }
    if (oracle->parsed()) {
      return cmd_oracle(oracle_kind, model_path, matrix_path, steps, seed,
                        coordinate, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
