#pragma once

// Stationary random-matrix laws: deterministic, finitely-supported i.i.d.,
// and Markov-modulated (always started from the stationary distribution).
// Provides reproducible forward/backward samplers and exact stationary
// analysis for the Markov case.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "maxplus/json_io.hpp"
#include "maxplus/tropical.hpp"

namespace maxplus {

enum class LawFamily { kDeterministic, kFiniteIid, kMarkovModulated };

struct LawAtom {
  double prob;
  TropicalMatrix matrix;
};

/// Parameters of the bundled two-mode Markov scenario (see example1_law).
struct Example1Params {
  double gamma1;
  double gamma2;
  double delta;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Substream key for (seed, trial); fixed so runs are reproducible.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t trial) {
  return mix64(seed ^ mix64(trial + 0x9E3779B97F4A7C15ULL));
}

/// Solves pi P = pi, sum pi = 1 by dense Gaussian elimination with partial
/// pivoting (state spaces here are tiny).
inline std::vector<double> solve_stationary(
    const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  // System: (P^T - I) pi = 0 with the last balance equation replaced by
  // sum_i pi_i = 1.
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
  a[n - 1][n] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-14) {
      throw std::runtime_error("stationary distribution system is singular");
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = a[i][n] / a[i][i];

  double sum = 0.0;
  for (double x : pi) sum += x;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::runtime_error("stationary distribution does not normalize");
  }
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += pi[i] * p[i][j];
    if (std::abs(acc - pi[j]) > 1e-10) {
      throw std::runtime_error("stationary distribution residual too large");
    }
  }
  return pi;
}

/// Strong connectivity of the positive-entry support of a kernel.
inline bool kernel_strongly_connected(
    const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  auto reach_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        const double w = transpose ? p[v][u] : p[u][v];
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach_all(false) && reach_all(true);
}

}  // namespace detail

/// A stationary random-matrix model. Immutable after construction; all
/// validation happens here so samplers and analyses can trust the data.
class MatrixLaw {
 public:
  explicit MatrixLaw(TropicalMatrix deterministic)
      : family_(LawFamily::kDeterministic) {
    require_square(deterministic);
    dim_ = deterministic.rows();
    matrices_.push_back(std::move(deterministic));
    probs_.push_back(1.0);
  }

  explicit MatrixLaw(std::vector<LawAtom> atoms)
      : family_(LawFamily::kFiniteIid) {
    if (atoms.empty()) throw std::invalid_argument("i.i.d. law needs at least one atom");
    double sum = 0.0;
    for (const auto& atom : atoms) {
      require_square(atom.matrix);
      if (!(atom.prob > 0.0)) {
        throw std::invalid_argument("atom probabilities must be > 0");
      }
      sum += atom.prob;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "probabilities sum to " << sum;
      throw std::invalid_argument(msg.str());
    }
    dim_ = atoms.front().matrix.rows();
    for (auto& atom : atoms) {
      if (atom.matrix.rows() != dim_) {
        throw std::invalid_argument("all atoms must share one dimension");
      }
      probs_.push_back(atom.prob);
      matrices_.push_back(std::move(atom.matrix));
    }
  }

  MatrixLaw(std::vector<std::string> states,
            std::vector<std::vector<double>> transition,
            std::vector<TropicalMatrix> emissions,
            std::optional<Example1Params> tag = std::nullopt)
      : family_(LawFamily::kMarkovModulated),
        states_(std::move(states)),
        transition_(std::move(transition)),
        example1_(tag) {
    const std::size_t n = states_.size();
    if (n == 0) throw std::invalid_argument("Markov law needs at least one state");
    if (transition_.size() != n || emissions.size() != n) {
      throw std::invalid_argument("transition/emissions must match the state list");
    }
    for (const auto& row : transition_) {
      if (row.size() != n) throw std::invalid_argument("transition matrix must be square");
      double sum = 0.0;
      for (double x : row) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
          throw std::invalid_argument("transition entries must be in [0,1]");
        }
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("transition rows must sum to 1");
      }
    }
    if (!detail::kernel_strongly_connected(transition_)) {
      throw std::invalid_argument(
          "transition support must be strongly connected (irreducible chain)");
    }
    for (auto& e : emissions) {
      require_square(e);
      if (e.rows() != emissions.front().rows()) {
        throw std::invalid_argument("all emissions must share one dimension");
      }
    }
    dim_ = emissions.front().rows();
    matrices_ = std::move(emissions);

    stationary_ = detail::solve_stationary(transition_);
    // Time reversal: Phat[j][i] = pi_i P[i][j] / pi_j.
    reversed_.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      if (!(stationary_[j] > 0.0)) {
        throw std::runtime_error("stationary mass vanished on an irreducible chain");
      }
      for (std::size_t i = 0; i < n; ++i) {
        reversed_[j][i] = stationary_[i] * transition_[i][j] / stationary_[j];
      }
    }
  }

  LawFamily family() const { return family_; }
  std::size_t dimension() const { return dim_; }

  /// Matrices the law can emit: the single matrix, the i.i.d. atoms, or the
  /// per-state emissions.
  std::span<const TropicalMatrix> support_matrices() const { return matrices_; }

  /// Atom probabilities (i.i.d. and deterministic families).
  std::span<const double> atom_probs() const { return probs_; }

  const std::vector<std::string>& states() const {
    require_markov();
    return states_;
  }
  const std::vector<std::vector<double>>& transition() const {
    require_markov();
    return transition_;
  }
  const std::vector<double>& stationary() const {
    require_markov();
    return stationary_;
  }
  const std::vector<std::vector<double>>& reversed_transition() const {
    require_markov();
    return reversed_;
  }
  const std::optional<Example1Params>& example1_params() const { return example1_; }

  /// True iff every matrix the law can emit has a finite entry on each row.
  bool atomwise_row_condition() const {
    for (const auto& m : matrices_) {
      if (!m.every_row_has_finite()) return false;
    }
    return true;
  }

  /// First (matrix index, row) violating the row condition, if any.
  std::optional<std::pair<std::size_t, std::size_t>> row_condition_violation()
      const {
    for (std::size_t k = 0; k < matrices_.size(); ++k) {
      for (std::size_t i = 0; i < dim_; ++i) {
        if (!matrices_[k].row_has_finite(i)) return std::make_pair(k, i);
      }
    }
    return std::nullopt;
  }

 private:
  void require_markov() const {
    if (family_ != LawFamily::kMarkovModulated) {
      throw std::logic_error("operation requires a Markov-modulated law");
    }
  }
  static void require_square(const TropicalMatrix& m) {
    if (!m.square()) throw std::invalid_argument("law matrices must be square");
  }

  LawFamily family_;
  std::size_t dim_ = 0;
  std::vector<TropicalMatrix> matrices_;
  std::vector<double> probs_;
  std::vector<std::string> states_;
  std::vector<std::vector<double>> transition_;
  std::vector<std::vector<double>> reversed_;
  std::vector<double> stationary_;
  std::optional<Example1Params> example1_;
};

enum class SampleDirection { kForward, kBackward };

/// One trial's matrix source. The sequence emitted for a given (seed, trial)
/// is a pure function of those two values: substreams are mt19937_64 engines
/// keyed by stream_seed(seed, trial), and uniforms are drawn as
/// (engine() >> 11) * 2^-53. Single-owner; trials run concurrently without
/// coordination.
class SampleStream {
 public:
  SampleStream(const MatrixLaw& law, std::uint64_t seed, std::uint64_t trial,
               SampleDirection direction = SampleDirection::kForward)
      : law_(&law),
        rng_(detail::stream_seed(seed, trial)),
        direction_(direction) {}

  /// Next matrix of the sequence: A(0), A(1), ... forward or
  /// A(-1), A(-2), ... backward. Returns a reference into the law.
  const TropicalMatrix& next() {
    switch (law_->family()) {
      case LawFamily::kDeterministic:
        return law_->support_matrices()[0];
      case LawFamily::kFiniteIid:
        return law_->support_matrices()[draw(law_->atom_probs())];
      case LawFamily::kMarkovModulated: {
        if (state_ < 0) {
          state_ = static_cast<int>(draw(law_->stationary()));
        } else {
          const auto& kernel = direction_ == SampleDirection::kForward
                                   ? law_->transition()
                                   : law_->reversed_transition();
          state_ = static_cast<int>(draw(kernel[static_cast<std::size_t>(state_)]));
        }
        return law_->support_matrices()[static_cast<std::size_t>(state_)];
      }
    }
    throw std::logic_error("unreachable");
  }

  /// Markov state of the most recently emitted matrix (-1 before the first).
  int current_state() const { return state_; }

  const MatrixLaw& law() const { return *law_; }

 private:
  double unit() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::size_t draw(std::span<const double> weights) {
    const double u = unit();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      acc += weights[k];
      if (u < acc) return k;
    }
    return weights.size() - 1;
  }

  const MatrixLaw* law_;
  std::mt19937_64 rng_;
  SampleDirection direction_;
  int state_ = -1;
};

namespace detail {
inline void require_same_law(const MatrixLaw& law, const SampleStream& stream) {
  if (&stream.law() != &law) {
    throw std::invalid_argument("stream was created for a different law");
  }
}
}  // namespace detail

/// A(0), ..., A(n-1) as references into the law (valid while it lives).
inline std::vector<const TropicalMatrix*> sample_forward_refs(
    const MatrixLaw& law, std::size_t n, SampleStream& stream) {
  detail::require_same_law(law, stream);
  std::vector<const TropicalMatrix*> seq;
  seq.reserve(n);
  for (std::size_t k = 0; k < n; ++k) seq.push_back(&stream.next());
  return seq;
}

inline std::vector<TropicalMatrix> sample_forward(const MatrixLaw& law,
                                                  std::size_t n,
                                                  SampleStream& stream) {
  detail::require_same_law(law, stream);
  std::vector<TropicalMatrix> seq;
  seq.reserve(n);
  for (std::size_t k = 0; k < n; ++k) seq.push_back(stream.next());
  return seq;
}

/// A(-1), ..., A(-n); for i.i.d. and deterministic laws this reuses the
/// forward sampler (exchangeability), for Markov laws the stream must have
/// been created with SampleDirection::kBackward so it follows the reversed
/// kernel.
inline std::vector<TropicalMatrix> sample_backward(const MatrixLaw& law,
                                                   std::size_t n,
                                                   SampleStream& stream) {
  return sample_forward(law, n, stream);
}

struct StationaryReport {
  std::vector<double> pi;
  double expected_reward = 0.0;
};

/// pi from pi P = pi plus the expected value of a per-state reward.
/// States missing from the reward map contribute 0.
inline StationaryReport stationary_analysis(
    const MatrixLaw& law,
    const std::unordered_map<std::string, double>& reward = {}) {
  if (law.family() != LawFamily::kMarkovModulated) {
    throw std::invalid_argument("stationary analysis requires a Markov-modulated law");
  }
  StationaryReport report;
  report.pi = law.stationary();
  const auto& states = law.states();
  for (std::size_t s = 0; s < states.size(); ++s) {
    auto it = reward.find(states[s]);
    if (it != reward.end()) report.expected_reward += report.pi[s] * it->second;
  }
  return report;
}

/// The bundled 4-state Markov-modulated scenario: emissions
/// A = [[1,-inf],[-inf,0]], B = [[-inf,0],[0,-inf]] on states
/// (A,1), (B,2), (A,2), (B,1) with delta = (1 - gamma1 - gamma2) / 2.
inline MatrixLaw example1_law(double gamma1, double gamma2) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0) || !(gamma1 + gamma2 < 1.0)) {
    throw std::invalid_argument(
        "example1 requires gamma1 > 0, gamma2 > 0 and gamma1 + gamma2 < 1");
  }
  const double ninf = -std::numeric_limits<double>::infinity();
  const double delta = (1.0 - gamma1 - gamma2) / 2.0;
  const TropicalMatrix a = TropicalMatrix::from_raw({{1.0, ninf}, {ninf, 0.0}});
  const TropicalMatrix b = TropicalMatrix::from_raw({{ninf, 0.0}, {0.0, ninf}});
  std::vector<std::string> states{"A1", "B2", "A2", "B1"};
  std::vector<std::vector<double>> transition{
      {1.0 - delta, delta, 0.0, 0.0},
      {0.0, 0.0, gamma2, 1.0 - gamma2},
      {0.0, 0.0, 1.0 - delta, delta},
      {gamma1, 1.0 - gamma1, 0.0, 0.0},
  };
  std::vector<TropicalMatrix> emissions{a, b, a, b};
  return MatrixLaw(std::move(states), std::move(transition), std::move(emissions),
                   Example1Params{gamma1, gamma2, delta});
}

/// Parses the model document schema:
///   { "dimension": d, "law": { "type": "deterministic"|"iid"|"markov", ... } }
inline MatrixLaw load_law(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("law")) {
    throw std::invalid_argument("model document must be an object with a \"law\" field");
  }
  const auto& law = doc.at("law");
  if (!law.is_object() || !law.contains("type")) {
    throw std::invalid_argument("law must be an object with a \"type\" field");
  }
  const std::string type = law.at("type").get<std::string>();

  auto check_dimension = [&doc](const MatrixLaw& built) {
    if (doc.contains("dimension")) {
      const auto d = doc.at("dimension").get<std::int64_t>();
      if (d <= 0 || static_cast<std::size_t>(d) != built.dimension()) {
        throw std::invalid_argument("declared dimension does not match the matrices");
      }
    }
    return built;
  };

  if (type == "deterministic") {
    if (!law.contains("matrix")) {
      throw std::invalid_argument("deterministic law needs a \"matrix\" field");
    }
    return check_dimension(MatrixLaw(matrix_from_json(law.at("matrix"))));
  }
  if (type == "iid") {
    if (!law.contains("atoms") || !law.at("atoms").is_array()) {
      throw std::invalid_argument("iid law needs an \"atoms\" array");
    }
    std::vector<LawAtom> atoms;
    for (const auto& atom : law.at("atoms")) {
      if (!atom.contains("prob") || !atom.contains("matrix")) {
        throw std::invalid_argument("each atom needs \"prob\" and \"matrix\"");
      }
      atoms.push_back(LawAtom{atom.at("prob").get<double>(),
                              matrix_from_json(atom.at("matrix"))});
    }
    return check_dimension(MatrixLaw(std::move(atoms)));
  }
  if (type == "markov") {
    for (const char* field : {"states", "transition", "emissions"}) {
      if (!law.contains(field)) {
        throw std::invalid_argument(std::string("markov law needs a \"") + field +
                                    "\" field");
      }
    }
    std::vector<std::string> states = law.at("states").get<std::vector<std::string>>();
    std::vector<std::vector<double>> transition =
        law.at("transition").get<std::vector<std::vector<double>>>();
    std::vector<TropicalMatrix> emissions;
    for (const auto& name : states) {
      if (!law.at("emissions").contains(name)) {
        throw std::invalid_argument("missing emission for state \"" + name + "\"");
      }
      emissions.push_back(matrix_from_json(law.at("emissions").at(name)));
    }
    return check_dimension(
        MatrixLaw(std::move(states), std::move(transition), std::move(emissions)));
  }
  throw std::invalid_argument("unknown law type \"" + type + "\"");
}

inline MatrixLaw load_law_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  nlohmann::json doc;
  in >> doc;
  return load_law(doc);
}

inline nlohmann::json law_to_json(const MatrixLaw& law) {
  nlohmann::json doc;
  doc["dimension"] = law.dimension();
  switch (law.family()) {
    case LawFamily::kDeterministic:
      doc["law"] = {{"type", "deterministic"},
                    {"matrix", matrix_to_json(law.support_matrices()[0])}};
      break;
    case LawFamily::kFiniteIid: {
      nlohmann::json atoms = nlohmann::json::array();
      for (std::size_t k = 0; k < law.support_matrices().size(); ++k) {
        atoms.push_back({{"prob", law.atom_probs()[k]},
                         {"matrix", matrix_to_json(law.support_matrices()[k])}});
      }
      doc["law"] = {{"type", "iid"}, {"atoms", std::move(atoms)}};
      break;
    }
    case LawFamily::kMarkovModulated: {
      nlohmann::json emissions = nlohmann::json::object();
      for (std::size_t s = 0; s < law.states().size(); ++s) {
        emissions[law.states()[s]] = matrix_to_json(law.support_matrices()[s]);
      }
      doc["law"] = {{"type", "markov"},
                    {"states", law.states()},
                    {"transition", law.transition()},
                    {"emissions", std::move(emissions)}};
      break;
    }
  }
  return doc;
}

}  // namespace maxplus
