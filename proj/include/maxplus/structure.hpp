#pragma once

// Support-graph structure of a random-matrix law: strongly connected
// components, condensation and reachability, the downstream class sets that
// drive the cycle-time criterion, submatrix laws, and the pattern semigroup
// with its block-reachability certificates.

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "maxplus/estimate.hpp"
#include "maxplus/law.hpp"
#include "maxplus/tropical.hpp"

namespace maxplus {

/// Arcs (i, j) such that some matrix the law can emit has a finite (i, j)
/// entry, i.e. the entry is finite with positive probability.
struct SupportGraph {
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;  // sorted, unique

  bool has_arc(std::size_t i, std::size_t j) const {
    return std::binary_search(arcs.begin(), arcs.end(), std::make_pair(i, j));
  }

  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(nodes);
    for (const auto& [i, j] : arcs) adj[i].push_back(j);
    return adj;
  }
};

inline SupportGraph build_support_graph(const MatrixLaw& law) {
  SupportGraph g;
  g.nodes = law.dimension();
  std::set<std::pair<std::size_t, std::size_t>> arcs;
  for (const auto& m : law.support_matrices()) {
    for (std::size_t i = 0; i < g.nodes; ++i) {
      for (std::size_t j = 0; j < g.nodes; ++j) {
        if (m.at(i, j).is_finite()) arcs.emplace(i, j);
      }
    }
  }
  g.arcs.assign(arcs.begin(), arcs.end());
  return g;
}

inline SupportGraph support_graph_of(const TropicalMatrix& m) {
  if (!m.square()) throw std::invalid_argument("support graph needs a square matrix");
  SupportGraph g;
  g.nodes = m.rows();
  for (std::size_t i = 0; i < g.nodes; ++i) {
    for (std::size_t j = 0; j < g.nodes; ++j) {
      if (m.at(i, j).is_finite()) g.arcs.emplace_back(i, j);
    }
  }
  return g;
}

struct SccComponent {
  std::vector<std::size_t> nodes;  // ascending
  bool trivial = false;  // singleton with no self-loop; exponent fixed to bottom
};

/// Components, condensation DAG and reachability, before any exponent data.
/// Components are numbered by their smallest node, ascending.
struct SccSkeleton {
  std::vector<SccComponent> components;
  std::vector<std::size_t> component_of;                     // node -> component
  std::vector<std::pair<std::size_t, std::size_t>> condensation;  // inter-component arcs
  std::vector<std::vector<char>> reach;                      // reflexive-transitive
};

inline SccSkeleton scc_skeleton(const SupportGraph& g) {
  const std::size_t n = g.nodes;
  const auto adj = g.adjacency();

  // Iterative Tarjan.
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> sccs;
  int counter = 0;
  struct Frame {
    std::size_t v;
    std::size_t child = 0;
  };
  std::vector<Frame> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frames.push_back({root});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.child < adj[f.v].size()) {
        const std::size_t w = adj[f.v][f.child++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        const std::size_t v = f.v;
        if (low[v] == index[v]) {
          std::vector<std::size_t> scc;
          for (;;) {
            const std::size_t w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            scc.push_back(w);
            if (w == v) break;
          }
          std::sort(scc.begin(), scc.end());
          sccs.push_back(std::move(scc));
        }
        frames.pop_back();
        if (!frames.empty()) {
          low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        }
      }
    }
  }

  std::sort(sccs.begin(), sccs.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  SccSkeleton s;
  s.component_of.assign(n, 0);
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    SccComponent comp;
    comp.nodes = sccs[c];
    comp.trivial = comp.nodes.size() == 1 &&
                   !g.has_arc(comp.nodes[0], comp.nodes[0]);
    for (const std::size_t v : comp.nodes) s.component_of[v] = c;
    s.components.push_back(std::move(comp));
  }

  std::set<std::pair<std::size_t, std::size_t>> cond;
  for (const auto& [i, j] : g.arcs) {
    const std::size_t ci = s.component_of[i];
    const std::size_t cj = s.component_of[j];
    if (ci != cj) cond.emplace(ci, cj);
  }
  s.condensation.assign(cond.begin(), cond.end());

  const std::size_t m = s.components.size();
  s.reach.assign(m, std::vector<char>(m, 0));
  for (std::size_t c = 0; c < m; ++c) s.reach[c][c] = 1;
  for (const auto& [a, b] : s.condensation) s.reach[a][b] = 1;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t a = 0; a < m; ++a) {
      if (!s.reach[a][k]) continue;
      for (std::size_t b = 0; b < m; ++b) {
        if (s.reach[k][b]) s.reach[a][b] = 1;
      }
    }
  }
  return s;
}

/// Downstream data of one component: E (component ids downstream, including
/// itself), F (their node union), the maximal downstream exponent, G (the
/// components on a path towards that maximum) and H (their node union).
struct ComponentClassSets {
  std::vector<std::size_t> downstream_components;  // E_c
  std::vector<std::size_t> downstream_nodes;       // F_c
  TropicalValue gamma_downstream;                  // max over E_c of gamma
  std::vector<std::size_t> class_components;       // G_c
  std::vector<std::size_t> class_nodes;            // H_c
  bool dominating = false;                         // G_c == {c}
};

struct SccAnalysis {
  SupportGraph graph;
  SccSkeleton skeleton;
  std::vector<ExponentEstimate> gamma;      // per component
  std::vector<ComponentClassSets> classes;  // per component
  double epsilon_gamma = 1e-3;
  bool estimated_mode = false;  // any Monte Carlo exponent present
  bool tie_sensitive = false;   // an equality decision fell inside the tolerance band
};

inline constexpr double kDefaultEpsilonGamma = 1e-3;

/// Builds the full analysis from per-component exponents. Exponents must be
/// supplied for every component, bottom for trivial ones. Equality of
/// estimated exponents is taken up to epsilon_gamma; exact exponents compare
/// exactly.
inline SccAnalysis scc_decompose(const SupportGraph& g,
                                 std::vector<ExponentEstimate> gamma,
                                 double epsilon_gamma = kDefaultEpsilonGamma) {
  SccAnalysis a;
  a.graph = g;
  a.skeleton = scc_skeleton(g);
  a.epsilon_gamma = epsilon_gamma;
  const std::size_t m = a.skeleton.components.size();
  if (gamma.size() != m) {
    throw std::invalid_argument("exponent missing for a component");
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (a.skeleton.components[c].trivial && gamma[c].value.is_finite()) {
      throw std::invalid_argument("trivial component must have bottom exponent");
    }
    if (gamma[c].mode == EstimateMode::kMonteCarlo) a.estimated_mode = true;
  }
  a.gamma = std::move(gamma);

  const double eps = a.estimated_mode ? epsilon_gamma : 0.0;
  auto gamma_equal = [eps](TropicalValue x, TropicalValue y) {
    if (x.is_bottom() || y.is_bottom()) return x.is_bottom() && y.is_bottom();
    return std::abs(x.raw() - y.raw()) <= eps;
  };

  a.classes.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    auto& cls = a.classes[c];
    for (std::size_t t = 0; t < m; ++t) {
      if (!a.skeleton.reach[c][t]) continue;
      cls.downstream_components.push_back(t);
      const auto& nodes = a.skeleton.components[t].nodes;
      cls.downstream_nodes.insert(cls.downstream_nodes.end(), nodes.begin(),
                                  nodes.end());
    }
    std::sort(cls.downstream_nodes.begin(), cls.downstream_nodes.end());
    cls.gamma_downstream = TropicalValue::bottom();
    for (const std::size_t t : cls.downstream_components) {
      cls.gamma_downstream = oplus(cls.gamma_downstream, a.gamma[t].value);
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    auto& cls = a.classes[c];
    for (const std::size_t t : cls.downstream_components) {
      const TropicalValue gt = a.classes[t].gamma_downstream;
      const TropicalValue gc = cls.gamma_downstream;
      if (a.estimated_mode && gt.is_finite() && gc.is_finite()) {
        const double diff = std::abs(gt.raw() - gc.raw());
        if (diff > 0.0 && diff <= eps) a.tie_sensitive = true;
      }
      if (gamma_equal(gt, gc)) {
        cls.class_components.push_back(t);
        const auto& nodes = a.skeleton.components[t].nodes;
        cls.class_nodes.insert(cls.class_nodes.end(), nodes.begin(), nodes.end());
      }
    }
    std::sort(cls.class_nodes.begin(), cls.class_nodes.end());
    cls.dominating =
        cls.class_components.size() == 1 && cls.class_components[0] == c;
  }
  return a;
}

/// Restriction of a law to a node subset: same family, every matrix
/// restricted, probabilities and transitions unchanged.
inline MatrixLaw submatrix_law(const MatrixLaw& law,
                               std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw std::invalid_argument("empty node set");
  std::vector<std::size_t> idx(nodes.begin(), nodes.end());
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (idx.back() >= law.dimension()) {
    throw std::invalid_argument("node set exceeds the law dimension");
  }
  switch (law.family()) {
    case LawFamily::kDeterministic:
      return MatrixLaw(law.support_matrices()[0].submatrix(idx));
    case LawFamily::kFiniteIid: {
      std::vector<LawAtom> atoms;
      for (std::size_t k = 0; k < law.support_matrices().size(); ++k) {
        atoms.push_back(
            LawAtom{law.atom_probs()[k], law.support_matrices()[k].submatrix(idx)});
      }
      return MatrixLaw(std::move(atoms));
    }
    case LawFamily::kMarkovModulated: {
      std::vector<TropicalMatrix> emissions;
      for (const auto& e : law.support_matrices()) emissions.push_back(e.submatrix(idx));
      return MatrixLaw(law.states(), law.transition(), std::move(emissions));
    }
  }
  throw std::logic_error("unreachable");
}

namespace detail {

// Patterns as per-row bitmasks; keeps the closure worklist allocation-free.
using PatternKey = std::vector<std::uint64_t>;

struct PatternKeyHash {
  std::size_t operator()(const PatternKey& k) const {
    std::size_t h = 1469598103934665603ULL;
    for (const std::uint64_t row : k) {
      h ^= static_cast<std::size_t>(row);
      h *= 1099511628211ULL;
    }
    return h;
  }
};

inline PatternKey pattern_key(const TropicalMatrix& m) {
  PatternKey key(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m.at(i, j).is_finite()) key[i] |= (std::uint64_t{1} << j);
    }
  }
  return key;
}

inline PatternKey pattern_product(const PatternKey& a, const PatternKey& b) {
  PatternKey c(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint64_t row = a[i];
    while (row != 0) {
      const int j = std::countr_zero(row);
      row &= row - 1;
      c[i] |= b[static_cast<std::size_t>(j)];
    }
  }
  return c;
}

inline TropicalMatrix pattern_from_key(const PatternKey& key) {
  TropicalMatrix m(key.size(), key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    for (std::size_t j = 0; j < key.size(); ++j) {
      if (key[i] & (std::uint64_t{1} << j)) m.at(i, j) = TropicalValue::finite(0.0);
    }
  }
  return m;
}

}  // namespace detail

/// The set of support patterns reachable as products of the atoms' patterns;
/// product-closed by construction (i.i.d. and deterministic laws only).
struct PatternSemigroup {
  std::size_t dim = 0;
  std::vector<TropicalMatrix> generators;
  std::vector<TropicalMatrix> elements;  // discovery order
  bool closed = false;
  std::size_t cap = 0;
};

inline constexpr std::size_t kDefaultSemigroupCap = 1'000'000;

inline PatternSemigroup semigroup_closure(const MatrixLaw& law,
                                          std::size_t cap = kDefaultSemigroupCap) {
  if (law.family() == LawFamily::kMarkovModulated) {
    throw std::invalid_argument(
        "pattern semigroup closure is defined for i.i.d. and deterministic laws");
  }
  if (law.dimension() > 64) {
    throw std::invalid_argument("pattern semigroup supports dimension <= 64");
  }
  PatternSemigroup sg;
  sg.dim = law.dimension();
  sg.cap = cap;

  std::vector<detail::PatternKey> gens;
  std::unordered_set<detail::PatternKey, detail::PatternKeyHash> seen;
  for (const auto& m : law.support_matrices()) {
    auto key = detail::pattern_key(m);
    if (seen.insert(key).second) {
      sg.generators.push_back(detail::pattern_from_key(key));
      gens.push_back(std::move(key));
    }
  }

  // Worklist closure under right-multiplication by generators; every word of
  // generators is reached this way.
  std::vector<detail::PatternKey> order(gens.begin(), gens.end());
  for (std::size_t next = 0; next < order.size(); ++next) {
    for (const auto& g : gens) {
      auto prod = detail::pattern_product(order[next], g);
      if (seen.insert(prod).second) {
        if (order.size() + 1 > cap) {
          throw std::runtime_error("pattern semigroup closure exceeded the cap");
        }
        order.push_back(std::move(prod));
      }
    }
  }
  for (const auto& key : order) sg.elements.push_back(detail::pattern_from_key(key));
  sg.closed = true;
  return sg;
}

struct BlockReachabilityResult {
  std::optional<TropicalMatrix> certificate;
  std::size_t elements_searched = 0;
};

/// Searches the semigroup for an element M with, for every i in I, some
/// j in J with M_ij finite. Such an element witnesses that walks started in
/// I cannot avoid J forever.
inline BlockReachabilityResult block_reachability_certificate(
    const PatternSemigroup& sg, std::span<const std::size_t> block_i,
    std::span<const std::size_t> block_j) {
  for (const std::size_t v : block_i) {
    if (v >= sg.dim) throw std::invalid_argument("block index out of range");
    if (std::find(block_j.begin(), block_j.end(), v) != block_j.end()) {
      throw std::invalid_argument("blocks must be disjoint");
    }
  }
  for (const std::size_t v : block_j) {
    if (v >= sg.dim) throw std::invalid_argument("block index out of range");
  }
  BlockReachabilityResult result;
  for (const auto& m : sg.elements) {
    ++result.elements_searched;
    bool all_rows = true;
    for (const std::size_t i : block_i) {
      bool hit = false;
      for (const std::size_t j : block_j) {
        if (m.at(i, j).is_finite()) {
          hit = true;
          break;
        }
      }
      if (!hit) {
        all_rows = false;
        break;
      }
    }
    if (all_rows) {
      result.certificate = m;
      return result;
    }
  }
  return result;
}

namespace detail {

inline nlohmann::json nodes_to_json(std::span<const std::size_t> nodes) {
  nlohmann::json out = nlohmann::json::array();
  for (const std::size_t v : nodes) out.push_back(v + 1);  // 1-based externally
  return out;
}

inline nlohmann::json components_to_json(std::span<const std::size_t> ids) {
  nlohmann::json out = nlohmann::json::array();
  for (const std::size_t c : ids) out.push_back(c + 1);
  return out;
}

}  // namespace detail

inline nlohmann::json analysis_to_json(const SccAnalysis& a) {
  nlohmann::json j;
  j["dimension"] = a.graph.nodes;
  j["epsilonGamma"] = a.epsilon_gamma;
  j["gammaMode"] = a.estimated_mode ? "estimated" : "exact";
  j["tieSensitive"] = a.tie_sensitive;
  nlohmann::json arcs = nlohmann::json::array();
  for (const auto& [x, y] : a.graph.arcs) {
    arcs.push_back(nlohmann::json::array({x + 1, y + 1}));
  }
  j["supportArcs"] = std::move(arcs);
  nlohmann::json cond = nlohmann::json::array();
  for (const auto& [x, y] : a.skeleton.condensation) {
    cond.push_back(nlohmann::json::array({x + 1, y + 1}));
  }
  j["condensation"] = std::move(cond);
  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t c = 0; c < a.skeleton.components.size(); ++c) {
    const auto& comp = a.skeleton.components[c];
    const auto& cls = a.classes[c];
    nlohmann::json jc;
    jc["id"] = c + 1;
    jc["nodes"] = detail::nodes_to_json(comp.nodes);
    jc["trivial"] = comp.trivial;
    jc["gamma"] = estimate_to_json(a.gamma[c]);
    jc["gammaDownstream"] = tropical_value_to_json(cls.gamma_downstream);
    jc["E"] = detail::components_to_json(cls.downstream_components);
    jc["F"] = detail::nodes_to_json(cls.downstream_nodes);
    jc["G"] = detail::components_to_json(cls.class_components);
    jc["H"] = detail::nodes_to_json(cls.class_nodes);
    jc["dominating"] = cls.dominating;
    comps.push_back(std::move(jc));
  }
  j["components"] = std::move(comps);
  return j;
}

}  // namespace maxplus
