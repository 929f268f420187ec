#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "fixtures.hpp"
#include "maxplus/exponents.hpp"
#include "maxplus/structure.hpp"
#include "oracles.hpp"

using maxplus::EstimateMode;
using maxplus::ExponentEstimate;
using maxplus::MatrixLaw;
using maxplus::SccAnalysis;
using maxplus::SupportGraph;
using maxplus::TropicalMatrix;
using maxplus::TropicalValue;

namespace {
using Arc = std::pair<std::size_t, std::size_t>;

ExponentEstimate exact(double v) {
  return ExponentEstimate::exact(TropicalValue::finite(v));
}
ExponentEstimate exact_bottom() {
  return ExponentEstimate::exact(TropicalValue::bottom());
}
}  // namespace

TEST_CASE("support graphs collect every finite position") {
  SECTION("the bundled i.i.d. pair") {
    const SupportGraph g = maxplus::build_support_graph(fixtures::example2_law(0.5));
    const std::vector<Arc> expected{{0, 0}, {1, 0}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};
    CHECK(g.arcs == expected);
  }

  SECTION("all-finite deterministic matrix gives the complete graph") {
    const MatrixLaw law(TropicalMatrix::from_raw({{1, 2}, {3, 4}}));
    const SupportGraph g = maxplus::build_support_graph(law);
    CHECK(g.arcs.size() == 4);
  }

  SECTION("the bundled Markov scenario is strongly connected on two nodes") {
    const SupportGraph g =
        maxplus::build_support_graph(maxplus::example1_law(0.3, 0.2));
    const std::vector<Arc> expected{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    CHECK(g.arcs == expected);
    const auto skel = maxplus::scc_skeleton(g);
    CHECK(skel.components.size() == 1);
  }
}

TEST_CASE("component decomposition of the bundled pair") {
  const SupportGraph g = maxplus::build_support_graph(fixtures::example2_law(0.5));
  const auto skel = maxplus::scc_skeleton(g);
  REQUIRE(skel.components.size() == 2);
  CHECK(skel.components[0].nodes == std::vector<std::size_t>{0});
  CHECK_FALSE(skel.components[0].trivial);  // node 0 has a self-loop
  CHECK(skel.components[1].nodes == std::vector<std::size_t>{1, 2});
  CHECK(skel.condensation == std::vector<Arc>{{1, 0}});

  SccAnalysis a = maxplus::scc_decompose(g, {exact(0.0), exact(0.5)});
  CHECK(a.classes[1].downstream_components == std::vector<std::size_t>{0, 1});
  CHECK(a.classes[1].gamma_downstream == TropicalValue::finite(0.5));
  CHECK(a.classes[1].class_components == std::vector<std::size_t>{1});
  CHECK(a.classes[1].class_nodes == std::vector<std::size_t>{1, 2});
  CHECK(a.classes[1].dominating);
  CHECK(a.classes[0].dominating);
  CHECK_FALSE(a.tie_sensitive);
}

TEST_CASE("component decomposition of the block fixture") {
  const SupportGraph g = maxplus::build_support_graph(fixtures::figure1_law());
  const auto skel = maxplus::scc_skeleton(g);
  REQUIRE(skel.components.size() == 6);
  CHECK(skel.components[2].trivial);
  CHECK(skel.components[2].nodes == std::vector<std::size_t>{4});
  CHECK(skel.condensation ==
        std::vector<Arc>{{0, 1}, {1, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 5}});

  SccAnalysis a = maxplus::scc_decompose(
      g, {exact(4), exact(1), exact_bottom(), exact(2), exact(3), exact(0)});
  // Component 1 (nodes 2,3) reaches the mean-3 block through the trivial node.
  CHECK(a.classes[1].gamma_downstream == TropicalValue::finite(3));
  CHECK(a.classes[1].class_components == std::vector<std::size_t>{1, 2, 4});
  CHECK(a.classes[1].class_nodes == std::vector<std::size_t>{2, 3, 4, 7, 8});
  CHECK(a.classes[0].gamma_downstream == TropicalValue::finite(4));
  CHECK(a.classes[0].dominating);
  CHECK_FALSE(a.classes[1].dominating);

  SECTION("downstream exponents are monotone along reachability") {
    for (std::size_t c = 0; c < 6; ++c) {
      for (const std::size_t t : a.classes[c].downstream_components) {
        CHECK(a.classes[t].gamma_downstream <= a.classes[c].gamma_downstream);
      }
    }
  }

  SECTION("components partition the nodes and reach is a partial order") {
    std::vector<std::size_t> all;
    for (const auto& comp : skel.components) {
      all.insert(all.end(), comp.nodes.begin(), comp.nodes.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    for (std::size_t x = 0; x < 6; ++x) {
      CHECK(skel.reach[x][x]);
      for (std::size_t y = 0; y < 6; ++y) {
        if (x != y && skel.reach[x][y]) CHECK_FALSE(skel.reach[y][x]);
        for (std::size_t z = 0; z < 6; ++z) {
          if (skel.reach[x][y] && skel.reach[y][z]) CHECK(skel.reach[x][z]);
        }
      }
    }
  }
}

TEST_CASE("single node without a self-loop is a trivial component") {
  SupportGraph g;
  g.nodes = 1;
  const auto skel = maxplus::scc_skeleton(g);
  REQUIRE(skel.components.size() == 1);
  CHECK(skel.components[0].trivial);

  SccAnalysis a = maxplus::scc_decompose(g, {exact_bottom()});
  CHECK(a.classes[0].downstream_components == std::vector<std::size_t>{0});
  CHECK(a.classes[0].gamma_downstream.is_bottom());
  CHECK(a.classes[0].dominating);

  CHECK_THROWS_AS(maxplus::scc_decompose(g, {exact(1.0)}), std::invalid_argument);
  CHECK_THROWS_AS(maxplus::scc_decompose(g, {}), std::invalid_argument);
}

TEST_CASE("estimated exponents use the tolerance policy") {
  // Two-component chain whose downstream exponents differ by less than the
  // tolerance: the membership decision is flagged as tie-sensitive.
  SupportGraph g;
  g.nodes = 2;
  g.arcs = {{0, 0}, {0, 1}, {1, 1}};

  const auto mc = [](double v) {
    return ExponentEstimate::monte_carlo(TropicalValue::finite(v), 1e-4, 1000, 10);
  };
  SccAnalysis estimated =
      maxplus::scc_decompose(g, {mc(0.5004), mc(0.5)}, 1e-3);
  CHECK(estimated.estimated_mode);
  CHECK(estimated.tie_sensitive);
  CHECK(estimated.classes[0].class_components == std::vector<std::size_t>{0, 1});

  SccAnalysis exact_mode =
      maxplus::scc_decompose(g, {exact(0.5004), exact(0.5)}, 1e-3);
  CHECK_FALSE(exact_mode.estimated_mode);
  CHECK_FALSE(exact_mode.tie_sensitive);
  CHECK(exact_mode.classes[0].class_components == std::vector<std::size_t>{0});
  CHECK(exact_mode.classes[0].dominating);
}

TEST_CASE("submatrix laws restrict every atom in place") {
  const MatrixLaw law = fixtures::example2_law(0.5);
  const std::vector<std::size_t> tail{1, 2};
  const MatrixLaw sub = maxplus::submatrix_law(law, tail);
  CHECK(sub.dimension() == 2);
  CHECK(sub.support_matrices()[0] ==
        TropicalMatrix::from_raw({{fixtures::kNinf, fixtures::kNinf}, {1, 1}}));
  CHECK(sub.support_matrices()[1] ==
        TropicalMatrix::from_raw({{fixtures::kNinf, 0}, {0, fixtures::kNinf}}));
  CHECK(sub.atom_probs()[0] == 0.5);

  SECTION("restriction to every node is the identity") {
    const std::vector<std::size_t> all{0, 1, 2};
    const MatrixLaw same = maxplus::submatrix_law(law, all);
    CHECK(same.support_matrices()[0] == law.support_matrices()[0]);
    CHECK(same.support_matrices()[1] == law.support_matrices()[1]);
  }

  SECTION("class restriction of the block fixture") {
    const MatrixLaw fig = fixtures::figure1_law();
    const std::vector<std::size_t> h{2, 3, 4, 7, 8};
    const MatrixLaw sub_fig = maxplus::submatrix_law(fig, h);
    CHECK(sub_fig.dimension() == 5);
    CHECK(sub_fig.family() == maxplus::LawFamily::kDeterministic);
  }

  SECTION("bad node sets are rejected") {
    CHECK_THROWS_AS(maxplus::submatrix_law(law, std::vector<std::size_t>{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(maxplus::submatrix_law(law, std::vector<std::size_t>{3}),
                    std::invalid_argument);
  }
}

TEST_CASE("pattern semigroup closure") {
  SECTION("the identity alone is closed") {
    const MatrixLaw law(TropicalMatrix::identity(3));
    const auto sg = maxplus::semigroup_closure(law);
    CHECK(sg.elements.size() == 1);
    CHECK(sg.closed);
  }

  SECTION("closure of the bundled pair stays small") {
    const auto sg = maxplus::semigroup_closure(fixtures::example2_law(0.5));
    CHECK(sg.generators.size() == 2);
    CHECK(sg.elements.size() <= 64);
    CHECK(sg.closed);

    // Idempotence: the elements generate themselves and nothing more.
    std::vector<maxplus::LawAtom> atoms;
    for (const auto& m : sg.elements) {
      atoms.push_back({1.0 / static_cast<double>(sg.elements.size()), m});
    }
    const auto again = maxplus::semigroup_closure(MatrixLaw(std::move(atoms)));
    CHECK(again.elements.size() == sg.elements.size());
  }

  SECTION("sampled product patterns always land in the closure") {
    oracles::Rng rng(97);
    const MatrixLaw law = fixtures::example2_law(0.5);
    const auto sg = maxplus::semigroup_closure(law);
    for (int trial = 0; trial < 100; ++trial) {
      maxplus::SampleStream stream(law, 1234, static_cast<std::uint64_t>(trial));
      const std::size_t n = 1 + rng() % 10;
      TropicalMatrix prod = stream.next();
      for (std::size_t k = 1; k < n; ++k) prod = multiply(prod, stream.next());
      const TropicalMatrix pat = pattern(prod);
      CHECK(std::any_of(sg.elements.begin(), sg.elements.end(),
                        [&](const TropicalMatrix& m) { return m == pat; }));
    }
  }

  SECTION("caps and non-i.i.d. laws are rejected") {
    CHECK_THROWS_AS(maxplus::semigroup_closure(maxplus::example1_law(0.3, 0.2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(maxplus::semigroup_closure(fixtures::example2_law(0.5), 2),
                    std::runtime_error);
  }
}

TEST_CASE("block reachability certificates") {
  SECTION("a single generator with the needed entry is its own witness") {
    const MatrixLaw law(
        TropicalMatrix::from_raw({{fixtures::kNinf, 0}, {fixtures::kNinf, 0}}));
    const auto sg = maxplus::semigroup_closure(law);
    const std::vector<std::size_t> i{0}, j{1};
    const auto r = maxplus::block_reachability_certificate(sg, i, j);
    REQUIRE(r.certificate);
    CHECK(r.certificate->at(0, 1).is_finite());
  }

  SECTION("a two-step product can be required") {
    const double x = fixtures::kNinf;
    const MatrixLaw law(std::vector<maxplus::LawAtom>{
        {0.5, TropicalMatrix::from_raw({{0, 0, x}, {x, 0, x}, {x, x, 0}})},
        {0.5, TropicalMatrix::from_raw({{0, x, x}, {x, 0, 0}, {x, x, 0}})},
    });
    const auto sg = maxplus::semigroup_closure(law);
    const std::vector<std::size_t> i{0, 1}, j{2};
    const auto r = maxplus::block_reachability_certificate(sg, i, j);
    REQUIRE(r.certificate);
    CHECK(r.certificate->at(0, 2).is_finite());
    CHECK(r.certificate->at(1, 2).is_finite());
  }

  SECTION("the bundled pair restricted to its tail component") {
    const MatrixLaw sub = maxplus::submatrix_law(fixtures::example2_law(0.5),
                                                 std::vector<std::size_t>{1, 2});
    const auto sg = maxplus::semigroup_closure(sub);
    const std::vector<std::size_t> i{0}, j{1};
    const auto r = maxplus::block_reachability_certificate(sg, i, j);
    REQUIRE(r.certificate);
  }

  SECTION("refutations and bad blocks") {
    const MatrixLaw law(TropicalMatrix::identity(2));
    const auto sg = maxplus::semigroup_closure(law);
    const std::vector<std::size_t> i{0}, j{1};
    CHECK_FALSE(maxplus::block_reachability_certificate(sg, i, j).certificate);
    const std::vector<std::size_t> overlap{0};
    CHECK_THROWS_AS(maxplus::block_reachability_certificate(sg, overlap, overlap),
                    std::invalid_argument);
  }
}

TEST_CASE("analysis report carries one-based ids") {
  const SupportGraph g = maxplus::build_support_graph(fixtures::example2_law(0.5));
  const SccAnalysis a = maxplus::scc_decompose(g, {exact(0.0), exact(0.5)});
  const auto j = maxplus::analysis_to_json(a);
  REQUIRE(j["components"].size() == 2);
  CHECK(j["components"][1]["id"] == 2);
  CHECK(j["components"][1]["nodes"] == nlohmann::json::array({2, 3}));
  CHECK(j["components"][1]["H"] == nlohmann::json::array({2, 3}));
  CHECK(j["components"][1]["gamma"]["mode"] == "exact");
  CHECK(j["gammaMode"] == "exact");
}
