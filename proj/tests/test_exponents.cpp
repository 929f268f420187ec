#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "maxplus/exponents.hpp"
#include "maxplus/structure.hpp"
#include "maxplus/verdict.hpp"
#include "oracles.hpp"

using maxplus::EstimateMode;
using maxplus::ExponentEstimate;
using maxplus::MatrixLaw;
using maxplus::McParams;
using maxplus::TropicalMatrix;
using maxplus::TropicalValue;

TEST_CASE("maximum cycle mean on pinned instances") {
  const TropicalMatrix diag =
      TropicalMatrix::from_raw({{1, fixtures::kNinf}, {fixtures::kNinf, 0}});
  CHECK(maxplus::karp_max_cycle_mean(diag) == TropicalValue::finite(1));

  CHECK(maxplus::karp_max_cycle_mean(TropicalMatrix::identity(4)) ==
        TropicalValue::finite(0));

  const TropicalMatrix two_cycle =
      TropicalMatrix::from_raw({{0, 3}, {1, fixtures::kNinf}});
  CHECK(maxplus::karp_max_cycle_mean(two_cycle) == TropicalValue::finite(2));

  const TropicalMatrix acyclic = TropicalMatrix::from_raw(
      {{fixtures::kNinf, 5}, {fixtures::kNinf, fixtures::kNinf}});
  CHECK(maxplus::karp_max_cycle_mean(acyclic).is_bottom());
}

TEST_CASE("maximum cycle mean agrees with cycle enumeration") {
  oracles::Rng rng(61);
  for (int k = 0; k < 200; ++k) {
    const std::size_t d = 2 + rng() % 5;  // up to 6
    const TropicalMatrix a = oracles::random_matrix(rng, d, d, 0.5);
    const TropicalValue karp = maxplus::karp_max_cycle_mean(a);
    const TropicalValue brute = oracles::brute_force_max_cycle_mean(a);
    if (brute.is_bottom()) {
      CHECK(karp.is_bottom());
    } else {
      REQUIRE(karp.is_finite());
      CHECK(karp.raw() == Catch::Approx(brute.raw()).margin(1e-12));
    }
  }
}

TEST_CASE("trajectory estimates approach the deterministic cycle mean") {
  const MatrixLaw law(
      TropicalMatrix::from_raw({{1, fixtures::kNinf}, {fixtures::kNinf, 0}}));
  const auto est = maxplus::estimate_top_exponent(law, McParams{10'000, 1, 0});
  REQUIRE(est.value.is_finite());
  CHECK(est.trials == 1);  // deterministic laws need a single trial
  CHECK(std::abs(est.value.raw() - 1.0) <= 0.01);

  SECTION("agreement holds for random row-finite matrices") {
    oracles::Rng rng(67);
    for (int k = 0; k < 10; ++k) {
      const std::size_t d = 2 + rng() % 5;
      const TropicalMatrix a = oracles::random_row_finite_matrix(rng, d);
      const MatrixLaw det(a);
      const auto mc = maxplus::estimate_top_exponent(det, McParams{10'000, 1, 0});
      const TropicalValue karp = maxplus::karp_max_cycle_mean(a);
      REQUIRE(karp.is_finite());
      double max_entry = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          if (a.at(i, j).is_finite()) {
            max_entry = std::max(max_entry, std::abs(a.at(i, j).raw()));
          }
        }
      }
      const double bound = 2.0 / 10'000.0 * max_entry + 1e-9;
      CHECK(std::abs(mc.value.raw() - karp.raw()) <= bound);
    }
  }
}

TEST_CASE("top exponent of the bundled laws") {
  SECTION("tail component of the i.i.d. pair grows like its atom frequency") {
    const MatrixLaw sub = maxplus::submatrix_law(fixtures::example2_law(0.5),
                                                 std::vector<std::size_t>{1, 2});
    const auto est = maxplus::estimate_top_exponent(sub, McParams{10'000, 200, 7});
    REQUIRE(est.value.is_finite());
    CHECK(est.mode == EstimateMode::kMonteCarlo);
    CHECK(std::abs(est.value.raw() - 0.5) <= 0.02);
  }

  SECTION("Markov scenario tops out at the larger rate") {
    const MatrixLaw law = maxplus::example1_law(0.3, 0.2);
    const auto est = maxplus::estimate_top_exponent(law, McParams{10'000, 100, 11});
    REQUIRE(est.value.is_finite());
    CHECK(std::abs(est.value.raw() - 0.3) <= 0.02);
  }
}

TEST_CASE("bottom exponent") {
  SECTION("identity stays at zero") {
    const MatrixLaw law(TropicalMatrix::identity(3));
    const auto est = maxplus::estimate_bottom_exponent(law, McParams{1'000, 1, 0});
    CHECK(est.value == TropicalValue::finite(0));
  }

  SECTION("Markov scenario bottoms out at the smaller rate") {
    const MatrixLaw law = maxplus::example1_law(0.3, 0.2);
    const auto bottom = maxplus::estimate_bottom_exponent(law, McParams{10'000, 100, 11});
    const auto top = maxplus::estimate_top_exponent(law, McParams{10'000, 100, 11});
    REQUIRE(bottom.value.is_finite());
    CHECK(std::abs(bottom.value.raw() - 0.2) <= 0.02);
    CHECK(bottom.value <= top.value);  // same seeds, min below max
  }

  SECTION("violating atoms are named") {
    const MatrixLaw sub = maxplus::submatrix_law(fixtures::example2_law(0.5),
                                                 std::vector<std::size_t>{1, 2});
    CHECK_THROWS_WITH(maxplus::estimate_bottom_exponent(sub, McParams{100, 10, 0}),
                      Catch::Matchers::ContainsSubstring("atom 0") &&
                          Catch::Matchers::ContainsSubstring("row node 1"));
  }
}

TEST_CASE("per-component exponents") {
  SECTION("the bundled pair estimates its two components") {
    const MatrixLaw law = fixtures::example2_law(0.5);
    const auto skel =
        maxplus::scc_skeleton(maxplus::build_support_graph(law));
    const auto gammas =
        maxplus::component_exponents(law, skel, McParams{5'000, 100, 3});
    REQUIRE(gammas.size() == 2);
    CHECK(gammas[0].mode == EstimateMode::kMonteCarlo);
    CHECK(std::abs(gammas[0].value.raw() - 0.0) <= 0.02);
    CHECK(std::abs(gammas[1].value.raw() - 0.5) <= 0.02);
  }

  SECTION("acyclic supports give all-bottom exponents") {
    const MatrixLaw law(TropicalMatrix::from_raw(
        {{fixtures::kNinf, 2}, {fixtures::kNinf, fixtures::kNinf}}));
    const auto skel = maxplus::scc_skeleton(maxplus::build_support_graph(law));
    const auto gammas = maxplus::component_exponents(law, skel, McParams{100, 1, 0});
    for (const auto& g : gammas) {
      CHECK(g.value.is_bottom());
      CHECK(g.mode == EstimateMode::kExact);
    }
  }

  SECTION("deterministic blocks come out exact") {
    const MatrixLaw law = fixtures::figure1_law();
    const auto skel = maxplus::scc_skeleton(maxplus::build_support_graph(law));
    const auto gammas = maxplus::component_exponents(law, skel, McParams{100, 1, 0});
    REQUIRE(gammas.size() == 6);
    const std::vector<double> expected{4, 1, 0, 2, 3, 0};
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(gammas[c].mode == EstimateMode::kExact);
      if (c == 2) {
        CHECK(gammas[c].value.is_bottom());
      } else {
        CHECK(gammas[c].value == TropicalValue::finite(expected[c]));
      }
    }
  }
}

TEST_CASE("class and downstream sub-laws share their exponent") {
  // Exact check on the deterministic block fixture, for every component.
  const MatrixLaw law = fixtures::figure1_law();
  const auto graph = maxplus::build_support_graph(law);
  const auto skel = maxplus::scc_skeleton(graph);
  const auto gammas = maxplus::component_exponents(law, skel, McParams{100, 1, 0});
  const auto analysis = maxplus::scc_decompose(graph, gammas);
  for (std::size_t c = 0; c < skel.components.size(); ++c) {
    const auto& cls = analysis.classes[c];
    const TropicalValue g_class = maxplus::karp_max_cycle_mean(
        fixtures::figure1_matrix().submatrix(cls.class_nodes));
    const TropicalValue g_down = maxplus::karp_max_cycle_mean(
        fixtures::figure1_matrix().submatrix(cls.downstream_nodes));
    CHECK(g_class == cls.gamma_downstream);
    CHECK(g_down == cls.gamma_downstream);
  }
}

TEST_CASE("restricted backward products sandwich exactly, step by step") {
  // One shared matrix sequence; the full, downstream, class and component
  // restrictions must satisfy y = y_F >= y_H >= y_c at every length.
  const MatrixLaw law = fixtures::example2_law(0.5);
  const auto graph = maxplus::build_support_graph(law);
  const auto skel = maxplus::scc_skeleton(graph);
  const auto analysis = maxplus::scc_decompose(
      graph, maxplus::component_exponents(law, skel, McParams{2'000, 50, 5}));

  maxplus::SampleStream stream(law, 99, 0, maxplus::SampleDirection::kBackward);
  const auto seq = maxplus::sample_forward_refs(law, 500, stream);

  for (std::size_t c = 0; c < skel.components.size(); ++c) {
    const auto& cls = analysis.classes[c];
    maxplus::RunningProduct full(law.dimension());
    maxplus::RunningProduct down(cls.downstream_nodes.size());
    maxplus::RunningProduct cl(cls.class_nodes.size());
    maxplus::RunningProduct own(skel.components[c].nodes.size());
    bool chain_holds = true;
    for (const auto* m : seq) {
      full.append(*m);
      down.append(m->submatrix(cls.downstream_nodes));
      cl.append(m->submatrix(cls.class_nodes));
      own.append(m->submatrix(skel.components[c].nodes));
      const auto y = full.apply_to_zeros();
      const auto y_down = down.apply_to_zeros();
      const auto y_class = cl.apply_to_zeros();
      const auto y_own = own.apply_to_zeros();
      for (std::size_t k = 0; k < skel.components[c].nodes.size(); ++k) {
        const std::size_t node = skel.components[c].nodes[k];
        const auto pos = [&](const std::vector<std::size_t>& nodes) {
          return static_cast<std::size_t>(
              std::find(nodes.begin(), nodes.end(), node) - nodes.begin());
        };
        const TropicalValue yi = y[node];
        const TropicalValue yf = y_down[pos(cls.downstream_nodes)];
        const TropicalValue yh = y_class[pos(cls.class_nodes)];
        const TropicalValue yc = y_own[k];
        chain_holds = chain_holds && yi == yf && yh <= yf && yc <= yh;
      }
    }
    CHECK(chain_holds);
  }
}

TEST_CASE("exact coordinate limits of the Markov scenario") {
  const MatrixLaw law = maxplus::example1_law(0.3, 0.2);
  const auto limits = maxplus::exact_markov_coordinate_limits(law);
  CHECK(limits.gamma1 == 0.3);
  CHECK(limits.gamma2 == 0.2);
  CHECK(limits.prob_gamma1 == Catch::Approx(0.55).margin(1e-12));
  CHECK(limits.prob_gamma2 == Catch::Approx(0.45).margin(1e-12));
  CHECK(limits.expected_reward == Catch::Approx(0.3).margin(1e-12));

  SECTION("equal rates collapse to a single limit") {
    const auto same = maxplus::exact_markov_coordinate_limits(
        maxplus::example1_law(0.25, 0.25));
    CHECK(same.gamma1 == same.gamma2);
    CHECK(same.prob_gamma1 + same.prob_gamma2 == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("other laws are rejected") {
    CHECK_THROWS_AS(maxplus::exact_markov_coordinate_limits(
                        fixtures::example2_law(0.5)),
                    std::invalid_argument);
  }
}

TEST_CASE("full-law exponent equals the best component exponent") {
  // Random i.i.d. laws with finite diagonals so no trajectory ever dies.
  oracles::Rng rng(71);
  for (int instance = 0; instance < 3; ++instance) {
    const std::size_t d = 2 + rng() % 3;
    const std::size_t atom_count = 1 + rng() % 3;
    std::vector<maxplus::LawAtom> atoms;
    for (std::size_t a = 0; a < atom_count; ++a) {
      TropicalMatrix m = oracles::random_matrix(rng, d, d, 0.5);
      for (std::size_t i = 0; i < d; ++i) {
        m.at(i, i) = TropicalValue::finite(oracles::grid_value(rng));
      }
      atoms.push_back({1.0 / static_cast<double>(atom_count), m});
    }
    const MatrixLaw law(std::move(atoms));

    const auto full = maxplus::estimate_top_exponent(law, McParams{5'000, 100, 13});
    const auto skel = maxplus::scc_skeleton(maxplus::build_support_graph(law));
    const auto gammas = maxplus::component_exponents(law, skel, McParams{5'000, 100, 13});
    ExponentEstimate best = gammas[0];
    for (const auto& g : gammas) {
      if (best.value < g.value) best = g;
    }
    REQUIRE(full.value.is_finite());
    REQUIRE(best.value.is_finite());
    const double tol =
        3.0 * std::sqrt(full.std_error * full.std_error +
                        best.std_error * best.std_error) +
        0.01;
    CHECK(std::abs(full.value.raw() - best.value.raw()) <= tol);
  }
}
