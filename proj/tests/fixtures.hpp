#pragma once

// Shared in-memory fixtures mirroring the bundled model files.

#include <limits>

#include "maxplus/law.hpp"
#include "maxplus/tropical.hpp"

namespace fixtures {

inline constexpr double kNinf = -std::numeric_limits<double>::infinity();

/// The i.i.d. pair: with probability p the queueing matrix that stacks one
/// unit onto the larger backlog coordinate, otherwise the swap matrix.
inline maxplus::TropicalMatrix stack_matrix() {
  return maxplus::TropicalMatrix::from_raw(
      {{0, kNinf, kNinf}, {0, kNinf, kNinf}, {0, 1, 1}});
}

inline maxplus::TropicalMatrix swap_matrix() {
  return maxplus::TropicalMatrix::from_raw(
      {{0, kNinf, kNinf}, {0, kNinf, 0}, {0, 0, kNinf}});
}

inline maxplus::MatrixLaw example2_law(double p = 0.5) {
  return maxplus::MatrixLaw(
      {maxplus::LawAtom{p, stack_matrix()}, maxplus::LawAtom{1.0 - p, swap_matrix()}});
}

/// example2 with the first atom patched so every class submatrix keeps a
/// finite row; the cycle time then exists.
inline maxplus::TropicalMatrix stack_matrix_patched() {
  return maxplus::TropicalMatrix::from_raw(
      {{0, kNinf, kNinf}, {0, 0, kNinf}, {0, 1, 1}});
}

inline maxplus::MatrixLaw example2_modified_law(double p = 0.5) {
  return maxplus::MatrixLaw({maxplus::LawAtom{p, stack_matrix_patched()},
                             maxplus::LawAtom{1.0 - p, swap_matrix()}});
}

/// Deterministic 10-node block fixture: six components with cycle means
/// 4, 1, -inf, 2, 3, 0 wired into the condensation
/// c1->c2, c2->c3, c3->c5, c2->c4, c4->c6, c5->c6.
inline maxplus::TropicalMatrix figure1_matrix() {
  const double x = kNinf;
  return maxplus::TropicalMatrix::from_raw({
      // nodes 0,1: two-cycle of mean 4; arc to node 2
      {x, 4, 0, x, x, x, x, x, x, x},
      {4, x, x, x, x, x, x, x, x, x},
      // nodes 2,3: two-cycle of mean 1; arcs to nodes 4 and 5
      {x, x, x, 1, 0, x, x, x, x, x},
      {x, x, 1, x, x, 0, x, x, x, x},
      // node 4: trivial (no self-loop); arc to node 7
      {x, x, x, x, x, x, x, 0, x, x},
      // nodes 5,6: two-cycle of mean 2; arc to node 9
      {x, x, x, x, x, x, 2, x, x, 0},
      {x, x, x, x, x, 2, x, x, x, x},
      // nodes 7,8: two-cycle of mean 3; arc to node 9
      {x, x, x, x, x, x, x, x, 3, 0},
      {x, x, x, x, x, x, x, 3, x, x},
      // node 9: self-loop of mean 0
      {x, x, x, x, x, x, x, x, x, 0},
  });
}

inline maxplus::MatrixLaw figure1_law() {
  return maxplus::MatrixLaw(figure1_matrix());
}

}  // namespace fixtures
