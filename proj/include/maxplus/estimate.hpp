#pragma once

// Lyapunov-exponent estimates: an exact value or a Monte Carlo mean with its
// standard error. Shared between the structure and exponent modules.

#include <json.hpp>

#include <cstdint>

#include "maxplus/json_io.hpp"
#include "maxplus/tropical.hpp"

namespace maxplus {

enum class EstimateMode { kExact, kMonteCarlo };

struct ExponentEstimate {
  TropicalValue value = TropicalValue::bottom();
  EstimateMode mode = EstimateMode::kExact;
  double std_error = 0.0;  // Monte Carlo only
  std::int64_t steps = 0;
  std::int64_t trials = 0;

  static ExponentEstimate exact(TropicalValue v) {
    ExponentEstimate e;
    e.value = v;
    return e;
  }
  static ExponentEstimate monte_carlo(TropicalValue v, double std_error,
                                      std::int64_t steps, std::int64_t trials) {
    ExponentEstimate e;
    e.value = v;
    e.mode = EstimateMode::kMonteCarlo;
    e.std_error = std_error;
    e.steps = steps;
    e.trials = trials;
    return e;
  }
};

inline nlohmann::json estimate_to_json(const ExponentEstimate& e) {
  nlohmann::json j;
  j["value"] = tropical_value_to_json(e.value);
  if (e.mode == EstimateMode::kExact) {
    j["mode"] = "exact";
  } else {
    j["mode"] = "mc";
    j["stderr"] = e.std_error;
    j["n"] = e.steps;
    j["trials"] = e.trials;
  }
  return j;
}

}  // namespace maxplus
