#pragma once

// JSON encoding of the shared matrix literal format: array-of-arrays with
// finite entries as numbers and bottom as the string "-inf".

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "maxplus/tropical.hpp"

namespace maxplus {

inline TropicalValue tropical_value_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "-inf") return TropicalValue::bottom();
    throw std::invalid_argument("matrix entry string must be \"-inf\", got \"" +
                                j.get<std::string>() + "\"");
  }
  if (!j.is_number()) {
    throw std::invalid_argument("matrix entry must be a number or \"-inf\"");
  }
  const double x = j.get<double>();
  if (!std::isfinite(x)) {
    throw std::invalid_argument("matrix entry must be a finite number");
  }
  return TropicalValue::finite(x);
}

inline nlohmann::json tropical_value_to_json(TropicalValue v) {
  if (v.is_bottom()) return "-inf";
  return v.raw();
}

inline TropicalMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("matrix literal must be a non-empty array of arrays");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    throw std::invalid_argument("matrix literal must be a non-empty array of arrays");
  }
  const std::size_t cols = j[0].size();
  TropicalMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw std::invalid_argument("ragged matrix literal");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      m.at(i, k) = tropical_value_from_json(j[i][k]);
    }
  }
  return m;
}

inline nlohmann::json matrix_to_json(const TropicalMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      row.push_back(tropical_value_to_json(m.at(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json vector_to_json(const TropicalVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < v.dim(); ++i) {
    out.push_back(tropical_value_to_json(v[i]));
  }
  return out;
}

}  // namespace maxplus
