#pragma once

// Max-plus (tropical) arithmetic: scalars over R ∪ {-inf}, dense matrices and
// vectors, overflow-safe long products, and a brute-force path-weight oracle
// for cross-checking them on small instances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxplus {

namespace detail {

// Neumaier-compensated running sum; keeps shift accumulators accurate over
// 1e4-1e5 product steps.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

/// Scalar of the max-plus semiring: a finite real or bottom (-inf).
/// ⊕ is max (identity: bottom), ⊗ is + (identity: 0, bottom absorbing).
/// NaN and +inf are rejected on every construction path, so arithmetic can
/// run on the raw doubles without poisoning.
class TropicalValue {
 public:
  constexpr TropicalValue() : raw_(-std::numeric_limits<double>::infinity()) {}

  static constexpr TropicalValue bottom() { return TropicalValue(); }

  static TropicalValue finite(double x) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("tropical value must be a finite real");
    }
    TropicalValue v;
    v.raw_ = x;
    return v;
  }

  /// Accepts any finite real or -inf (encoding bottom); rejects NaN and +inf.
  static TropicalValue from_raw(double x) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("tropical value must be finite or -inf");
    }
    TropicalValue v;
    v.raw_ = x;
    return v;
  }

  constexpr bool is_bottom() const {
    return raw_ == -std::numeric_limits<double>::infinity();
  }
  constexpr bool is_finite() const { return !is_bottom(); }

  /// Raw payload; bottom is encoded as -inf.
  constexpr double raw() const { return raw_; }

  double finite_value() const {
    if (is_bottom()) throw std::logic_error("bottom has no finite value");
    return raw_;
  }

  friend constexpr bool operator==(TropicalValue a, TropicalValue b) {
    return a.raw_ == b.raw_;
  }
  // Total order with bottom as least element.
  friend constexpr bool operator<(TropicalValue a, TropicalValue b) {
    return a.raw_ < b.raw_;
  }
  friend constexpr bool operator<=(TropicalValue a, TropicalValue b) {
    return a.raw_ <= b.raw_;
  }

 private:
  double raw_;
};

/// a ⊕ b = max(a, b)
constexpr TropicalValue oplus(TropicalValue a, TropicalValue b) {
  return a < b ? b : a;
}

/// a ⊗ b = a + b, with bottom absorbing.
inline TropicalValue otimes(TropicalValue a, TropicalValue b) {
  // -inf + x == -inf and +inf cannot occur, so plain addition is exact.
  return TropicalValue::from_raw(a.raw() + b.raw());
}

inline std::string to_string(TropicalValue v) {
  return v.is_bottom() ? std::string("-inf") : std::to_string(v.raw());
}

class TropicalVector {
 public:
  explicit TropicalVector(std::size_t dim)
      : entries_(check_dim(dim), TropicalValue::bottom()) {}
  explicit TropicalVector(std::vector<TropicalValue> entries)
      : entries_(std::move(entries)) {
    check_dim(entries_.size());
  }

  /// The 0-vector: the canonical initial condition.
  static TropicalVector zeros(std::size_t dim) {
    TropicalVector v(dim);
    for (auto& e : v.entries_) e = TropicalValue::finite(0.0);
    return v;
  }

  static TropicalVector from_raw(std::span<const double> raw) {
    std::vector<TropicalValue> e;
    e.reserve(raw.size());
    for (double x : raw) e.push_back(TropicalValue::from_raw(x));
    return TropicalVector(std::move(e));
  }

  std::size_t dim() const { return entries_.size(); }
  TropicalValue operator[](std::size_t i) const { return entries_[i]; }
  TropicalValue& operator[](std::size_t i) { return entries_[i]; }
  std::span<const TropicalValue> entries() const { return entries_; }

  TropicalValue max_entry() const {
    TropicalValue m = TropicalValue::bottom();
    for (auto v : entries_) m = oplus(m, v);
    return m;
  }

  friend bool operator==(const TropicalVector& a, const TropicalVector& b) {
    return a.entries_ == b.entries_;
  }

 private:
  static std::size_t check_dim(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("vector dimension must be >= 1");
    return dim;
  }
  std::vector<TropicalValue> entries_;
};

/// Dense row-major matrix over the max-plus semiring. All-bottom rows and
/// matrices are legal values here; the row condition is a queryable
/// predicate, never an assumption.
class TropicalMatrix {
 public:
  TropicalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("matrix dimensions must be >= 1");
    }
  }

  /// Tropical identity: 0 on the diagonal, bottom elsewhere.
  static TropicalMatrix identity(std::size_t d) {
    TropicalMatrix e(d, d);
    for (std::size_t i = 0; i < d; ++i) e.at(i, i) = TropicalValue::finite(0.0);
    return e;
  }

  /// Builds from raw doubles (-inf encodes bottom); rejects NaN and +inf.
  static TropicalMatrix from_raw(
      const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
      throw std::invalid_argument("matrix dimensions must be >= 1");
    }
    TropicalMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < m.rows_; ++i) {
      if (rows[i].size() != m.cols_) {
        throw std::invalid_argument("ragged matrix literal");
      }
      for (std::size_t j = 0; j < m.cols_; ++j) {
        m.at(i, j) = TropicalValue::from_raw(rows[i][j]);
      }
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  TropicalValue& at(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }
  TropicalValue at(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  std::span<const TropicalValue> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }

  bool row_has_finite(std::size_t i) const {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at(i, j).is_finite()) return true;
    }
    return false;
  }
  bool every_row_has_finite() const {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!row_has_finite(i)) return false;
    }
    return true;
  }

  TropicalValue max_entry() const {
    TropicalValue m = TropicalValue::bottom();
    for (auto v : entries_) m = oplus(m, v);
    return m;
  }

  /// Restriction (A_ij) for i,j in `nodes` (0-based, strictly increasing).
  TropicalMatrix submatrix(std::span<const std::size_t> nodes) const {
    if (nodes.empty()) throw std::invalid_argument("empty node set");
    TropicalMatrix s(nodes.size(), nodes.size());
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = 0; b < nodes.size(); ++b) {
        if (nodes[a] >= rows_ || nodes[b] >= cols_) {
          throw std::out_of_range("submatrix index out of range");
        }
        s.at(a, b) = at(nodes[a], nodes[b]);
      }
    }
    return s;
  }

  friend bool operator==(const TropicalMatrix& a, const TropicalMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<TropicalValue> entries_;
};

/// (A ⊗ B)_ij = max_k (A_ik + B_kj)
inline TropicalMatrix multiply(const TropicalMatrix& a,
                               const TropicalMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matrix product dimension mismatch");
  }
  TropicalMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k).raw();
      if (std::isinf(aik)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        const double w = aik + b.at(k, j).raw();
        if (w > c.at(i, j).raw()) c.at(i, j) = TropicalValue::from_raw(w);
      }
    }
  }
  return c;
}

/// (A ⊗ x)_i = max_j (A_ij + x_j); bottom iff no j has both parts finite.
inline TropicalVector apply(const TropicalMatrix& a, const TropicalVector& x) {
  if (a.cols() != x.dim()) {
    throw std::invalid_argument("matrix-vector dimension mismatch");
  }
  TropicalVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double w = a.at(i, j).raw() + x[j].raw();
      if (w > best) best = w;
    }
    y[i] = TropicalValue::from_raw(best);
  }
  return y;
}

inline TropicalMatrix operator*(const TropicalMatrix& a,
                                const TropicalMatrix& b) {
  return multiply(a, b);
}
inline TropicalVector operator*(const TropicalMatrix& a,
                                const TropicalVector& x) {
  return apply(a, x);
}

/// λ ⊗ x, coordinatewise.
inline TropicalVector scale(TropicalValue lambda, const TropicalVector& x) {
  TropicalVector y(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) y[i] = otimes(lambda, x[i]);
  return y;
}

inline bool entrywise_leq(const TropicalMatrix& a, const TropicalMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (!(a.at(i, j) <= b.at(i, j))) return false;
    }
  }
  return true;
}

/// Support skeleton: 0 where A is finite, bottom elsewhere. Commutes with
/// the product: pattern(A ⊗ B) = pattern(A) ⊗ pattern(B).
inline TropicalMatrix pattern(const TropicalMatrix& a) {
  TropicalMatrix p(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a.at(i, j).is_finite()) p.at(i, j) = TropicalValue::finite(0.0);
    }
  }
  return p;
}

/// A long product stored as shift ⊗ matrix with the matrix renormalized so
/// its maximal finite entry is 0 (or the matrix is all-bottom). Keeps
/// 1e4-step products inside double range without losing the entry layout.
struct NormalizedProduct {
  TropicalMatrix matrix;
  double shift = 0.0;

  TropicalMatrix reconstruct() const {
    TropicalMatrix r = matrix;
    for (std::size_t i = 0; i < r.rows(); ++i) {
      for (std::size_t j = 0; j < r.cols(); ++j) {
        if (r.at(i, j).is_finite()) {
          r.at(i, j) = TropicalValue::finite(r.at(i, j).raw() + shift);
        }
      }
    }
    return r;
  }
};

/// Left-to-right product accumulator with per-step renormalization.
class RunningProduct {
 public:
  explicit RunningProduct(std::size_t dim)
      : product_(TropicalMatrix::identity(dim)) {}

  void append(const TropicalMatrix& a) {
    product_ = multiply(product_, a);
    renormalize();
    ++length_;
  }

  std::size_t length() const { return length_; }

  NormalizedProduct normalized() const {
    return NormalizedProduct{product_, shift_.value()};
  }

  /// The product applied to the 0-vector: coordinate i is the row-i maximum
  /// plus the accumulated shift.
  TropicalVector apply_to_zeros() const {
    TropicalVector y(product_.rows());
    const double s = shift_.value();
    for (std::size_t i = 0; i < product_.rows(); ++i) {
      TropicalValue m = TropicalValue::bottom();
      for (std::size_t j = 0; j < product_.cols(); ++j) {
        m = oplus(m, product_.at(i, j));
      }
      y[i] = m.is_bottom() ? m : TropicalValue::finite(m.raw() + s);
    }
    return y;
  }

 private:
  void renormalize() {
    const TropicalValue m = product_.max_entry();
    if (m.is_bottom() || m.raw() == 0.0) return;
    for (std::size_t i = 0; i < product_.rows(); ++i) {
      for (std::size_t j = 0; j < product_.cols(); ++j) {
        if (product_.at(i, j).is_finite()) {
          product_.at(i, j) =
              TropicalValue::finite(product_.at(i, j).raw() - m.raw());
        }
      }
    }
    shift_.add(m.raw());
  }

  TropicalMatrix product_;
  detail::CompensatedSum shift_;
  std::size_t length_ = 0;
};

/// Product of a non-empty sequence, left to right, renormalized per step.
inline NormalizedProduct product_range(std::span<const TropicalMatrix> ms) {
  if (ms.empty()) throw std::invalid_argument("empty product");
  const std::size_t d = ms.front().rows();
  for (const auto& m : ms) {
    if (!m.square() || m.rows() != d) {
      throw std::invalid_argument("product requires square matrices of one size");
    }
  }
  RunningProduct p(d);
  for (const auto& m : ms) p.append(m);
  return p.normalized();
}

inline constexpr std::size_t kPathOracleMaxDim = 6;
inline constexpr std::size_t kPathOracleMaxLength = 8;

/// Brute-force maximum path weight: max over node sequences
/// i = i_0, ..., i_n = j of sum_l M_l(i_l, i_{l+1}). Exponential; capped at
/// d <= 6, length <= 8. Agrees entrywise with the matrix-product fold.
inline TropicalValue path_weight_oracle(std::span<const TropicalMatrix> ms,
                                        std::size_t i, std::size_t j) {
  if (ms.empty()) throw std::invalid_argument("empty matrix sequence");
  const std::size_t d = ms.front().rows();
  for (const auto& m : ms) {
    if (!m.square() || m.rows() != d) {
      throw std::invalid_argument("path oracle requires square matrices of one size");
    }
  }
  if (d > kPathOracleMaxDim || ms.size() > kPathOracleMaxLength) {
    throw std::invalid_argument("path oracle instance exceeds enumeration cap");
  }
  if (i >= d || j >= d) throw std::out_of_range("path endpoint out of range");

  double best = -std::numeric_limits<double>::infinity();
  // Depth-first over intermediate nodes, accumulating left to right so the
  // addition order matches the product fold exactly.
  struct Frame {
    std::size_t node;
    double weight;
    std::size_t depth;
  };
  std::vector<Frame> stack;
  stack.push_back({i, 0.0, 0});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.depth == ms.size()) {
      if (f.node == j && f.weight > best) best = f.weight;
      continue;
    }
    const TropicalMatrix& m = ms[f.depth];
    for (std::size_t next = 0; next < d; ++next) {
      const TropicalValue arc = m.at(f.node, next);
      if (arc.is_bottom()) continue;
      stack.push_back({next, f.weight + arc.raw(), f.depth + 1});
    }
  }
  return TropicalValue::from_raw(best);
}

/// Trajectory state for x(n) = A(n-1) ⊗ ... ⊗ A(0) ⊗ 0, stored as
/// shift + residual with the maximal finite residual kept at 0.
class ShiftedVector {
 public:
  static ShiftedVector zeros(std::size_t dim) {
    ShiftedVector v;
    v.values_.assign(dim, 0.0);
    v.scratch_.assign(dim, 0.0);
    return v;
  }

  std::size_t dim() const { return values_.size(); }

  /// x <- a ⊗ x, renormalized.
  void step(const TropicalMatrix& a) {
    const std::size_t d = values_.size();
    if (a.rows() != d || a.cols() != d) {
      throw std::invalid_argument("trajectory step dimension mismatch");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < d; ++j) {
        const double w = a.at(i, j).raw() + values_[j];
        if (w > m) m = w;
      }
      scratch_[i] = m;
      if (m > best) best = m;
    }
    if (std::isinf(best)) {
      values_.assign(d, -std::numeric_limits<double>::infinity());
      return;
    }
    for (std::size_t i = 0; i < d; ++i) values_[i] = scratch_[i] - best;
    shift_.add(best);
  }

  TropicalValue coordinate(std::size_t i) const {
    const double r = values_[i];
    if (std::isinf(r)) return TropicalValue::bottom();
    return TropicalValue::finite(r + shift_.value());
  }
  TropicalValue max_coordinate() const {
    double m = *std::max_element(values_.begin(), values_.end());
    if (std::isinf(m)) return TropicalValue::bottom();
    return TropicalValue::finite(m + shift_.value());
  }
  TropicalValue min_coordinate() const {
    double m = *std::min_element(values_.begin(), values_.end());
    if (std::isinf(m)) return TropicalValue::bottom();
    return TropicalValue::finite(m + shift_.value());
  }
 private:
  std::vector<double> values_;
  std::vector<double> scratch_;
  detail::CompensatedSum shift_;
};

}  // namespace maxplus
