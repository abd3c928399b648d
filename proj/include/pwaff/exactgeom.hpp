#pragma once

// Exact rational linear algebra and open/closed convex polytopes in
// half-space form. Nothing in this header rounds.

#include <gmpxx.h>

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pwaff/errors.hpp"

namespace pwaff {

/// Arbitrary precision rational, always canonical (lowest terms, den > 0).
using Rat = mpq_class;

/// Parses "p", "p/q" or "-p/q". Throws Error{parse_error}.
Rat parse_rat(std::string_view text);
/// "p/q", or "p" when q == 1.
std::string format_rat(const Rat& value);

class RVec {
 public:
  RVec() = default;
  explicit RVec(std::size_t dim) : data_(dim) {}
  RVec(std::initializer_list<Rat> values) : data_(values) {}
  explicit RVec(std::vector<Rat> values) : data_(std::move(values)) {}

  static RVec unit(std::size_t dim, std::size_t axis);

  std::size_t dim() const noexcept { return data_.size(); }
  Rat& operator[](std::size_t i) { return data_[i]; }
  const Rat& operator[](std::size_t i) const { return data_[i]; }

  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }

  bool is_zero() const;
  std::vector<double> to_double() const;

  RVec& operator+=(const RVec& other);
  RVec& operator-=(const RVec& other);
  RVec& operator*=(const Rat& scale);

  friend bool operator==(const RVec& a, const RVec& b) { return a.data_ == b.data_; }
  /// Lexicographic, used for deterministic ordering and deduplication.
  friend bool operator<(const RVec& a, const RVec& b);

 private:
  std::vector<Rat> data_;
};

RVec operator+(RVec a, const RVec& b);
RVec operator-(RVec a, const RVec& b);
RVec operator*(const Rat& s, RVec a);
Rat dot(const RVec& a, const RVec& b);

class RMat {
 public:
  RMat() = default;
  RMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  RMat(std::initializer_list<std::initializer_list<Rat>> rows);

  static RMat identity(std::size_t n);
  static RMat diagonal(const RVec& entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  Rat& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rat& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  RVec row(std::size_t r) const;
  RVec col(std::size_t c) const;
  RMat transpose() const;

  Rat determinant() const;
  /// Throws Error{singular_matrix} when det == 0.
  RMat inverse() const;
  /// Solves M x = rhs for square non-singular M; nullopt when singular.
  std::optional<RVec> solve(const RVec& rhs) const;

  bool is_identity() const;
  std::vector<double> to_double_row_major() const;

  friend bool operator==(const RMat& a, const RMat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rat> data_;
};

RMat operator*(const RMat& a, const RMat& b);
RVec operator*(const RMat& a, const RVec& x);
RMat operator*(const Rat& s, RMat a);

/// normal . x < offset (strict) or normal . x <= offset.
struct HalfSpace {
  RVec normal;
  Rat offset;
  bool strict = false;

  std::size_t dim() const noexcept { return normal.dim(); }
  /// Rescales to a primitive integer normal; the point set is unchanged.
  HalfSpace normalized() const;
  bool contains(const RVec& x) const;
  bool contains_closure(const RVec& x) const;

  friend bool operator==(const HalfSpace&, const HalfSpace&) = default;
};

/// x -> linear * x + offset
struct AffineMap {
  RMat linear;
  RVec offset;

  static AffineMap identity(std::size_t dim);

  std::size_t dim() const noexcept { return offset.dim(); }
  RVec operator()(const RVec& x) const;
  /// Throws Error{singular_matrix}.
  AffineMap inverse() const;

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// outer o inner
AffineMap compose(const AffineMap& outer, const AffineMap& inner);
/// (x, y) -> (a(x), b(y))
AffineMap direct_sum(const AffineMap& a, const AffineMap& b);

/// Intersection of finitely many half-spaces in R^dim.
class Polytope {
 public:
  Polytope() = default;
  Polytope(std::size_t dim, std::vector<HalfSpace> constraints);

  /// Axis-aligned box; open when `strict` is set.
  static Polytope box(const RVec& lo, const RVec& hi, bool strict = false);
  /// Closed (or open) convex hull of d+1 affinely independent points.
  static Polytope simplex(std::span<const RVec> points, bool strict = false);
  /// A canonical empty polytope of the given dimension.
  static Polytope empty(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<HalfSpace>& constraints() const noexcept { return constraints_; }

  /// Point-set membership honoring strictness.
  bool contains(const RVec& x) const;
  bool all_strict() const;

  /// Same constraints with every strictness flag set / cleared.
  Polytope as_open() const;
  Polytope as_closed() const;

  /// Drops constraints implied by the others, decided by exact LP. The
  /// point set is preserved. All-strict systems with interior are treated
  /// as interiors of their closures, so touching constraints are dropped too.
  Polytope pruned() const;

 private:
  std::size_t dim_ = 0;
  std::vector<HalfSpace> constraints_;
};

// ---------------------------------------------------------------------------
// Exact LP (simplex with Bland's rule over the rationals).

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  RVec point;   // optimizer, when optimal
  Rat value;    // objective . point, when optimal
};

/// maximize objective . x subject to every row's relaxed inequality
/// (strictness ignored). x is free.
LpResult lp_maximize(std::span<const HalfSpace> rows, const RVec& objective);

// ---------------------------------------------------------------------------
// Polytope operations.

Polytope intersect(const Polytope& p, const Polytope& q);
/// p x q in R^(dim p + dim q).
Polytope product(const Polytope& p, const Polytope& q);
/// {x : g(x) in p}; works for singular linear parts.
Polytope affine_preimage(const Polytope& p, const AffineMap& g);
/// g(p); requires det != 0.
Polytope affine_image(const Polytope& p, const AffineMap& g);
/// True iff the system with every inequality made strict is feasible.
bool has_interior(const Polytope& p);
/// Optimizer of the slack-maximization LP. Throws Error{empty_interior}.
RVec interior_point(const Polytope& p);
/// Every constraint holds with strictness relaxed.
bool closure_contains(const Polytope& p, const RVec& x);
/// Exact vertex set of the closure, sorted lexicographically. Intended for
/// dim <= 4. Throws Error{unbounded_polytope}.
std::vector<RVec> vertices(const Polytope& p);
/// Vertices of a polytope that is already known to be bounded; skips the
/// boundedness LPs and the pruning pass when `already_pruned`.
std::vector<RVec> vertices_bounded(const Polytope& p, bool already_pruned);
/// Relaxed system bounded (every coordinate bounded above and below).
bool is_bounded(const Polytope& p);
/// closure(inner) subset of closure(outer), decided by one LP per
/// constraint of outer. Empty inner is contained in everything.
bool closure_subset(const Polytope& inner, const Polytope& outer);
/// Closures equal as point sets (mutual implication).
bool same_closure(const Polytope& p, const Polytope& q);

}  // namespace pwaff
