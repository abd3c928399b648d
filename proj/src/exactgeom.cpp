#include "pwaff/exactgeom.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace pwaff {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::singular_matrix: return "SingularMatrix";
    case ErrorKind::unbounded_polytope: return "UnboundedPolytope";
    case ErrorKind::empty_interior: return "EmptyInterior";
    case ErrorKind::singular_point: return "SingularPoint";
    case ErrorKind::invalid_map: return "InvalidMap";
    case ErrorKind::resource_limit: return "ResourceLimit";
    case ErrorKind::degenerate_piece: return "DegeneratePiece";
    case ErrorKind::estimation_failed: return "EstimationFailed";
    case ErrorKind::parse_error: return "ParseError";
  }
  return "Error";
}

namespace {

void require_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(where) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Rat

Rat parse_rat(std::string_view text) {
  std::string s(text);
  auto bad = [&] { return Error(ErrorKind::parse_error, "not a rational: '" + s + "'"); };
  if (s.empty()) throw bad();
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool seen_slash = false;
  bool digits_before = false;
  bool digits_after = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '/' && !seen_slash) {
      seen_slash = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      (seen_slash ? digits_after : digits_before) = true;
    } else {
      throw bad();
    }
  }
  if (!digits_before || (seen_slash && !digits_after)) throw bad();
  if (s[0] == '+') s.erase(0, 1);
  Rat r;
  if (r.set_str(s, 10) != 0) throw bad();
  if (r.get_den() == 0) throw Error(ErrorKind::parse_error, "zero denominator: '" + s + "'");
  r.canonicalize();
  return r;
}

std::string format_rat(const Rat& value) { return value.get_str(10); }

// ---------------------------------------------------------------------------
// RVec

RVec RVec::unit(std::size_t dim, std::size_t axis) {
  RVec v(dim);
  v[axis] = 1;
  return v;
}

bool RVec::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Rat& x) { return sgn(x) == 0; });
}

std::vector<double> RVec::to_double() const {
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].get_d();
  return out;
}

RVec& RVec::operator+=(const RVec& other) {
  require_dim(dim(), other.dim(), "RVec+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

RVec& RVec::operator-=(const RVec& other) {
  require_dim(dim(), other.dim(), "RVec-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

RVec& RVec::operator*=(const Rat& scale) {
  for (auto& x : data_) x *= scale;
  return *this;
}

bool operator<(const RVec& a, const RVec& b) {
  return std::lexicographical_compare(a.data_.begin(), a.data_.end(), b.data_.begin(),
                                      b.data_.end());
}

RVec operator+(RVec a, const RVec& b) { return a += b; }
RVec operator-(RVec a, const RVec& b) { return a -= b; }
RVec operator*(const Rat& s, RVec a) { return a *= s; }

Rat dot(const RVec& a, const RVec& b) {
  require_dim(a.dim(), b.dim(), "dot");
  Rat acc = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
  return acc;
}

// ---------------------------------------------------------------------------
// RMat

RMat::RMat(std::initializer_list<std::initializer_list<Rat>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_dim(r.size(), cols_, "RMat rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

RMat RMat::identity(std::size_t n) {
  RMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RMat RMat::diagonal(const RVec& entries) {
  RMat m(entries.dim(), entries.dim());
  for (std::size_t i = 0; i < entries.dim(); ++i) m(i, i) = entries[i];
  return m;
}

RVec RMat::row(std::size_t r) const {
  RVec v(cols_);
  for (std::size_t c = 0; c < cols_; ++c) v[c] = (*this)(r, c);
  return v;
}

RVec RMat::col(std::size_t c) const {
  RVec v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

RMat RMat::transpose() const {
  RMat t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Rat RMat::determinant() const {
  if (!square()) throw Error(ErrorKind::dimension_mismatch, "determinant of non-square matrix");
  const std::size_t n = rows_;
  std::vector<Rat> a = data_;
  Rat det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && sgn(a[piv * n + k]) == 0) ++piv;
    if (piv == n) return 0;
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
      det = -det;
    }
    det *= a[k * n + k];
    for (std::size_t r = k + 1; r < n; ++r) {
      if (sgn(a[r * n + k]) == 0) continue;
      Rat f = a[r * n + k] / a[k * n + k];
      for (std::size_t c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
    }
  }
  return det;
}

RMat RMat::inverse() const {
  if (!square()) throw Error(ErrorKind::dimension_mismatch, "inverse of non-square matrix");
  const std::size_t n = rows_;
  RMat a = *this;
  RMat inv = identity(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && sgn(a(piv, k)) == 0) ++piv;
    if (piv == n) throw Error(ErrorKind::singular_matrix, "matrix is not invertible");
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a(k, c), a(piv, c));
        std::swap(inv(k, c), inv(piv, c));
      }
    }
    Rat p = a(k, k);
    for (std::size_t c = 0; c < n; ++c) {
      a(k, c) /= p;
      inv(k, c) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k || sgn(a(r, k)) == 0) continue;
      Rat f = a(r, k);
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) -= f * a(k, c);
        inv(r, c) -= f * inv(k, c);
      }
    }
  }
  return inv;
}

std::optional<RVec> RMat::solve(const RVec& rhs) const {
  require_dim(rows_, rhs.dim(), "solve");
  if (!square()) throw Error(ErrorKind::dimension_mismatch, "solve with non-square matrix");
  const std::size_t n = rows_;
  std::vector<Rat> a = data_;
  RVec b = rhs;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && sgn(a[piv * n + k]) == 0) ++piv;
    if (piv == n) return std::nullopt;
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      if (sgn(a[r * n + k]) == 0) continue;
      Rat f = a[r * n + k] / a[k * n + k];
      for (std::size_t c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
      b[r] -= f * b[k];
    }
  }
  RVec x(n);
  for (std::size_t k = n; k-- > 0;) {
    Rat acc = b[k];
    for (std::size_t c = k + 1; c < n; ++c) acc -= a[k * n + c] * x[c];
    x[k] = acc / a[k * n + k];
  }
  return x;
}

bool RMat::is_identity() const {
  if (!square()) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      if ((*this)(r, c) != (r == c ? 1 : 0)) return false;
  return true;
}

std::vector<double> RMat::to_double_row_major() const {
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].get_d();
  return out;
}

RMat operator*(const RMat& a, const RMat& b) {
  require_dim(a.cols(), b.rows(), "RMat*RMat");
  RMat out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Rat& x = a(r, k);
      if (sgn(x) == 0) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += x * b(k, c);
    }
  return out;
}

RVec operator*(const RMat& a, const RVec& x) {
  require_dim(a.cols(), x.dim(), "RMat*RVec");
  RVec out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Rat acc = 0;
    for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * x[c];
    out[r] = acc;
  }
  return out;
}

RMat operator*(const Rat& s, RMat a) {
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) *= s;
  return a;
}

// ---------------------------------------------------------------------------
// HalfSpace / AffineMap

HalfSpace HalfSpace::normalized() const {
  mpz_class den_lcm = 1;
  for (const auto& a : normal) mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), a.get_den_mpz_t());
  mpz_class num_gcd = 0;
  for (const auto& a : normal) {
    mpz_class scaled = a.get_num() * (den_lcm / a.get_den());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), scaled.get_mpz_t());
  }
  if (num_gcd == 0) return *this;
  Rat scale(den_lcm, num_gcd);
  scale.canonicalize();
  HalfSpace out;
  out.normal = scale * normal;
  out.offset = scale * offset;
  out.strict = strict;
  return out;
}

bool HalfSpace::contains(const RVec& x) const {
  Rat lhs = dot(normal, x);
  return strict ? lhs < offset : lhs <= offset;
}

bool HalfSpace::contains_closure(const RVec& x) const { return dot(normal, x) <= offset; }

AffineMap AffineMap::identity(std::size_t dim) { return {RMat::identity(dim), RVec(dim)}; }

RVec AffineMap::operator()(const RVec& x) const { return linear * x + offset; }

AffineMap AffineMap::inverse() const {
  RMat inv = linear.inverse();
  RVec off = inv * offset;
  off *= Rat(-1);
  return {std::move(inv), std::move(off)};
}

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
  require_dim(outer.dim(), inner.dim(), "compose");
  return {outer.linear * inner.linear, outer.linear * inner.offset + outer.offset};
}

AffineMap direct_sum(const AffineMap& a, const AffineMap& b) {
  const std::size_t p = a.dim(), q = b.dim();
  AffineMap out{RMat(p + q, p + q), RVec(p + q)};
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) out.linear(r, c) = a.linear(r, c);
    out.offset[r] = a.offset[r];
  }
  for (std::size_t r = 0; r < q; ++r) {
    for (std::size_t c = 0; c < q; ++c) out.linear(p + r, p + c) = b.linear(r, c);
    out.offset[p + r] = b.offset[r];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact LP.
//
// The primal  max c.x  s.t.  M x <= b  (x free, r = dim variables) is solved
// through its dual  min b.u  s.t.  M^T u = c, u >= 0,  which has only r
// equality rows. Two-phase simplex with Bland's rule; the primal optimizer is
// read off the simplex multipliers of the final dual basis.

namespace {

struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;  // real columns + artificial columns
  std::vector<Rat> t;    // rows x cols
  std::vector<Rat> rhs;
  std::vector<std::size_t> basis;

  Rat& at(std::size_t r, std::size_t c) { return t[r * cols + c]; }
  const Rat& at(std::size_t r, std::size_t c) const { return t[r * cols + c]; }

  void pivot(std::size_t pr, std::size_t pc) {
    Rat p = at(pr, pc);
    for (std::size_t c = 0; c < cols; ++c) at(pr, c) /= p;
    rhs[pr] /= p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == pr) continue;
      Rat f = at(r, pc);
      if (sgn(f) == 0) continue;
      for (std::size_t c = 0; c < cols; ++c) {
        if (sgn(at(pr, c)) != 0) at(r, c) -= f * at(pr, c);
      }
      rhs[r] -= f * rhs[pr];
    }
    basis[pr] = pc;
  }
};

enum class SimplexOutcome { optimal, unbounded };

// Minimizes cost . z over the tableau; only columns < enter_limit may enter.
SimplexOutcome run_simplex(Tableau& tab, const std::vector<Rat>& cost, std::size_t enter_limit) {
  std::vector<char> is_basic(tab.cols, 0);
  Rat reduced;
  for (;;) {
    std::fill(is_basic.begin(), is_basic.end(), 0);
    for (auto b : tab.basis) is_basic[b] = 1;
    std::size_t entering = tab.cols;
    for (std::size_t j = 0; j < enter_limit; ++j) {
      if (is_basic[j]) continue;
      reduced = cost[j];
      for (std::size_t i = 0; i < tab.rows; ++i) {
        const Rat& a = tab.at(i, j);
        if (sgn(a) != 0 && sgn(cost[tab.basis[i]]) != 0) reduced -= cost[tab.basis[i]] * a;
      }
      if (sgn(reduced) < 0) {
        entering = j;
        break;
      }
    }
    if (entering == tab.cols) return SimplexOutcome::optimal;

    std::size_t leave = tab.rows;
    Rat best_ratio;
    for (std::size_t i = 0; i < tab.rows; ++i) {
      const Rat& a = tab.at(i, entering);
      if (sgn(a) <= 0) continue;
      Rat ratio = tab.rhs[i] / a;
      if (leave == tab.rows || ratio < best_ratio ||
          (ratio == best_ratio && tab.basis[i] < tab.basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == tab.rows) return SimplexOutcome::unbounded;
    tab.pivot(leave, entering);
  }
}

// Returns nullopt when the dual is infeasible (primal unbounded or infeasible),
// otherwise the primal status/optimizer.
std::optional<LpResult> solve_via_dual(std::span<const HalfSpace> rows, const RVec& c) {
  const std::size_t r = c.dim();
  const std::size_t m = rows.size();
  Tableau tab;
  tab.rows = r;
  tab.cols = m + r;
  tab.t.assign(r * (m + r), Rat(0));
  tab.rhs.resize(r);
  tab.basis.resize(r);
  std::vector<int> sign(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    if (sgn(c[i]) < 0) sign[i] = -1;
    for (std::size_t j = 0; j < m; ++j) {
      tab.at(i, j) = rows[j].normal[i];
      if (sign[i] < 0) tab.at(i, j) = -tab.at(i, j);
    }
    tab.at(i, m + i) = 1;
    tab.rhs[i] = sign[i] < 0 ? Rat(-c[i]) : c[i];
    tab.basis[i] = m + i;
  }

  // Phase 1: minimize the sum of artificials.
  std::vector<Rat> cost(m + r, Rat(0));
  for (std::size_t i = 0; i < r; ++i) cost[m + i] = 1;
  run_simplex(tab, cost, m + r);
  for (std::size_t i = 0; i < r; ++i) {
    if (tab.basis[i] >= m && sgn(tab.rhs[i]) != 0) return std::nullopt;
  }
  // Drive zero-level artificials out where possible; rows that cannot be
  // cleared are redundant and never change again.
  for (std::size_t i = 0; i < r; ++i) {
    if (tab.basis[i] < m) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (sgn(tab.at(i, j)) != 0 &&
          std::find(tab.basis.begin(), tab.basis.end(), j) == tab.basis.end()) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2.
  for (std::size_t j = 0; j < m; ++j) cost[j] = rows[j].offset;
  for (std::size_t i = 0; i < r; ++i) cost[m + i] = 0;
  LpResult result;
  if (run_simplex(tab, cost, m) == SimplexOutcome::unbounded) {
    result.status = LpStatus::infeasible;
    return result;
  }
  RVec x(r);
  for (std::size_t i = 0; i < r; ++i) {
    Rat pi = 0;
    for (std::size_t k = 0; k < r; ++k) {
      const Rat& cb = cost[tab.basis[k]];
      if (sgn(cb) != 0) pi += cb * tab.at(k, m + i);
    }
    x[i] = sign[i] < 0 ? Rat(-pi) : pi;
  }
  result.status = LpStatus::optimal;
  result.value = dot(c, x);
  result.point = std::move(x);
  return result;
}

}  // namespace

LpResult lp_maximize(std::span<const HalfSpace> rows, const RVec& objective) {
  for (const auto& h : rows) require_dim(h.dim(), objective.dim(), "lp_maximize");
  if (auto res = solve_via_dual(rows, objective)) return *res;
  // Dual infeasible: the primal is unbounded if it is feasible at all.
  auto feas = solve_via_dual(rows, RVec(objective.dim()));
  LpResult out;
  out.status = (feas && feas->status == LpStatus::optimal) ? LpStatus::unbounded
                                                           : LpStatus::infeasible;
  return out;
}

// ---------------------------------------------------------------------------
// Polytope

Polytope::Polytope(std::size_t dim, std::vector<HalfSpace> constraints)
    : dim_(dim), constraints_(std::move(constraints)) {
  for (const auto& h : constraints_) {
    require_dim(h.dim(), dim_, "Polytope constraint");
    if (h.normal.is_zero()) throw Error(ErrorKind::invalid_map, "half-space with zero normal");
  }
}

Polytope Polytope::box(const RVec& lo, const RVec& hi, bool strict) {
  require_dim(lo.dim(), hi.dim(), "box");
  std::vector<HalfSpace> hs;
  for (std::size_t i = 0; i < lo.dim(); ++i) {
    RVec e = RVec::unit(lo.dim(), i);
    hs.push_back({e, hi[i], strict});
    hs.push_back({Rat(-1) * e, Rat(-lo[i]), strict});
  }
  return Polytope(lo.dim(), std::move(hs));
}

Polytope Polytope::simplex(std::span<const RVec> points, bool strict) {
  const std::size_t d = points.empty() ? 0 : points[0].dim();
  if (points.size() != d + 1) {
    throw Error(ErrorKind::dimension_mismatch, "simplex needs dim+1 points");
  }
  std::vector<HalfSpace> hs;
  for (std::size_t skip = 0; skip <= d; ++skip) {
    // Hyperplane through all points except `skip`: solve for normal with
    // normal . (p_k - p_0') = 0 using a nullspace computation.
    std::vector<RVec> face;
    for (std::size_t k = 0; k <= d; ++k)
      if (k != skip) face.push_back(points[k]);
    // Build (d-1) x d system of edge vectors and find a nullspace vector.
    RMat edges(d - 1 + 1, d);
    for (std::size_t k = 1; k < face.size(); ++k) {
      RVec e = face[k] - face[0];
      for (std::size_t c = 0; c < d; ++c) edges(k - 1, c) = e[c];
    }
    RVec normal(d);
    bool found = false;
    for (std::size_t trial = 0; trial < d && !found; ++trial) {
      RMat sys = edges;
      for (std::size_t c = 0; c < d; ++c) sys(d - 1, c) = (c == trial) ? 1 : 0;
      RVec rhs(d);
      rhs[d - 1] = 1;
      if (auto sol = sys.solve(rhs)) {
        normal = *sol;
        found = true;
      }
    }
    if (!found) throw Error(ErrorKind::invalid_map, "degenerate simplex");
    Rat off = dot(normal, face[0]);
    if (dot(normal, points[skip]) > off) {
      normal *= Rat(-1);
      off = -off;
    }
    hs.push_back(HalfSpace{normal, off, strict}.normalized());
  }
  return Polytope(d, std::move(hs));
}

Polytope Polytope::empty(std::size_t dim) {
  RVec e = RVec::unit(dim, 0);
  return Polytope(dim, {HalfSpace{e, Rat(-1), false}, HalfSpace{Rat(-1) * e, Rat(0), false}});
}

bool Polytope::contains(const RVec& x) const {
  require_dim(x.dim(), dim_, "contains");
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const HalfSpace& h) { return h.contains(x); });
}

bool Polytope::all_strict() const {
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [](const HalfSpace& h) { return h.strict; });
}

Polytope Polytope::as_open() const {
  Polytope p = *this;
  for (auto& h : p.constraints_) h.strict = true;
  return p;
}

Polytope Polytope::as_closed() const {
  Polytope p = *this;
  for (auto& h : p.constraints_) h.strict = false;
  return p;
}

namespace {

// Normalizes every constraint, removes exact duplicates and keeps only the
// tightest of parallel same-direction constraints. Point set unchanged.
std::vector<HalfSpace> dedupe(const std::vector<HalfSpace>& in) {
  std::vector<HalfSpace> out;
  out.reserve(in.size());
  for (const auto& h : in) {
    HalfSpace n = h.normalized();
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const HalfSpace& o) { return o.normal == n.normal; });
    if (it == out.end()) {
      out.push_back(std::move(n));
    } else if (n.offset < it->offset) {
      *it = std::move(n);
    } else if (n.offset == it->offset) {
      it->strict = it->strict || n.strict;
    }
  }
  return out;
}

}  // namespace

Polytope Polytope::pruned() const {
  std::vector<HalfSpace> hs = dedupe(constraints_);
  const bool interior_semantics = all_strict() && has_interior(Polytope(dim_, hs));
  std::vector<char> keep(hs.size(), 1);
  std::vector<HalfSpace> others;
  for (std::size_t j = 0; j < hs.size(); ++j) {
    others.clear();
    for (std::size_t k = 0; k < hs.size(); ++k)
      if (k != j && keep[k]) others.push_back(hs[k]);
    if (others.empty()) continue;
    LpResult res = lp_maximize(others, hs[j].normal);
    if (res.status != LpStatus::optimal) continue;
    bool implied = (interior_semantics || !hs[j].strict) ? res.value <= hs[j].offset
                                                         : res.value < hs[j].offset;
    if (implied) keep[j] = 0;
  }
  std::vector<HalfSpace> out;
  for (std::size_t j = 0; j < hs.size(); ++j)
    if (keep[j]) out.push_back(std::move(hs[j]));
  return Polytope(dim_, std::move(out));
}

// ---------------------------------------------------------------------------
// Operations

Polytope intersect(const Polytope& p, const Polytope& q) {
  require_dim(p.dim(), q.dim(), "intersect");
  std::vector<HalfSpace> hs = p.constraints();
  hs.insert(hs.end(), q.constraints().begin(), q.constraints().end());
  return Polytope(p.dim(), std::move(hs));
}

Polytope product(const Polytope& p, const Polytope& q) {
  const std::size_t dp = p.dim(), dq = q.dim();
  std::vector<HalfSpace> hs;
  for (const auto& h : p.constraints()) {
    RVec n(dp + dq);
    for (std::size_t j = 0; j < dp; ++j) n[j] = h.normal[j];
    hs.push_back({std::move(n), h.offset, h.strict});
  }
  for (const auto& h : q.constraints()) {
    RVec n(dp + dq);
    for (std::size_t j = 0; j < dq; ++j) n[dp + j] = h.normal[j];
    hs.push_back({std::move(n), h.offset, h.strict});
  }
  return Polytope(dp + dq, std::move(hs));
}

Polytope affine_preimage(const Polytope& p, const AffineMap& g) {
  require_dim(p.dim(), g.dim(), "affine_preimage");
  RMat at = g.linear.transpose();
  std::vector<HalfSpace> hs;
  hs.reserve(p.constraints().size());
  for (const auto& h : p.constraints()) {
    HalfSpace pulled{at * h.normal, h.offset - dot(h.normal, g.offset), h.strict};
    if (pulled.normal.is_zero()) {
      // Constant constraint 0 (<|<=) offset.
      bool holds = pulled.strict ? sgn(pulled.offset) > 0 : sgn(pulled.offset) >= 0;
      if (!holds) return Polytope::empty(p.dim());
      continue;
    }
    hs.push_back(pulled.normalized());
  }
  return Polytope(p.dim(), std::move(hs));
}

Polytope affine_image(const Polytope& p, const AffineMap& g) {
  if (sgn(g.linear.determinant()) == 0) {
    throw Error(ErrorKind::singular_matrix, "affine_image needs an invertible linear part");
  }
  return affine_preimage(p, g.inverse());
}

namespace {

// max t s.t. a.x + t <= b for every constraint, t <= 1.
LpResult slack_lp(const Polytope& p) {
  const std::size_t d = p.dim();
  std::vector<HalfSpace> rows;
  rows.reserve(p.constraints().size() + 1);
  for (const auto& h : p.constraints()) {
    RVec n(d + 1);
    for (std::size_t i = 0; i < d; ++i) n[i] = h.normal[i];
    n[d] = 1;
    rows.push_back({std::move(n), h.offset, false});
  }
  rows.push_back({RVec::unit(d + 1, d), Rat(1), false});
  return lp_maximize(rows, RVec::unit(d + 1, d));
}

}  // namespace

bool has_interior(const Polytope& p) {
  if (p.constraints().empty()) return true;
  LpResult res = slack_lp(p);
  return res.status == LpStatus::optimal && sgn(res.value) > 0;
}

RVec interior_point(const Polytope& p) {
  if (p.constraints().empty()) return RVec(p.dim());
  LpResult res = slack_lp(p);
  if (res.status != LpStatus::optimal || sgn(res.value) <= 0) {
    throw Error(ErrorKind::empty_interior, "polytope has empty interior");
  }
  RVec x(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) x[i] = res.point[i];
  return x;
}

bool closure_contains(const Polytope& p, const RVec& x) {
  require_dim(p.dim(), x.dim(), "closure_contains");
  return std::all_of(p.constraints().begin(), p.constraints().end(),
                     [&](const HalfSpace& h) { return h.contains_closure(x); });
}

bool is_bounded(const Polytope& p) {
  for (std::size_t i = 0; i < p.dim(); ++i) {
    for (int s : {1, -1}) {
      RVec c = RVec::unit(p.dim(), i);
      if (s < 0) c *= Rat(-1);
      if (lp_maximize(p.constraints(), c).status == LpStatus::unbounded) return false;
    }
  }
  return true;
}

std::vector<RVec> vertices_bounded(const Polytope& p, bool already_pruned) {
  const Polytope q = already_pruned ? p : p.as_closed().pruned();
  const auto& hs = q.constraints();
  const std::size_t d = q.dim();
  const std::size_t m = hs.size();
  std::vector<RVec> out;
  if (m < d) return out;
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  RMat sys(d, d);
  RVec rhs(d);
  for (;;) {
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) sys(r, c) = hs[idx[r]].normal[c];
      rhs[r] = hs[idx[r]].offset;
    }
    if (auto x = sys.solve(rhs)) {
      if (closure_contains(q, *x)) out.push_back(std::move(*x));
    }
    // next combination
    std::size_t k = d;
    while (k > 0 && idx[k - 1] == m - d + (k - 1)) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<RVec> vertices(const Polytope& p) {
  if (!is_bounded(p)) throw Error(ErrorKind::unbounded_polytope, "vertices of unbounded polytope");
  return vertices_bounded(p, false);
}

bool closure_subset(const Polytope& inner, const Polytope& outer) {
  require_dim(inner.dim(), outer.dim(), "closure_subset");
  for (const auto& h : outer.constraints()) {
    LpResult res = lp_maximize(inner.constraints(), h.normal);
    if (res.status == LpStatus::infeasible) return true;
    if (res.status == LpStatus::unbounded || res.value > h.offset) return false;
  }
  return true;
}

bool same_closure(const Polytope& p, const Polytope& q) {
  return closure_subset(p, q) && closure_subset(q, p);
}

}  // namespace pwaff
