#pragma once

// Piecewise affine maps (X, Z, f): a compact ambient polytope X, finitely
// many open pairwise-disjoint pieces Z_i, and an affine component per piece.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pwaff/exactgeom.hpp"

namespace pwaff {

using Word = std::vector<std::uint16_t>;

struct Piece {
  Polytope domain;  // open
  AffineMap map;
};

class PwaMap {
 public:
  /// Validates the definition: bounded ambient, open pieces with interior,
  /// pairwise-disjoint interiors, pieces and images inside closure(X).
  /// Piece domains are made open. Throws Error{invalid_map}.
  PwaMap(Polytope ambient, std::vector<Piece> pieces);

  /// Skips validation; for internal constructions that are valid by design.
  static PwaMap trusted(Polytope ambient, std::vector<Piece> pieces);

  std::size_t dim() const noexcept { return ambient_.dim(); }
  const Polytope& ambient() const noexcept { return ambient_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  const Piece& piece(std::size_t i) const { return pieces_.at(i); }

  /// Index of the open piece containing x, if any.
  std::optional<std::size_t> locate(const RVec& x) const;
  /// Every piece has an invertible linear part.
  bool non_degenerate() const;

 private:
  PwaMap() = default;
  Polytope ambient_;
  std::vector<Piece> pieces_;
};

/// Throws Error{invalid_map} describing the first violated invariant.
void validate(const PwaMap& f);

struct Cell {
  Polytope region;   // open, pruned
  Word word;         // itinerary i_0 ... i_{n-1}
  AffineMap composed;  // f_{i_{n-1}} o ... o f_{i_0}
};

struct Partition {
  int n = 0;
  std::vector<Cell> cells;  // sorted by word

  std::size_t size() const noexcept { return cells.size(); }
};

struct GrowthEntry {
  int n = 0;
  std::uint64_t value = 0;
  double rate = 0.0;  // (1/n) ln value
};

struct GrowthSeq {
  std::vector<GrowthEntry> entries;

  /// (1/n_max) ln v_{n_max}
  double last_rate() const;
  /// (ln v_{n_max} - ln v_{ceil(n_max/2)}) / (n_max - ceil(n_max/2)); the
  /// headline estimate of a limsup growth rate.
  double two_point_slope() const;
};

struct MultiplicityResult {
  std::uint64_t value = 0;
  RVec witness;
};

struct GrowthReport {
  GrowthSeq cells;         // |Z^n|
  GrowthSeq multiplicity;  // mult(Z^n)
  Partition mid;           // Z^{ceil(n_max/2)}
  Partition last;          // Z^{n_max}
};

struct OrbitResult {
  std::vector<RVec> points;  // x_0 .. x_k
  Word word;                 // pieces visited, one per applied step
  bool complete = false;     // all requested steps applied
};

/// Default cap on |Z^n|; overridden by the PWAFF_CELL_CAP environment variable.
std::size_t default_cell_cap();

/// f(x). Throws Error{singular_point} when x lies in no open piece.
RVec evaluate(const PwaMap& f, const RVec& x);
/// Up to n steps, truncated at the first singular point.
OrbitResult orbit(const PwaMap& f, const RVec& x, int n);

/// Z^1: the pieces themselves.
Partition initial_partition(const PwaMap& f);
/// One refinement step: each cell (R, w, g) is split by the pieces of
/// `step` pulled back through g. `step` is normally the map the partition
/// was built from; a different map on the same ambient gives the partition
/// of a non-autonomous composition (used for fiber words).
Partition refine(const Partition& p, const PwaMap& step,
                 std::size_t cell_cap = default_cell_cap());
/// Z^n. Throws Error{resource_limit} when a level exceeds `cell_cap`.
Partition iterate_partition(const PwaMap& f, int n, std::size_t cell_cap = default_cell_cap());

/// f^t as a piecewise affine map: the cells of Z^t with their composed maps.
PwaMap power(const PwaMap& f, int t, std::size_t cell_cap = default_cell_cap());

/// Number of cells whose closure contains a.
std::uint64_t multiplicity_at(const Partition& p, const RVec& a);
/// Max multiplicity over all cell vertices, with a witness vertex.
MultiplicityResult max_multiplicity(const Partition& p);

/// |Z^n| and mult(Z^n) for n = 1..n_max.
GrowthReport growth_sequences(const PwaMap& f, int n_max,
                              std::size_t cell_cap = default_cell_cap());

}  // namespace pwaff
