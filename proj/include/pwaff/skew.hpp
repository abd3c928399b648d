#pragma once

// Piecewise affine skew products f(x, y) = (S(x), T_x(y)) with T_x chosen by
// the base piece (or shift symbol) of x.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pwaff/entropyest.hpp"
#include "pwaff/pwamap.hpp"

namespace pwaff {

struct FullShift {
  int symbols = 2;
};

class SkewProduct {
 public:
  /// assignment[i] = fiber index used over base piece i (or shift symbol i).
  /// Throws Error{invalid_map} when a fiber ambient differs from Y or the
  /// assignment does not cover the base.
  SkewProduct(std::variant<PwaMap, FullShift> base, Polytope fiber_space,
              std::vector<PwaMap> fibers, std::vector<std::size_t> assignment);

  const std::variant<PwaMap, FullShift>& base() const noexcept { return base_; }
  bool has_map_base() const noexcept { return std::holds_alternative<PwaMap>(base_); }
  const PwaMap& base_map() const { return std::get<PwaMap>(base_); }
  const Polytope& fiber_space() const noexcept { return fiber_space_; }
  const std::vector<PwaMap>& fibers() const noexcept { return fibers_; }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
  /// Fiber indices that some base piece or symbol actually uses, ascending.
  std::vector<std::size_t> alphabet() const;

 private:
  std::variant<PwaMap, FullShift> base_;
  Polytope fiber_space_;
  std::vector<PwaMap> fibers_;
  std::vector<std::size_t> assignment_;
};

/// The skew product as a PwaMap on X x Y: pieces Z_i x Y_j over the pieces
/// Y_j of the fiber map assigned to Z_i, with block-diagonal maps. Pieces
/// are ordered by (base piece, fiber piece). Throws Error{invalid_map} for a
/// shift base.
PwaMap flatten(const SkewProduct& sp);

struct FiberWordReport {
  int m = 0;
  std::uint64_t words = 0;
  double lambda_plus_fiber = 0.0;  // max_w (1/m) max_k ln |Lambda^k L|
  /// max_w of the word's H_mult estimate: the two-point slope of mult along
  /// the word's prefixes, capped (as in the base bound) by the word's
  /// sum_i rho bound_i and d(d-1)/2 (lambda_max - lambda_min) when finite.
  /// Both caps vanish for one-dimensional fibers.
  double mult_fiber = 0.0;
  double mult_fiber_slope = 0.0;   // max_w uncapped two-point slope
  double mult_fiber_rate = 0.0;    // max_w (1/m) ln mult
  Word witness_lambda;             // over fiber indices
  Word witness_mult;
};

/// All words of length m over the alphabet; each word's fiber partition is
/// refined step by step with the word's maps. Throws Error{resource_limit}
/// beyond `word_cap` words.
FiberWordReport fiber_word_rates(const SkewProduct& sp, int m, std::uint64_t word_cap = 1 << 16,
                                 std::size_t cell_cap = default_cell_cap());

double shift_base_entropy(int symbols);

struct SkewBounds {
  double lower = 0.0;
  double upper = 0.0;
  double base_entropy = 0.0;     // log N, or the base's covering headline (clamped at 0)
  double base_mult_slope = 0.0;
  FiberWordReport fiber;
};

/// lower = base entropy; upper = base entropy + base H_mult slope (partition
/// depth n) + lambda^+ and H_mult fiber terms at word length m. The base
/// headline uses the smallest eps of `base_config`'s ladder.
SkewBounds skew_entropy_bounds(const SkewProduct& sp, int n, int m,
                           const EstimateConfig& base_config = {});

}  // namespace pwaff
