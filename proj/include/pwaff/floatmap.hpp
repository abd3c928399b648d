#pragma once

// Double-precision copy of a PwaMap for orbit sampling. Flat storage, no
// allocation per step.

#include <cstddef>
#include <optional>
#include <vector>

#include "pwaff/pwamap.hpp"

namespace pwaff {

class FloatMap {
 public:
  explicit FloatMap(const PwaMap& f);

  std::size_t dim() const noexcept { return d_; }
  std::size_t piece_count() const noexcept { return pieces_.size(); }
  const std::vector<double>& lower() const noexcept { return lo_; }
  const std::vector<double>& upper() const noexcept { return hi_; }

  /// Index of the open piece containing x (strict inequalities).
  std::optional<std::size_t> locate(const double* x) const;
  /// x inside closure(X).
  bool in_ambient(const double* x) const;
  /// out = f_piece(x); out must not alias x.
  void apply(std::size_t piece, const double* x, double* out) const;
  /// One step in place; false (x untouched) at a singular point.
  bool step(double* x, std::size_t* piece_out = nullptr) const;

 private:
  struct Block {
    std::size_t rows = 0;
    std::vector<double> normals;  // rows x d, row-major
    std::vector<double> offsets;
    std::vector<double> linear;   // d x d, row-major
    std::vector<double> shift;
  };
  std::size_t d_ = 0;
  std::vector<Block> pieces_;
  Block ambient_;
  std::vector<double> lo_, hi_;  // bounding box of X
};

}  // namespace pwaff
