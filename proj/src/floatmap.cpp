#include "pwaff/floatmap.hpp"

#include <algorithm>
#include <limits>

namespace pwaff {

namespace {

void fill_constraints(const Polytope& p, std::size_t d, std::vector<double>& normals,
                      std::vector<double>& offsets, std::size_t& rows) {
  const auto& hs = p.constraints();
  rows = hs.size();
  normals.resize(rows * d);
  offsets.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) normals[r * d + c] = hs[r].normal[c].get_d();
    offsets[r] = hs[r].offset.get_d();
  }
}

}  // namespace

FloatMap::FloatMap(const PwaMap& f) : d_(f.dim()) {
  for (const auto& p : f.pieces()) {
    Block b;
    fill_constraints(p.domain, d_, b.normals, b.offsets, b.rows);
    b.linear.resize(d_ * d_);
    b.shift.resize(d_);
    for (std::size_t r = 0; r < d_; ++r) {
      for (std::size_t c = 0; c < d_; ++c) b.linear[r * d_ + c] = p.map.linear(r, c).get_d();
      b.shift[r] = p.map.offset[r].get_d();
    }
    pieces_.push_back(std::move(b));
  }
  fill_constraints(f.ambient(), d_, ambient_.normals, ambient_.offsets, ambient_.rows);
  lo_.assign(d_, std::numeric_limits<double>::infinity());
  hi_.assign(d_, -std::numeric_limits<double>::infinity());
  for (const auto& v : vertices(f.ambient()))
    for (std::size_t c = 0; c < d_; ++c) {
      lo_[c] = std::min(lo_[c], v[c].get_d());
      hi_[c] = std::max(hi_[c], v[c].get_d());
    }
}

std::optional<std::size_t> FloatMap::locate(const double* x) const {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Block& b = pieces_[i];
    bool inside = true;
    for (std::size_t r = 0; r < b.rows && inside; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d_; ++c) s += b.normals[r * d_ + c] * x[c];
      inside = s < b.offsets[r];
    }
    if (inside) return i;
  }
  return std::nullopt;
}

bool FloatMap::in_ambient(const double* x) const {
  for (std::size_t r = 0; r < ambient_.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < d_; ++c) s += ambient_.normals[r * d_ + c] * x[c];
    if (s > ambient_.offsets[r]) return false;
  }
  return true;
}

void FloatMap::apply(std::size_t piece, const double* x, double* out) const {
  const Block& b = pieces_[piece];
  for (std::size_t r = 0; r < d_; ++r) {
    double s = b.shift[r];
    for (std::size_t c = 0; c < d_; ++c) s += b.linear[r * d_ + c] * x[c];
    out[r] = s;
  }
}

bool FloatMap::step(double* x, std::size_t* piece_out) const {
  auto piece = locate(x);
  if (!piece) return false;
  double tmp[16];
  std::vector<double> heap;
  double* out = tmp;
  if (d_ > 16) {
    heap.resize(d_);
    out = heap.data();
  }
  apply(*piece, x, out);
  std::copy(out, out + d_, x);
  if (piece_out) *piece_out = *piece;
  return true;
}

}  // namespace pwaff
