#include "pwaff/pwamap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "pwaff/parallel.hpp"

namespace pwaff {

// ---------------------------------------------------------------------------
// PwaMap

PwaMap::PwaMap(Polytope ambient, std::vector<Piece> pieces) {
  ambient_ = ambient.as_closed();
  pieces_ = std::move(pieces);
  for (auto& p : pieces_) p.domain = p.domain.as_open();
  validate(*this);
}

PwaMap PwaMap::trusted(Polytope ambient, std::vector<Piece> pieces) {
  PwaMap f;
  f.ambient_ = ambient.as_closed();
  f.pieces_ = std::move(pieces);
  for (auto& p : f.pieces_) p.domain = p.domain.as_open();
  return f;
}

std::optional<std::size_t> PwaMap::locate(const RVec& x) const {
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    if (pieces_[i].domain.contains(x)) return i;
  return std::nullopt;
}

bool PwaMap::non_degenerate() const {
  return std::all_of(pieces_.begin(), pieces_.end(),
                     [](const Piece& p) { return sgn(p.map.linear.determinant()) != 0; });
}

void validate(const PwaMap& f) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_map, msg); };
  const std::size_t d = f.dim();
  if (d == 0) fail("ambient dimension must be positive");
  if (f.pieces().empty()) fail("at least one piece is required");
  if (f.pieces().size() > std::numeric_limits<std::uint16_t>::max()) fail("too many pieces");
  if (!is_bounded(f.ambient())) fail("ambient polytope is unbounded");
  if (!has_interior(f.ambient())) fail("ambient polytope has empty interior");
  for (std::size_t i = 0; i < f.pieces().size(); ++i) {
    const Piece& p = f.pieces()[i];
    const std::string tag = "piece " + std::to_string(i) + ": ";
    if (p.domain.dim() != d || p.map.dim() != d || p.map.linear.rows() != d ||
        p.map.linear.cols() != d) {
      fail(tag + "dimension mismatch");
    }
    if (!has_interior(p.domain)) fail(tag + "domain has empty interior");
    if (!closure_subset(p.domain, f.ambient())) fail(tag + "domain leaves the ambient polytope");
    if (!closure_subset(p.domain, affine_preimage(f.ambient(), p.map))) {
      fail(tag + "image leaves the ambient polytope");
    }
  }
  for (std::size_t i = 0; i < f.pieces().size(); ++i)
    for (std::size_t j = i + 1; j < f.pieces().size(); ++j)
      if (has_interior(intersect(f.pieces()[i].domain, f.pieces()[j].domain))) {
        fail("pieces " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
}

// ---------------------------------------------------------------------------
// Growth sequences

double GrowthSeq::last_rate() const { return entries.empty() ? 0.0 : entries.back().rate; }

double GrowthSeq::two_point_slope() const {
  if (entries.empty()) return 0.0;
  const int n_max = entries.back().n;
  const int n_mid = (n_max + 1) / 2;
  if (n_mid == n_max) return entries.back().rate;
  auto find = [&](int n) -> const GrowthEntry* {
    for (const auto& e : entries)
      if (e.n == n) return &e;
    return nullptr;
  };
  const GrowthEntry* hi = find(n_max);
  const GrowthEntry* lo = find(n_mid);
  if (!lo) return hi->rate;
  return (std::log(static_cast<double>(hi->value)) - std::log(static_cast<double>(lo->value))) /
         static_cast<double>(n_max - n_mid);
}

std::size_t default_cell_cap() {
  if (const char* env = std::getenv("PWAFF_CELL_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 2'000'000;
}

// ---------------------------------------------------------------------------
// Evaluation

RVec evaluate(const PwaMap& f, const RVec& x) {
  if (x.dim() != f.dim()) throw Error(ErrorKind::dimension_mismatch, "evaluate");
  auto piece = f.locate(x);
  if (!piece) throw Error(ErrorKind::singular_point, "point lies in no open piece");
  return f.piece(*piece).map(x);
}

OrbitResult orbit(const PwaMap& f, const RVec& x, int n) {
  OrbitResult out;
  out.points.push_back(x);
  for (int k = 0; k < n; ++k) {
    auto piece = f.locate(out.points.back());
    if (!piece) return out;
    out.word.push_back(static_cast<std::uint16_t>(*piece));
    out.points.push_back(f.piece(*piece).map(out.points.back()));
  }
  out.complete = true;
  return out;
}

// ---------------------------------------------------------------------------
// Partitions

Partition initial_partition(const PwaMap& f) {
  Partition p;
  p.n = 1;
  for (std::size_t i = 0; i < f.pieces().size(); ++i) {
    const Piece& piece = f.pieces()[i];
    p.cells.push_back({piece.domain.pruned(), Word{static_cast<std::uint16_t>(i)}, piece.map});
  }
  return p;
}

Partition refine(const Partition& p, const PwaMap& step, std::size_t cell_cap) {
  std::vector<std::vector<Cell>> children(p.cells.size());
  parallel_for(p.cells.size(), [&](std::size_t c) {
    const Cell& cell = p.cells[c];
    for (std::size_t j = 0; j < step.pieces().size(); ++j) {
      const Piece& piece = step.pieces()[j];
      Polytope candidate = intersect(cell.region, affine_preimage(piece.domain, cell.composed));
      if (!has_interior(candidate)) continue;
      Word w = cell.word;
      w.push_back(static_cast<std::uint16_t>(j));
      children[c].push_back({candidate.pruned(), std::move(w), compose(piece.map, cell.composed)});
    }
  });
  Partition out;
  out.n = p.n + 1;
  std::size_t total = 0;
  for (const auto& ch : children) total += ch.size();
  if (total > cell_cap) {
    throw Error(ErrorKind::resource_limit, "partition level " + std::to_string(out.n) + " has " +
                                               std::to_string(total) + " cells (cap " +
                                               std::to_string(cell_cap) + ")");
  }
  out.cells.reserve(total);
  for (auto& ch : children)
    for (auto& cell : ch) out.cells.push_back(std::move(cell));
  std::sort(out.cells.begin(), out.cells.end(),
            [](const Cell& a, const Cell& b) { return a.word < b.word; });
  return out;
}

Partition iterate_partition(const PwaMap& f, int n, std::size_t cell_cap) {
  if (n < 1) throw Error(ErrorKind::dimension_mismatch, "iterate_partition needs n >= 1");
  Partition p = initial_partition(f);
  for (int k = 1; k < n; ++k) p = refine(p, f, cell_cap);
  return p;
}

PwaMap power(const PwaMap& f, int t, std::size_t cell_cap) {
  Partition z = iterate_partition(f, t, cell_cap);
  std::vector<Piece> pieces;
  pieces.reserve(z.size());
  for (auto& c : z.cells) pieces.push_back({std::move(c.region), std::move(c.composed)});
  return PwaMap::trusted(f.ambient(), std::move(pieces));
}

std::uint64_t multiplicity_at(const Partition& p, const RVec& a) {
  return static_cast<std::uint64_t>(std::count_if(
      p.cells.begin(), p.cells.end(),
      [&](const Cell& c) { return closure_contains(c.region, a); }));
}

namespace {

// Floating-point prefilter for closure membership; exact check follows.
struct CellFilter {
  std::vector<double> normals;  // m x d
  std::vector<double> offsets;
  std::vector<double> lo, hi;   // bounding box of the closure
};

}  // namespace

MultiplicityResult max_multiplicity(const Partition& p) {
  MultiplicityResult best;
  if (p.cells.empty()) return best;
  const std::size_t d = p.cells.front().region.dim();

  std::vector<std::vector<RVec>> cell_vertices(p.cells.size());
  parallel_for(p.cells.size(), [&](std::size_t c) {
    cell_vertices[c] = vertices_bounded(p.cells[c].region, true);
  });

  std::vector<RVec> candidates;
  for (const auto& vs : cell_vertices) candidates.insert(candidates.end(), vs.begin(), vs.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return best;

  std::vector<CellFilter> filters(p.cells.size());
  std::vector<double> glo(d, std::numeric_limits<double>::infinity());
  std::vector<double> ghi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < p.cells.size(); ++c) {
    CellFilter& f = filters[c];
    for (const auto& h : p.cells[c].region.constraints()) {
      double norm = 0.0;
      std::vector<double> a = h.normal.to_double();
      for (double v : a) norm += v * v;
      norm = std::sqrt(norm);
      for (double v : a) f.normals.push_back(v / norm);
      f.offsets.push_back(h.offset.get_d() / norm);
    }
    f.lo.assign(d, std::numeric_limits<double>::infinity());
    f.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& v : cell_vertices[c]) {
      for (std::size_t i = 0; i < d; ++i) {
        double x = v[i].get_d();
        f.lo[i] = std::min(f.lo[i], x);
        f.hi[i] = std::max(f.hi[i], x);
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      glo[i] = std::min(glo[i], f.lo[i]);
      ghi[i] = std::max(ghi[i], f.hi[i]);
    }
  }

  // Uniform bucket grid over the bounding box of all cells.
  const double per_axis_target = std::pow(static_cast<double>(p.cells.size()), 1.0 / d);
  const std::size_t per_axis =
      std::clamp<std::size_t>(static_cast<std::size_t>(per_axis_target), 1, 256);
  std::vector<double> width(d);
  for (std::size_t i = 0; i < d; ++i) width[i] = std::max(ghi[i] - glo[i], 1e-300);
  auto bucket_of = [&](std::size_t axis, double x) {
    double t = (x - glo[axis]) / width[axis] * static_cast<double>(per_axis);
    long b = static_cast<long>(std::floor(t));
    return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(per_axis) - 1));
  };
  std::size_t bucket_count = 1;
  for (std::size_t i = 0; i < d; ++i) bucket_count *= per_axis;
  std::vector<std::vector<std::uint32_t>> buckets(bucket_count);
  for (std::size_t c = 0; c < p.cells.size(); ++c) {
    std::vector<std::size_t> blo(d), bhi(d), cur(d);
    for (std::size_t i = 0; i < d; ++i) {
      double pad = 1e-9 * (1.0 + std::abs(filters[c].lo[i]) + std::abs(filters[c].hi[i]));
      blo[i] = bucket_of(i, filters[c].lo[i] - pad);
      bhi[i] = bucket_of(i, filters[c].hi[i] + pad);
      cur[i] = blo[i];
    }
    for (bool more = true; more;) {
      std::size_t flat = 0;
      for (std::size_t i = 0; i < d; ++i) flat = flat * per_axis + cur[i];
      buckets[flat].push_back(static_cast<std::uint32_t>(c));
      more = false;
      for (std::size_t i = d; i-- > 0;) {
        if (cur[i] < bhi[i]) {
          ++cur[i];
          more = true;
          break;
        }
        cur[i] = blo[i];
      }
    }
  }

  std::vector<std::uint64_t> counts(candidates.size(), 0);
  parallel_for(candidates.size(), [&](std::size_t k) {
    const RVec& a = candidates[k];
    std::vector<double> x = a.to_double();
    std::size_t flat = 0;
    for (std::size_t i = 0; i < d; ++i) flat = flat * per_axis + bucket_of(i, x[i]);
    std::uint64_t count = 0;
    for (std::uint32_t c : buckets[flat]) {
      const CellFilter& f = filters[c];
      bool maybe = true;
      for (std::size_t r = 0; r < f.offsets.size() && maybe; ++r) {
        double lhs = 0.0;
        double mag = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          lhs += f.normals[r * d + i] * x[i];
          mag += std::abs(f.normals[r * d + i] * x[i]);
        }
        if (lhs > f.offsets[r] + 1e-9 * (1.0 + mag + std::abs(f.offsets[r]))) maybe = false;
      }
      if (maybe && closure_contains(p.cells[c].region, a)) ++count;
    }
    counts[k] = count;
  });

  std::size_t arg = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k)
    if (counts[k] > counts[arg]) arg = k;
  best.value = counts[arg];
  best.witness = candidates[arg];
  return best;
}

GrowthReport growth_sequences(const PwaMap& f, int n_max, std::size_t cell_cap) {
  if (n_max < 1) throw Error(ErrorKind::dimension_mismatch, "growth_sequences needs n_max >= 1");
  GrowthReport out;
  Partition p = initial_partition(f);
  for (int n = 1;; ++n) {
    const auto cells = static_cast<std::uint64_t>(p.size());
    const auto mult = max_multiplicity(p).value;
    out.cells.entries.push_back({n, cells, std::log(static_cast<double>(cells)) / n});
    out.multiplicity.entries.push_back({n, mult, std::log(static_cast<double>(mult)) / n});
    if (n == (n_max + 1) / 2) out.mid = p;
    if (n == n_max) break;
    p = refine(p, f, cell_cap);
  }
  out.last = std::move(p);
  return out;
}

}  // namespace pwaff
