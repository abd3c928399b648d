#include "pwaff/skew.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pwaff/errors.hpp"
#include "pwaff/rates.hpp"

#include <Eigen/SVD>

namespace pwaff {

SkewProduct::SkewProduct(std::variant<PwaMap, FullShift> base, Polytope fiber_space,
                         std::vector<PwaMap> fibers, std::vector<std::size_t> assignment)
    : base_(std::move(base)),
      fiber_space_(std::move(fiber_space).as_closed()),
      fibers_(std::move(fibers)),
      assignment_(std::move(assignment)) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::invalid_map, "skew product: " + msg); };
  if (fibers_.empty()) fail("no fiber maps");
  for (std::size_t k = 0; k < fibers_.size(); ++k) {
    if (fibers_[k].dim() != fiber_space_.dim() || !same_closure(fibers_[k].ambient(), fiber_space_))
      fail("fiber map " + std::to_string(k) + " is not defined on the fiber space");
  }
  std::size_t expected = 0;
  if (const auto* shift = std::get_if<FullShift>(&base_)) {
    if (shift->symbols < 2) fail("a full shift needs at least 2 symbols");
    expected = static_cast<std::size_t>(shift->symbols);
  } else {
    expected = std::get<PwaMap>(base_).pieces().size();
  }
  if (assignment_.size() != expected) {
    fail("assignment has " + std::to_string(assignment_.size()) + " entries, base has " +
         std::to_string(expected));
  }
  for (std::size_t a : assignment_)
    if (a >= fibers_.size()) fail("assignment refers to missing fiber " + std::to_string(a));
}

std::vector<std::size_t> SkewProduct::alphabet() const {
  std::vector<std::size_t> out = assignment_;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PwaMap flatten(const SkewProduct& sp) {
  if (!sp.has_map_base()) throw Error(ErrorKind::invalid_map, "a shift base cannot be flattened");
  const PwaMap& base = sp.base_map();
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < base.pieces().size(); ++i) {
    const PwaMap& fiber = sp.fibers()[sp.assignment()[i]];
    for (const auto& fp : fiber.pieces()) {
      pieces.push_back({product(base.piece(i).domain, fp.domain),
                        direct_sum(base.piece(i).map, fp.map)});
    }
  }
  return PwaMap(product(base.ambient(), sp.fiber_space()), std::move(pieces));
}

double shift_base_entropy(int symbols) {
  if (symbols < 2) throw Error(ErrorKind::invalid_map, "a full shift needs at least 2 symbols");
  return std::log(static_cast<double>(symbols));
}

namespace {

struct WordWalk {
  const SkewProduct& sp;
  const std::vector<std::size_t>& alphabet;
  int m;
  int mid;
  std::size_t cell_cap;
  FiberWordReport report;
  bool any = false;
  Word word;
  std::uint64_t mult_mid = 0;

  void visit(const Partition& p) {
    const int depth = static_cast<int>(word.size());
    if (depth == mid) mult_mid = max_multiplicity(p).value;
    if (depth == m) {
      leaf(p);
      return;
    }
    for (std::size_t a : alphabet) {
      word.push_back(static_cast<std::uint16_t>(a));
      visit(refine(p, sp.fibers()[a], cell_cap));
      word.pop_back();
    }
  }

  void leaf(const Partition& p) {
    const int d = static_cast<int>(sp.fiber_space().dim());
    double lam = 0.0;  // k = 0 term
    double top = kMinusInfinity, bottom = 0.0;
    std::vector<double> rho(static_cast<std::size_t>(std::max(d - 1, 0)), 0.0);
    bool invertible = true;
    for (const auto& c : p.cells) {
      const Eigen::MatrixXd l = to_eigen(c.composed.linear);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(l);
      const Eigen::VectorXd sv = svd.singularValues();
      double acc = 0.0, best = 0.0;
      std::vector<double> prefix_max(static_cast<std::size_t>(d) + 1, 0.0);
      for (int k = 1; k <= d; ++k) {
        acc += std::log(sv[k - 1]);
        best = std::max(best, acc);
        prefix_max[static_cast<std::size_t>(k)] = best;
      }
      lam = std::max(lam, best);
      top = std::max(top, std::log(sv[0]));
      if (sgn(c.composed.linear.determinant()) == 0) {
        invertible = false;
        continue;
      }
      const double log_inv = -std::log(sv[d - 1]);
      bottom = std::max(bottom, log_inv);
      for (int i = 1; i < d; ++i)
        rho[static_cast<std::size_t>(i - 1)] =
            std::max(rho[static_cast<std::size_t>(i - 1)], prefix_max[static_cast<std::size_t>(i)] + i * log_inv);
    }
    lam /= m;
    const std::uint64_t mult_top = max_multiplicity(p).value;
    const double rate = std::log(static_cast<double>(mult_top)) / m;
    const double slope =
        mid == m ? rate
                 : (std::log(static_cast<double>(mult_top)) - std::log(static_cast<double>(mult_mid))) /
                       (m - mid);
    double capped = slope;
    if (invertible) {
      double rho_sum = 0.0;
      for (double r : rho) rho_sum += r / m;
      const double gap = 0.5 * d * (d - 1) * (top + bottom) / m;
      capped = std::min({capped, rho_sum, gap});
    }
    capped = std::max(0.0, capped);
    if (!any || slope > report.mult_fiber_slope) report.mult_fiber_slope = slope;
    ++report.words;
    if (!any || lam > report.lambda_plus_fiber) {
      report.lambda_plus_fiber = lam;
      report.witness_lambda = word;
    }
    if (!any || capped > report.mult_fiber) {
      report.mult_fiber = capped;
      report.witness_mult = word;
    }
    report.mult_fiber_rate = any ? std::max(report.mult_fiber_rate, rate) : rate;
    any = true;
  }
};

}  // namespace

FiberWordReport fiber_word_rates(const SkewProduct& sp, int m, std::uint64_t word_cap,
                                 std::size_t cell_cap) {
  if (m < 1) throw Error(ErrorKind::dimension_mismatch, "word length must be at least 1");
  const std::vector<std::size_t> alphabet = sp.alphabet();
  double words = std::pow(static_cast<double>(alphabet.size()), m);
  if (words > static_cast<double>(word_cap)) {
    throw Error(ErrorKind::resource_limit, "fiber words of length " + std::to_string(m) + " exceed the cap of " +
                                               std::to_string(word_cap));
  }
  WordWalk walk{sp, alphabet, m, (m + 1) / 2, cell_cap, {}, false, {}, 0};
  walk.report.m = m;
  // Prefix of length 1: the first fiber map's own pieces.
  for (std::size_t a : alphabet) {
    walk.word.assign(1, static_cast<std::uint16_t>(a));
    Partition p = initial_partition(sp.fibers()[a]);
    if (walk.mid == 1) walk.mult_mid = max_multiplicity(p).value;
    if (m == 1) {
      walk.leaf(p);
      continue;
    }
    for (std::size_t b : alphabet) {
      walk.word.push_back(static_cast<std::uint16_t>(b));
      walk.visit(refine(p, sp.fibers()[b], cell_cap));
      walk.word.pop_back();
    }
  }
  return walk.report;
}

SkewBounds skew_entropy_bounds(const SkewProduct& sp, int n, int m, const EstimateConfig& base_config) {
  if (n < 1) throw Error(ErrorKind::dimension_mismatch, "partition depth must be at least 1");
  SkewBounds b;
  b.fiber = fiber_word_rates(sp, m);
  if (const auto* shift = std::get_if<FullShift>(&sp.base())) {
    b.base_entropy = shift_base_entropy(shift->symbols);
    b.base_mult_slope = 0.0;
  } else {
    const PwaMap& base = sp.base_map();
    check_config(base_config);
    const double eps =
        *std::min_element(base_config.eps_ladder.begin(), base_config.eps_ladder.end());
    const int grid = base_config.grid_per_axis > 0 ? base_config.grid_per_axis
                                                   : default_grid_per_axis(base.dim());
    CoverResult cover = covering_counts(base, base_config.n_min, base_config.n_max, eps, grid,
                                        base_config.max_discard_fraction);
    b.base_entropy = std::max(0.0, cover.series.two_point_slope());
    b.base_mult_slope = std::max(0.0, growth_sequences(base, n, base_config.cell_cap).multiplicity.two_point_slope());
  }
  b.lower = b.base_entropy;
  b.upper = b.base_entropy + b.base_mult_slope + b.fiber.lambda_plus_fiber + b.fiber.mult_fiber;
  return b;
}

}  // namespace pwaff
