#include "pwaff/catalog.hpp"

#include <cmath>
#include <stdexcept>

#include "pwaff/errors.hpp"

namespace pwaff {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::reference: return "reference";
    case Provenance::derived: return "derived";
    case Provenance::trivial: return "trivial";
  }
  return "?";
}

const char* to_string(Check c) {
  switch (c) {
    case Check::near: return "near";
    case Check::at_most: return "at_most";
    case Check::at_least: return "at_least";
    case Check::in_verdict: return "in_verdict";
  }
  return "?";
}

AffineMap affine_from_points(const std::vector<RVec>& src, const std::vector<RVec>& dst) {
  const std::size_t d = src.empty() ? 0 : src[0].dim();
  if (src.size() != d + 1 || dst.size() != d + 1) {
    throw Error(ErrorKind::dimension_mismatch, "affine_from_points needs d+1 point pairs");
  }
  // Columns of (src_k - src_0) map to (dst_k - dst_0).
  RMat s(d, d), t(d, d);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t r = 0; r < d; ++r) {
      s(r, k) = src[k + 1][r] - src[0][r];
      t(r, k) = dst[k + 1][r] - dst[0][r];
    }
  RMat lin = t * s.inverse();
  return {lin, dst[0] - lin * src[0]};
}

namespace {

const double kLog2 = std::log(2.0);

Expectation expect(std::string q, double value, double tol, Check check, Provenance prov,
                   std::string note, int n = 0) {
  Expectation e;
  e.quantity = std::move(q);
  e.value = value;
  e.tolerance = tol;
  e.check = check;
  e.provenance = prov;
  e.note = std::move(note);
  e.n = n;
  return e;
}

RMat rotation(const Rat& c, const Rat& s) { return RMat{{c, -s}, {s, c}}; }

Polytope unit_box(std::size_t d, bool strict = false) {
  RVec lo(d), hi(d);
  for (std::size_t j = 0; j < d; ++j) hi[j] = 1;
  return Polytope::box(lo, hi, strict);
}

Polytope centered_box(bool strict = false) { return Polytope::box(RVec{-1, -1}, RVec{1, 1}, strict); }

PwaMap single_piece(const Polytope& x, const AffineMap& g) { return PwaMap(x, {{x.as_open(), g}}); }

// Example 1's triangle, pieces and maps.
PwaMap example1_map(bool contracted) {
  const RVec a{-1, 0}, b{0, 0}, c{1, 0}, f{0, 1};
  std::vector<RVec> whole{a, c, f}, left{a, b, f}, right{b, c, f};
  AffineMap m1{RMat{{1, Rat(-1, 2)}, {0, Rat(1, 2)}}, RVec{Rat(1, 2), Rat(1, 2)}};
  AffineMap m2{RMat{{1, Rat(1, 2)}, {0, Rat(1, 2)}}, RVec{Rat(-1, 2), Rat(1, 2)}};
  if (contracted) {
    const AffineMap half{Rat(1, 2) * RMat::identity(2), RVec{0, Rat(1, 2)}};
    m1 = compose(half, m1);
    m2 = compose(half, m2);
  }
  return PwaMap(Polytope::simplex(whole), {{Polytope::simplex(left, true), m1},
                                           {Polytope::simplex(right, true), m2}});
}

PwaMap interval_exchange(const std::vector<Rat>& cuts, const std::vector<std::size_t>& order) {
  // Intervals (cuts[k], cuts[k+1]) are laid out again in the order given.
  std::vector<Rat> start(order.size());
  Rat pos = 0;
  for (std::size_t idx : order) {
    start[idx] = pos;
    pos += cuts[idx + 1] - cuts[idx];
  }
  std::vector<Piece> pieces;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    pieces.push_back({Polytope::box(RVec{cuts[k]}, RVec{cuts[k + 1]}, true),
                      AffineMap{RMat::identity(1), RVec{start[k] - cuts[k]}}});
  }
  return PwaMap(unit_box(1), std::move(pieces));
}

Fixture from_map(std::string name, std::string description, PwaMap f, int depth) {
  Fixture fx;
  fx.name = std::move(name);
  fx.description = std::move(description);
  fx.map = std::move(f);
  fx.depth = depth;
  return fx;
}

void add_isometry_expectations(Fixture& fx, bool has_rho) {
  fx.expected.push_back(expect("lambda_plus", 0, 1e-9, Check::near, Provenance::trivial,
                               "linear parts are isometries or contractions"));
  fx.expected.push_back(expect("bound", 0, 0.02, Check::at_most, Provenance::trivial,
                               "conformal and non-expanding, so the entropy vanishes"));
  if (has_rho)
    fx.expected.push_back(expect("rho_1", 0, 1e-9, Check::at_most, Provenance::trivial,
                                 "conformal linear parts do not rotate directions apart"));
  fx.expected.push_back(expect("entropy_headline", 0, 0.1, Check::at_most, Provenance::trivial,
                               "isometries and contractions have zero entropy"));
}

}  // namespace

Fixture example1() {
  Fixture fx = from_map("example1", "non-expanding map of a triangle; multiplicity doubles at the apex",
                        example1_map(false), 12);
  Expectation m = expect("mult_at", 1024, 0, Check::near, Provenance::reference,
                         "multiplicity at f = (0,1) is 2^n", 10);
  m.point = RVec{0, 1};
  fx.expected.push_back(m);
  fx.expected.push_back(expect("cells", 32, 0, Check::near, Provenance::derived, "grid itinerary count", 5));
  fx.expected.push_back(expect("h_mult", kLog2, 0.05, Check::near, Provenance::reference, "H_mult = log 2"));
  fx.expected.push_back(expect("h_sing", kLog2, 0.05, Check::near, Provenance::reference, "H_sing = log 2"));
  fx.expected.push_back(expect("lambda_plus", 0, 0.02, Check::at_most, Provenance::reference,
                               "eigenvalues 1/2 and 1, non-expanding; finite-n value drops below 0.02 at n = 18", 18));
  fx.expected.push_back(expect("rho_1", kLog2, 0.05, Check::near, Provenance::reference,
                               "spherization at f is conjugate to angle doubling"));
  fx.expected.push_back(expect("entropy", 0, 0, Check::in_verdict, Provenance::reference,
                               "orbits converge to f"));
  fx.expected.push_back(expect("entropy_headline", 0, 0.1, Check::at_most, Provenance::reference,
                               "orbits converge to f"));
  return fx;
}

Fixture example1_contracted() {
  Fixture fx = from_map("example1-contracted", "example1 followed by the contraction x -> (x + f)/2",
                        example1_map(true), 10);
  Expectation m = expect("mult_at", 1024, 0, Check::near, Provenance::derived,
                         "the apex stays fixed and the cut lines still meet there", 10);
  m.point = RVec{0, 1};
  fx.expected.push_back(m);
  fx.expected.push_back(expect("h_sing", kLog2, 0.05, Check::near, Provenance::derived,
                               "positive singularity entropy despite contraction"));
  fx.expected.push_back(expect("h_mult", kLog2, 0.05, Check::near, Provenance::derived,
                               "positive multiplicity entropy despite contraction"));
  fx.expected.push_back(expect("lambda_plus", 0, 1e-9, Check::near, Provenance::reference,
                               "strictly contracting"));
  fx.expected.push_back(expect("entropy_headline", 0, 0.1, Check::at_most, Provenance::reference,
                               "strictly contracting"));
  return fx;
}

Fixture example2() {
  PwaMap base = example1_map(false);
  Polytope y = unit_box(1);
  PwaMap id = single_piece(y, AffineMap::identity(1));
  PwaMap swap = interval_exchange({0, Rat(1, 2), 1}, {1, 0});
  SkewProduct sp(base, y, {id, swap}, {0, 1});
  Fixture fx;
  fx.name = "example2";
  fx.description = "example1 base with identity and half-interval swap fibers";
  fx.map = flatten(sp);
  fx.skew = sp;
  fx.depth = 8;
  fx.fiber_m = 8;
  fx.estimate.eps_ladder = {1.0 / 8, 1.0 / 16};
  fx.estimate.n_max = 8;
  fx.estimate.sep_eps = {1.0 / 4};
  fx.estimate.sep_n = 8;
  fx.estimate.samples = 100000;
  fx.estimate.bound_n = 8;
  fx.expected.push_back(expect("pieces", 3, 0, Check::near, Provenance::reference, "three continuity domains"));
  fx.expected.push_back(expect("entropy", kLog2, 0, Check::in_verdict, Provenance::reference,
                               "separation 1/2 between base cells gives log 2"));
  fx.expected.push_back(expect("lambda_plus", 0.5 * kLog2 / 8, 1e-9, Check::at_most, Provenance::derived,
                               "composed linear parts have norm below sqrt 2"));
  fx.expected.push_back(expect("bound", kLog2, 0.1, Check::at_most, Provenance::reference,
                               "upper bound from lambda^+ and multiplicity growth"));
  fx.expected.push_back(expect("fiber_lambda", 0, 1e-9, Check::near, Provenance::reference, "fibers are isometries"));
  fx.expected.push_back(expect("fiber_mult", 0, 1e-9, Check::near, Provenance::reference,
                               "fiber entropy vanishes"));
  fx.expected.push_back(expect("skew_lower", 0, 0.1, Check::near, Provenance::reference, "base entropy is zero"));
  fx.expected.push_back(expect("skew_upper", kLog2, 0.1, Check::near, Provenance::reference,
                               "the base multiplicity term cannot be dropped"));
  return fx;
}

Fixture example3() {
  const RVec a{Rat(1, 2), 1}, b{Rat(1, 4), Rat(1, 2)}, c{Rat(1, 2), Rat(1, 2)}, d{Rat(3, 4), Rat(1, 2)},
      e{0, 0}, f{1, 0};
  std::vector<RVec> whole{a, e, f}, abc{a, b, c}, adc{a, d, c};
  // BDFE: below the line y = 1/2 inside AEF.
  Polytope bdfe(2, {{RVec{0, 1}, Rat(1, 2), true},
                    {RVec{0, -1}, 0, true},
                    {RVec{-2, 1}, 0, true},
                    {RVec{2, 1}, 2, true}});
  std::vector<Piece> pieces{
      {Polytope::simplex(abc, true), affine_from_points(abc, {a, e, f})},
      {Polytope::simplex(adc, true), affine_from_points(adc, {a, f, e})},
      {bdfe, AffineMap::identity(2)}};
  Fixture fx = from_map("example3", "zero Lyapunov exponents along absorbed orbits, entropy log 2",
                        PwaMap(Polytope::simplex(whole), std::move(pieces)), 12);
  fx.estimate.sep_eps = {1.0 / 8};
  Expectation m = expect("mult_at", 16, 0, Check::near, Provenance::derived, "exact refinement", 4);
  m.point = a;
  fx.expected.push_back(m);
  fx.expected.push_back(expect("h_mult", kLog2, 0.05, Check::near, Provenance::reference, "H_mult = log 2"));
  fx.expected.push_back(expect("lambda_plus", std::log(8.0), 1e-9, Check::near, Provenance::derived,
                               "determinant 8 on both triangles"));
  fx.expected.push_back(expect("entropy", kLog2, 0, Check::in_verdict, Provenance::reference, "entropy log 2"));
  return fx;
}

Fixture torus_map(const RMat& a, const std::string& name) {
  const std::size_t d = a.rows();
  if (a.cols() != d) throw Error(ErrorKind::dimension_mismatch, "torus map needs a square matrix");
  if (sgn(a.determinant()) == 0) throw Error(ErrorKind::singular_matrix, "torus map needs an invertible matrix");
  // Integer range of A x over the unit cube, per coordinate.
  std::vector<long> lo(d), hi(d);
  for (std::size_t r = 0; r < d; ++r) {
    Rat mn = 0, mx = 0;
    for (std::size_t c = 0; c < d; ++c) (sgn(a(r, c)) < 0 ? mn : mx) += a(r, c);
    mpz_class fl, ce;
    mpz_fdiv_q(fl.get_mpz_t(), mn.get_num_mpz_t(), mn.get_den_mpz_t());
    mpz_cdiv_q(ce.get_mpz_t(), mx.get_num_mpz_t(), mx.get_den_mpz_t());
    lo[r] = fl.get_si();
    hi[r] = ce.get_si() - 1;
  }
  const Polytope cube = unit_box(d, true);
  std::vector<Piece> pieces;
  std::vector<long> k = lo;
  for (bool more = true; more;) {
    RVec kv(d);
    for (std::size_t j = 0; j < d; ++j) kv[j] = Rat(-k[j]);
    AffineMap g{a, kv};
    Polytope dom = intersect(cube, affine_preimage(cube, g));
    if (has_interior(dom)) pieces.push_back({dom.pruned(), g});
    more = false;
    for (std::size_t j = 0; j < d; ++j) {
      if (k[j] < hi[j]) {
        ++k[j];
        more = true;
        break;
      }
      k[j] = lo[j];
    }
  }
  return from_map(name, "linear map mod Z^d on the unit cube", PwaMap(unit_box(d), std::move(pieces)), 8);
}

Fixture cat_map() {
  Fixture fx = torus_map(RMat{{2, 1}, {1, 1}}, "catmap");
  const double h = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  fx.description = "hyperbolic toral automorphism [[2,1],[1,1]]";
  fx.expected.push_back(expect("lambda_max", h, 1e-9, Check::near, Provenance::derived,
                               "log of the expanding eigenvalue (3+sqrt5)/2"));
  fx.expected.push_back(expect("entropy", h, 0, Check::in_verdict, Provenance::derived,
                               "log Jac+ = log((3+sqrt5)/2)"));
  fx.expected.push_back(expect("max_mult", 17, 0, Check::near, Provenance::derived,
                               "2n+1 cells of Z^n meet at the image of the corner"));
  fx.estimate.eps_ladder = {1.0 / 8, 1.0 / 16};
  fx.estimate.n_max = 6;
  fx.estimate.sep_eps = {1.0 / 4};
  fx.estimate.sep_n = 8;
  fx.estimate.samples = 100000;
  fx.estimate.bound_n = 8;
  return fx;
}

Fixture doubling() {
  Fixture fx = torus_map(RMat{{2}}, "doubling");
  fx.description = "x -> 2x mod 1";
  fx.depth = 10;
  fx.estimate.eps_ladder = {1.0 / 16, 1.0 / 32};
  fx.estimate.n_max = 8;
  fx.expected.push_back(expect("pieces", 2, 0, Check::near, Provenance::trivial, "two branches"));
  fx.expected.push_back(expect("cells", 1024, 0, Check::near, Provenance::trivial, "2^n branches of f^n"));
  fx.expected.push_back(expect("h_sing", kLog2, 1e-9, Check::near, Provenance::trivial, "|Z^n| = 2^n"));
  fx.expected.push_back(expect("entropy_headline", kLog2, 0.05, Check::near, Provenance::derived,
                               "2^n branches, each expanding by 2"));
  fx.expected.push_back(expect("entropy", kLog2, 0, Check::in_verdict, Provenance::derived,
                               "2^n branches, each expanding by 2"));
  return fx;
}

Fixture shift_fixture(int symbols) {
  std::vector<PwaMap> fibers;
  std::vector<std::size_t> assignment;
  RMat r = RMat::identity(2);
  const RMat quarter = rotation(0, 1);
  for (int k = 0; k < symbols; ++k) {
    fibers.push_back(single_piece(centered_box(), AffineMap{Rat(1, 2) * r, RVec{0, 0}}));
    assignment.push_back(static_cast<std::size_t>(k));
    r = quarter * r;
  }
  Fixture fx;
  fx.name = "shift" + std::to_string(symbols);
  fx.description = "full shift on " + std::to_string(symbols) +
                   " symbols driving conformal contractions of the square";
  fx.skew = SkewProduct(FullShift{symbols}, centered_box(), std::move(fibers), std::move(assignment));
  fx.fiber_m = 4;
  const double h = std::log(static_cast<double>(symbols));
  fx.expected.push_back(expect("skew_lower", h, 1e-9, Check::near, Provenance::reference, "entropy log N"));
  fx.expected.push_back(expect("skew_upper", h, 1e-9, Check::near, Provenance::reference, "entropy log N"));
  fx.expected.push_back(expect("fiber_lambda", 0, 1e-9, Check::near, Provenance::trivial, "non-expanding fibers"));
  fx.expected.push_back(expect("fiber_mult", 0, 1e-9, Check::near, Provenance::trivial, "single-piece fibers"));
  return fx;
}

std::vector<Fixture> toys() {
  std::vector<Fixture> out;
  {
    Fixture fx = from_map("identity", "identity on the unit square",
                          single_piece(unit_box(2), AffineMap::identity(2)), 9);
    fx.expected.push_back(expect("cells", 1, 0, Check::near, Provenance::trivial, "one cell at every depth"));
    fx.expected.push_back(expect("h_mult", 0, 1e-9, Check::near, Provenance::trivial, "no singularities"));
    add_isometry_expectations(fx, true);
    out.push_back(std::move(fx));
  }
  {
    Fixture fx = from_map("rotation", "quarter turn of the square [-1,1]^2",
                          single_piece(centered_box(), AffineMap{rotation(0, 1), RVec{0, 0}}), 8);
    add_isometry_expectations(fx, true);
    out.push_back(std::move(fx));
  }
  {
    // Quadrants are turned a quarter about their own centers and moved on
    // to the next quadrant counter-clockwise.
    const Rat h = Rat(1, 2);
    std::vector<RVec> centers{{h, h}, {-h, h}, {-h, -h}, {h, -h}};
    std::vector<Piece> pieces;
    for (std::size_t q = 0; q < 4; ++q) {
      const RVec& c = centers[q];
      const RVec& next = centers[(q + 1) % 4];
      RVec lo{c[0] - h, c[1] - h}, hi{c[0] + h, c[1] + h};
      const RMat rot = rotation(0, 1);
      pieces.push_back({Polytope::box(lo, hi, true), AffineMap{rot, next - rot * c}});
    }
    Fixture fx = from_map("quadrant-exchange", "piecewise rotation permuting the quadrants of [-1,1]^2",
                          PwaMap(centered_box(), std::move(pieces)), 8);
    fx.expected.push_back(expect("cells", 4, 0, Check::near, Provenance::trivial,
                                 "each quadrant maps onto a whole quadrant"));
    add_isometry_expectations(fx, true);
    out.push_back(std::move(fx));
  }
  {
    Fixture fx = from_map("contraction", "x -> x/2 + (1/4,1/4) on the unit square",
                          single_piece(unit_box(2), AffineMap{Rat(1, 2) * RMat::identity(2),
                                                              RVec{Rat(1, 4), Rat(1, 4)}}),
                          8);
    add_isometry_expectations(fx, true);
    out.push_back(std::move(fx));
  }
  {
    Fixture fx = from_map("conformal-contraction", "half of the rotation (3/5, 4/5) on [-1,1]^2",
                          single_piece(centered_box(), AffineMap{Rat(1, 2) * rotation(Rat(3, 5), Rat(4, 5)),
                                                                 RVec{0, 0}}),
                          8);
    add_isometry_expectations(fx, true);
    out.push_back(std::move(fx));
  }
  {
    Fixture fx = from_map("iet3", "exchange of the intervals of lengths 1/4, 1/2, 1/4 in reverse order",
                          interval_exchange({0, Rat(1, 4), Rat(3, 4), 1}, {2, 1, 0}), 8);
    fx.expected.push_back(expect("h_mult", 0, 1e-9, Check::near, Provenance::trivial,
                                 "at most two intervals meet at a point"));
    add_isometry_expectations(fx, false);
    out.push_back(std::move(fx));
  }
  {
    Fixture fx = torus_map(RMat::diagonal(RVec{2, Rat(1, 2)}), "diag-torus");
    fx.description = "(x, y) -> (2x mod 1, y/2)";
    fx.estimate.eps_ladder = {1.0 / 8, 1.0 / 16};
    fx.estimate.n_max = 8;
    fx.expected.push_back(expect("lambda_plus", kLog2, 1e-9, Check::near, Provenance::derived,
                                 "one expanding direction with rate log 2"));
    fx.expected.push_back(expect("entropy_headline", kLog2, 0.05, Check::near, Provenance::derived,
                                 "log Jac+ = log 2"));
    fx.expected.push_back(expect("entropy", kLog2, 0, Check::in_verdict, Provenance::derived, "log Jac+ = log 2"));
    out.push_back(std::move(fx));
  }
  {
    Polytope y = centered_box();
    PwaMap quarter = single_piece(y, AffineMap{rotation(0, 1), RVec{0, 0}});
    PwaMap half = single_piece(y, AffineMap{rotation(-1, 0), RVec{0, 0}});
    SkewProduct sp(doubling().map.value(), y, {quarter, half}, {0, 1});
    Fixture fx;
    fx.name = "doubling-rotations";
    fx.description = "doubling base with quarter- and half-turn fibers";
    fx.map = flatten(sp);
    fx.skew = sp;
    fx.depth = 8;
    fx.estimate.eps_ladder = {1.0 / 8, 1.0 / 16};
    fx.estimate.n_max = 8;
    fx.expected.push_back(expect("pieces", 2, 0, Check::near, Provenance::derived, "one piece per base branch"));
    fx.expected.push_back(expect("fiber_lambda", 0, 1e-9, Check::near, Provenance::trivial, "rotations"));
    fx.expected.push_back(expect("fiber_mult", 0, 1e-9, Check::near, Provenance::trivial, "single-piece fibers"));
    fx.expected.push_back(expect("skew_lower", kLog2, 0.05, Check::near, Provenance::derived,
                                 "one-dimensional base, isometric fibers"));
    fx.expected.push_back(expect("skew_upper", kLog2, 0.1, Check::near, Provenance::derived,
                                 "one-dimensional base, isometric fibers"));
    out.push_back(std::move(fx));
  }
  {
    Polytope y = unit_box(1);
    SkewProduct sp(example1_map(false), y, {single_piece(y, AffineMap::identity(1))}, {0, 0});
    Fixture fx;
    fx.name = "example1-identity-fibers";
    fx.description = "example1 base with identity fibers";
    fx.map = flatten(sp);
    fx.skew = sp;
    fx.depth = 8;
    fx.estimate.eps_ladder = {1.0 / 16, 1.0 / 32};
    fx.estimate.n_max = 8;
    fx.expected.push_back(expect("skew_lower", 0, 0.1, Check::near, Provenance::trivial, "base entropy is zero"));
    fx.expected.push_back(expect("skew_upper", kLog2, 0.1, Check::at_most, Provenance::derived,
                                 "only the base multiplicity term is positive"));
    fx.expected.push_back(expect("entropy_headline", 0, 0.1, Check::at_most, Provenance::trivial,
                                 "product of example1 with the identity"));
    out.push_back(std::move(fx));
  }
  {
    Polytope y = unit_box(2);
    SkewProduct sp(FullShift{2}, y, {torus_map(RMat::diagonal(RVec{2, Rat(1, 2)})).map.value()}, {0, 0});
    Fixture fx;
    fx.name = "shift2-diag";
    fx.description = "full shift on 2 symbols with the (2x mod 1, y/2) fiber";
    fx.skew = sp;
    fx.fiber_m = 4;
    fx.expected.push_back(expect("fiber_lambda", kLog2, 1e-9, Check::near, Provenance::derived,
                                 "commuting diagonal products"));
    out.push_back(std::move(fx));
  }
  return out;
}

std::vector<Fixture> all_fixtures() {
  std::vector<Fixture> out{example1(), example1_contracted(), example2(), example3(), cat_map(), doubling()};
  for (auto& t : toys()) out.push_back(std::move(t));
  for (int n : {2, 3, 5}) out.push_back(shift_fixture(n));
  return out;
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& f : all_fixtures()) out.push_back(f.name);
  return out;
}

Fixture fixture_by_name(const std::string& name) {
  for (auto& f : all_fixtures())
    if (f.name == name) return f;
  throw std::out_of_range("unknown fixture: " + name);
}

}  // namespace pwaff
