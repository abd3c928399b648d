#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "pwaff/errors.hpp"
#include "pwaff/exactgeom.hpp"

using namespace pwaff;

namespace {

RMat random_matrix(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  RMat m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = oracle::frac(num(rng), den(rng));
  return m;
}

Polytope unit_square(bool strict = false) { return Polytope::box(RVec{0, 0}, RVec{1, 1}, strict); }

}  // namespace

TEST_CASE("rationals parse and print in lowest terms") {
  CHECK(parse_rat("6/4") == Rat(3, 2));
  CHECK(parse_rat("-1/2") == Rat(-1, 2));
  CHECK(parse_rat("7") == Rat(7));
  CHECK(format_rat(oracle::frac(-6, 4)) == "-3/2");
  CHECK(format_rat(oracle::frac(4, 2)) == "2");
  CHECK_THROWS_AS(parse_rat("1/0"), Error);
  CHECK_THROWS_AS(parse_rat("x"), Error);
  CHECK_THROWS_AS(parse_rat(""), Error);
}

TEST_CASE("determinant and inverse agree with cofactor expansion") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 4;
    RMat m = random_matrix(rng, n);
    CHECK(m.determinant() == oracle::det(m));
    if (oracle::det(m) != 0) {
      CHECK((m * m.inverse()).is_identity());
      CHECK((m.inverse() * m).is_identity());
    } else {
      CHECK_THROWS_AS(m.inverse(), Error);
    }
  }
  RMat singular{{1, 2}, {2, 4}};
  CHECK(singular.determinant() == 0);
  CHECK_FALSE(singular.solve(RVec{1, 1}).has_value());
}

TEST_CASE("solve returns the exact solution") {
  RMat m{{2, 1}, {1, 3}};
  auto x = m.solve(RVec{3, 5});
  REQUIRE(x.has_value());
  CHECK(m * *x == RVec{3, 5});
  CHECK(*x == RVec{Rat(4, 5), Rat(7, 5)});
}

TEST_CASE("half-space normalization keeps the point set") {
  HalfSpace h{RVec{Rat(2, 3), Rat(-4, 3)}, Rat(2, 9), true};
  HalfSpace g = h.normalized();
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    RVec x = oracle::random_point(rng, RVec{-1, -1}, RVec{1, 1}, 36);
    CHECK(h.contains(x) == g.contains(x));
    CHECK(h.contains_closure(x) == g.contains_closure(x));
  }
  for (const auto& v : g.normal) CHECK(v.get_den() == 1);
}

TEST_CASE("strictness decides boundary membership") {
  CHECK(unit_square().contains(RVec{0, Rat(1, 2)}));
  CHECK_FALSE(unit_square(true).contains(RVec{0, Rat(1, 2)}));
  CHECK(closure_contains(unit_square(true), RVec{0, Rat(1, 2)}));
  CHECK(unit_square(true).all_strict());
  CHECK_FALSE(unit_square(true).as_closed().all_strict());
}

TEST_CASE("LP optimum on a triangle") {
  std::vector<RVec> pts{RVec{0, 0}, RVec{2, 0}, RVec{0, 1}};
  Polytope t = Polytope::simplex(pts);
  auto r = lp_maximize(t.constraints(), RVec{1, 1});
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == 2);
  CHECK(lp_maximize(Polytope(2, {{RVec{1, 0}, 0, false}}).constraints(), RVec{-1, 0}).status == LpStatus::unbounded);
  Polytope empty(1, {{RVec{1}, 0, false}, {RVec{-1}, -1, false}});
  CHECK(lp_maximize(empty.constraints(), RVec{1}).status == LpStatus::infeasible);
}

TEST_CASE("interior detection separates touching from overlapping boxes") {
  Polytope a = unit_square(true);
  Polytope touching = Polytope::box(RVec{1, 0}, RVec{2, 1}, true);
  Polytope overlapping = Polytope::box(RVec{Rat(1, 2), 0}, RVec{2, 1}, true);
  CHECK(has_interior(a));
  CHECK_FALSE(has_interior(intersect(a, touching)));
  CHECK(has_interior(intersect(a, overlapping)));
  CHECK_THROWS_AS(interior_point(intersect(a, touching)), Error);
  RVec p = interior_point(intersect(a, overlapping));
  CHECK(a.contains(p));
  CHECK(overlapping.contains(p));
}

TEST_CASE("vertices of a simplex and a box") {
  std::vector<RVec> pts{RVec{-1, 0}, RVec{1, 0}, RVec{0, 1}};
  auto v = vertices(Polytope::simplex(pts, true));
  CHECK(v == std::vector<RVec>{RVec{-1, 0}, RVec{0, 1}, RVec{1, 0}});
  CHECK(vertices(Polytope::box(RVec{0, 0, 0}, RVec{1, 2, 3})).size() == 8);
  CHECK_THROWS_AS(vertices(Polytope(2, {{RVec{1, 0}, 1, false}})), Error);
  CHECK(is_bounded(unit_square()));
  CHECK_FALSE(is_bounded(Polytope(2, {{RVec{1, 0}, 1, false}, {RVec{0, 1}, 1, false}})));
}

TEST_CASE("affine preimage and image are exact") {
  std::mt19937_64 rng(11);
  Polytope p = Polytope::simplex(std::vector<RVec>{RVec{0, 0}, RVec{1, 0}, RVec{0, 1}}, true);
  for (int trial = 0; trial < 10; ++trial) {
    AffineMap g{random_matrix(rng, 2), RVec{Rat(1, 3), Rat(-1, 5)}};
    Polytope pre = affine_preimage(p, g);
    for (int k = 0; k < 100; ++k) {
      RVec x = oracle::random_point(rng, RVec{-3, -3}, RVec{3, 3}, 60);
      CHECK(pre.contains(x) == p.contains(g(x)));
    }
    if (g.linear.determinant() != 0) {
      Polytope img = affine_image(p, g);
      for (int k = 0; k < 100; ++k) {
        RVec x = oracle::random_point(rng, RVec{-3, -3}, RVec{3, 3}, 60);
        CHECK(img.contains(g(x)) == p.contains(x));
      }
    }
  }
}

TEST_CASE("pruning keeps the point set") {
  Polytope p(2, {{RVec{1, 0}, 1, true},
                 {RVec{-1, 0}, 0, true},
                 {RVec{0, 1}, 1, true},
                 {RVec{0, -1}, 0, true},
                 {RVec{1, 1}, 5, true},
                 {RVec{2, 0}, 2, true}});
  Polytope q = p.pruned();
  CHECK(q.constraints().size() == 4);
  CHECK(same_closure(p, q));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    RVec x = oracle::random_point(rng, RVec{-1, -1}, RVec{2, 2}, 12);
    CHECK(p.contains(x) == q.contains(x));
  }
}

TEST_CASE("closure inclusion") {
  Polytope small = Polytope::box(RVec{Rat(1, 4), Rat(1, 4)}, RVec{Rat(1, 2), Rat(1, 2)}, true);
  CHECK(closure_subset(small, unit_square()));
  CHECK_FALSE(closure_subset(unit_square(), small));
  CHECK(same_closure(unit_square(true), unit_square()));
  CHECK(closure_subset(Polytope::empty(2), small));
}

TEST_CASE("products and direct sums act coordinate-wise") {
  Polytope p = Polytope::box(RVec{0}, RVec{1}, true);
  Polytope q = unit_square();
  Polytope pq = product(p, q);
  CHECK(pq.dim() == 3);
  CHECK(pq.contains(RVec{Rat(1, 2), 0, 1}));
  CHECK_FALSE(pq.contains(RVec{0, Rat(1, 2), Rat(1, 2)}));
  AffineMap a{RMat{{2}}, RVec{1}};
  AffineMap b{RMat{{0, -1}, {1, 0}}, RVec{3, 4}};
  AffineMap s = direct_sum(a, b);
  RVec x{5, 6, 7};
  CHECK(s(x) == RVec{11, -4, 10});
  CHECK(compose(s, s.inverse())(x) == x);
}
