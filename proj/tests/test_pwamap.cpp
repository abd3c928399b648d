#include "doctest.h"

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "pwaff/catalog.hpp"
#include "pwaff/errors.hpp"
#include "pwaff/parallel.hpp"
#include "pwaff/pwamap.hpp"

using namespace pwaff;

namespace {

Polytope unit_interval(bool strict = false) { return Polytope::box(RVec{0}, RVec{1}, strict); }

std::set<Word> words_of(const Partition& p) {
  std::set<Word> out;
  for (const auto& c : p.cells) out.insert(c.word);
  return out;
}

std::vector<RVec> interior_points(const Partition& p) {
  std::vector<RVec> out;
  for (const auto& c : p.cells) out.push_back(interior_point(c.region));
  return out;
}

}  // namespace

TEST_CASE("definitions that break an invariant are rejected") {
  const Rat h(1, 2);
  AffineMap id = AffineMap::identity(1);
  SUBCASE("overlapping pieces") {
    std::vector<Piece> ps{{Polytope::box(RVec{0}, RVec{Rat(3, 4)}, true), id},
                          {Polytope::box(RVec{h}, RVec{1}, true), id}};
    CHECK_THROWS_AS(PwaMap(unit_interval(), ps), Error);
  }
  SUBCASE("image leaves the ambient") {
    std::vector<Piece> ps{{unit_interval(true), AffineMap{RMat{{1}}, RVec{h}}}};
    CHECK_THROWS_AS(PwaMap(unit_interval(), ps), Error);
  }
  SUBCASE("unbounded ambient") {
    Polytope half(1, {{RVec{-1}, 0, false}});
    CHECK_THROWS_AS(PwaMap(half, {{unit_interval(true), id}}), Error);
  }
  SUBCASE("piece without interior") {
    std::vector<Piece> ps{{unit_interval(true), id}, {Polytope::box(RVec{h}, RVec{h}, true), id}};
    CHECK_THROWS_AS(PwaMap(unit_interval(), ps), Error);
  }
  SUBCASE("piece outside the ambient") {
    std::vector<Piece> ps{{Polytope::box(RVec{0}, RVec{2}, true), AffineMap{RMat{{h}}, RVec{0}}}};
    CHECK_THROWS_AS(PwaMap(unit_interval(), ps), Error);
  }
  SUBCASE("dimension mismatch") {
    std::vector<Piece> ps{{unit_interval(true), AffineMap::identity(2)}};
    CHECK_THROWS_AS(PwaMap(unit_interval(), ps), Error);
  }
  SUBCASE("the error names the kind") {
    std::vector<Piece> ps{{unit_interval(true), AffineMap{RMat{{1}}, RVec{h}}}};
    try {
      PwaMap f(unit_interval(), ps);
      FAIL("accepted an invalid map");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_map);
    }
  }
}

TEST_CASE("pieces are made open") {
  std::vector<Piece> ps{{unit_interval(false), AffineMap::identity(1)}};
  PwaMap f(unit_interval(), ps);
  CHECK(f.piece(0).domain.all_strict());
  CHECK_FALSE(f.locate(RVec{0}).has_value());
  CHECK(f.locate(RVec{Rat(1, 2)}) == std::optional<std::size_t>{0});
}

TEST_CASE("example1 evaluation by hand") {
  PwaMap f = example1().map.value();
  // (1/2, 0) lies on the boundary of X, so only the affine part of the piece
  // whose closure holds it applies.
  const RVec edge{Rat(1, 2), 0};
  CHECK_THROWS_AS(evaluate(f, edge), Error);
  int owners = 0;
  for (const auto& piece : f.pieces()) {
    if (!closure_contains(piece.domain, edge)) continue;
    ++owners;
    CHECK(piece.map(edge) == RVec{0, Rat(1, 2)});
  }
  CHECK(owners == 1);
  CHECK(evaluate(f, RVec{Rat(1, 2), Rat(1, 4)}) == RVec{Rat(1, 8), Rat(5, 8)});
  CHECK_THROWS_AS(evaluate(f, RVec{0, Rat(1, 2)}), Error);  // on the cut line
  OrbitResult o = orbit(f, RVec{Rat(1, 2), Rat(1, 4)}, 5);
  CHECK(o.complete);
  CHECK(o.points.size() == 6);
  CHECK(o.word.size() == 5);
  for (std::size_t k = 0; k < o.word.size(); ++k)
    CHECK(o.points[k + 1] == oracle::apply(f.piece(o.word[k]).map, o.points[k]));
  OrbitResult stuck = orbit(f, RVec{0, Rat(1, 2)}, 3);
  CHECK_FALSE(stuck.complete);
  CHECK(stuck.points.size() == 1);
}

TEST_CASE("partition words match the grid-itinerary oracle") {
  struct Case {
    Fixture fx;
    int n;
    int grid;
  };
  std::vector<Case> cases{{example1(), 5, 64}, {example3(), 5, 64}, {doubling(), 6, 256},
                          {cat_map(), 4, 48}};
  for (auto& [fx, n, grid] : cases) {
    CAPTURE(fx.name);
    const PwaMap& f = *fx.map;
    Partition p = iterate_partition(f, n);
    std::vector<RVec> pts = oracle::lattice(f, grid);
    std::vector<RVec> inner = interior_points(p);
    pts.insert(pts.end(), inner.begin(), inner.end());
    CHECK(oracle::words_of(f, pts, n) == words_of(p));
    // Every interior point has exactly its own cell's word.
    for (std::size_t c = 0; c < p.size(); ++c) CHECK(oracle::itinerary(f, inner[c], n) == p.cells[c].word);
  }
}

TEST_CASE("documented cell counts") {
  CHECK(iterate_partition(example1().map.value(), 5).size() == 32);
  Fixture id = toys().front();
  REQUIRE(id.name == "identity");
  CHECK(iterate_partition(*id.map, 9).size() == 1);
  CHECK(iterate_partition(doubling().map.value(), 10).size() == 1024);
}

TEST_CASE("partition invariants") {
  PwaMap f = example3().map.value();
  Partition p = iterate_partition(f, 4);
  SUBCASE("sorted by word with open pruned regions") {
    CHECK(std::is_sorted(p.cells.begin(), p.cells.end(),
                         [](const Cell& a, const Cell& b) { return a.word < b.word; }));
    for (const auto& c : p.cells) {
      CHECK(c.word.size() == 4);
      CHECK(c.region.all_strict());
      CHECK(has_interior(c.region));
    }
  }
  SUBCASE("cells are pairwise disjoint") {
    for (std::size_t a = 0; a < p.size(); ++a)
      for (std::size_t b = a + 1; b < p.size(); ++b) CHECK_FALSE(has_interior(intersect(p.cells[a].region, p.cells[b].region)));
  }
  SUBCASE("composed map matches iteration") {
    std::mt19937_64 rng(2);
    for (const auto& c : p.cells) {
      RVec x = interior_point(c.region);
      RVec y = x;
      for (auto s : c.word) y = oracle::apply(f.piece(s).map, y);
      CHECK(c.composed(x) == y);
    }
  }
  SUBCASE("random points land in exactly one cell or are singular") {
    std::mt19937_64 rng(9);
    auto [lo, hi] = oracle::bounding_box(f.ambient());
    for (int k = 0; k < 300; ++k) {
      RVec x = oracle::random_point(rng, lo, hi, 997);
      auto w = oracle::itinerary(f, x, 4);
      auto hits = std::count_if(p.cells.begin(), p.cells.end(), [&](const Cell& c) { return c.region.contains(x); });
      CHECK(hits == (w ? 1 : 0));
    }
  }
}

TEST_CASE("refinement does not depend on the worker count") {
  PwaMap f = cat_map().map.value();
  set_worker_count(1);
  Partition a = iterate_partition(f, 5);
  set_worker_count(4);
  Partition b = iterate_partition(f, 5);
  set_worker_count(1);
  REQUIRE(a.size() == b.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    CHECK(a.cells[c].word == b.cells[c].word);
    CHECK(a.cells[c].composed == b.cells[c].composed);
    CHECK(a.cells[c].region.constraints() == b.cells[c].region.constraints());
  }
}

TEST_CASE("the cell cap raises a resource limit") {
  try {
    iterate_partition(doubling().map.value(), 8, 100);
    FAIL("cap not enforced");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resource_limit);
  }
}

TEST_CASE("multiplicity agrees with the cone oracle") {
  SUBCASE("example1 apex doubles") {
    PwaMap f = example1().map.value();
    Partition p = initial_partition(f);
    for (int n = 1; n <= 6; ++n) {
      if (n > 1) p = refine(p, f);
      const RVec apex{0, 1};
      CHECK(multiplicity_at(p, apex) == (std::uint64_t{1} << n));
      CHECK(oracle::multiplicity_near(f, apex, n, Rat(1, 1 << 20), 256) == (std::uint64_t{1} << n));
    }
  }
  SUBCASE("cat map corner grows linearly") {
    // The cells at the corner are wedges that thin out geometrically, so
    // the direction grid must be fine.
    PwaMap f = cat_map().map.value();
    Partition p = initial_partition(f);
    for (int n = 1; n <= 5; ++n) {
      if (n > 1) p = refine(p, f);
      MultiplicityResult m = max_multiplicity(p);
      CHECK(m.value == static_cast<std::uint64_t>(2 * n + 1));
      CHECK(m.witness == RVec{0, 1});
      CHECK(multiplicity_at(p, m.witness) == m.value);
      CHECK(oracle::multiplicity_near(f, m.witness, n, Rat(1, 1 << 24), 4096) == m.value);
    }
  }
  SUBCASE("interior points of cells have multiplicity one") {
    Partition p = iterate_partition(example3().map.value(), 3);
    for (const auto& c : p.cells) CHECK(multiplicity_at(p, interior_point(c.region)) == 1);
  }
}

TEST_CASE("growth sequences and two-point slopes") {
  GrowthReport g = growth_sequences(doubling().map.value(), 10);
  REQUIRE(g.cells.entries.size() == 10);
  for (const auto& e : g.cells.entries) CHECK(e.value == (std::uint64_t{1} << e.n));
  CHECK(g.cells.two_point_slope() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(g.cells.last_rate() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(g.mid.n == 5);
  CHECK(g.last.n == 10);
  GrowthSeq s;
  s.entries = {{1, 3, 0}, {2, 3, 0}, {3, 12, 0}, {4, 48, 0}};
  CHECK(s.two_point_slope() == doctest::Approx(std::log(16.0) / 2));
}

TEST_CASE("powers of a map compose its pieces") {
  PwaMap f = example1().map.value();
  PwaMap f3 = power(f, 3);
  CHECK(f3.pieces().size() == 8);
  std::mt19937_64 rng(4);
  auto [lo, hi] = oracle::bounding_box(f.ambient());
  for (int k = 0; k < 100; ++k) {
    RVec x = oracle::random_point(rng, lo, hi, 509);
    auto w = oracle::itinerary(f, x, 3);
    if (!w) continue;
    RVec y = x;
    for (auto s : *w) y = oracle::apply(f.piece(s).map, y);
    CHECK(evaluate(f3, x) == y);
  }
}
