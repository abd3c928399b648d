#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "pwaff/catalog.hpp"
#include "pwaff/entropyest.hpp"
#include "pwaff/errors.hpp"
#include "pwaff/parallel.hpp"

using namespace pwaff;

namespace {

const double kLog2 = std::log(2.0);

Fixture named(const std::string& name) { return fixture_by_name(name); }

}  // namespace

TEST_CASE("two-point and regression slopes") {
  CountSeries s;
  s.counts = {{1, 2}, {2, 4}, {3, 8}, {4, 16}};
  CHECK(s.two_point_slope() == doctest::Approx(kLog2));
  CHECK(s.regression_slope() == doctest::Approx(kLog2));
  CountSeries flat;
  flat.counts = {{1, 5}, {2, 5}, {3, 5}, {4, 5}, {5, 5}, {6, 5}};
  CHECK(flat.two_point_slope() == 0.0);
  CHECK(flat.regression_slope() == 0.0);
}

TEST_CASE("identity covering counts are the boxes meeting X") {
  // Edges at k/4 cover the unit square by 16 boxes, whatever n is.
  PwaMap f = named("identity").map.value();
  CoverResult r = covering_counts(f, 1, 6, 0.25, 64, 0.2, 0.0);
  REQUIRE(r.series.counts.size() == 6);
  for (auto [n, count] : r.series.counts) CHECK(count == 16);
  CHECK(r.series.two_point_slope() == 0.0);
  CHECK(r.stats.in_domain == 64 * 64);
  CHECK(r.stats.discarded == 0);
}

TEST_CASE("doubling covering counts follow the binary digits") {
  // With edges at k/8 the code of an orbit of length n is its first n + 2
  // binary digits, so exactly 2^(n+2) codes occur.
  PwaMap f = doubling().map.value();
  CoverResult r = covering_counts(f, 1, 7, 0.125, 1 << 14, 0.2, 0.0);
  for (auto [n, count] : r.series.counts) {
    CAPTURE(n);
    CHECK(count == (std::uint64_t{1} << (n + 2)));
  }
  CHECK(r.series.two_point_slope() == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(covering_count(f, 5, 0.125, 1 << 14) >= 128);
}

TEST_CASE("separated sets of the doubling map grow like 2^n") {
  PwaMap f = doubling().map.value();
  SeparatedResult s = separated_counts(f, {4, 8}, 0.25, 4000, 3);
  REQUIRE(s.series.counts.size() == 2);
  CHECK(s.series.counts[0].second < s.series.counts[1].second);
  CHECK(std::abs(s.series.two_point_slope() - kLog2) <= 0.1);
  // An (n, eps)-separated set has at most one point in each cylinder of
  // the 2^n branches refined by 1/eps boxes.
  CHECK(s.series.counts[1].second <= (std::uint64_t{1} << 8) * 4);
  CHECK(separated_lower_count(f, 8, 0.25, 4000, 3) == s.series.counts[1].second);
}

TEST_CASE("extra starts are taken first") {
  PwaMap f = named("identity").map.value();
  // Four starts near the corners are pairwise 0.8 apart and every point of
  // the square lies within 1/2 of one of them.
  std::vector<std::vector<double>> starts{{0.1, 0.1}, {0.1, 0.9}, {0.9, 0.1}, {0.9, 0.9}};
  SeparatedResult s = separated_counts(f, {2}, 0.75, 200, 1, 0.2, starts);
  CHECK(s.series.counts.at(0).second == 4);
}

TEST_CASE("configuration checks") {
  EstimateConfig c;
  CHECK_NOTHROW(check_config(c));
  EstimateConfig bad = c;
  bad.eps_ladder = {};
  CHECK_THROWS_AS(check_config(bad), std::invalid_argument);
  bad = c;
  bad.eps_ladder = {0.1, -0.1};
  CHECK_THROWS_AS(check_config(bad), std::invalid_argument);
  bad = c;
  bad.n_min = 5;
  bad.n_max = 4;
  CHECK_THROWS_AS(check_config(bad), std::invalid_argument);
  bad = c;
  bad.sep_eps = {0.0};
  CHECK_THROWS_AS(check_config(bad), std::invalid_argument);
}

TEST_CASE("orbits that fall into the singular set abort the estimate") {
  // Everything lands on the edge y = 0 of the square, which is singular.
  std::vector<Piece> ps{{Polytope::box(RVec{0, 0}, RVec{1, 1}, true),
                         AffineMap{RMat{{Rat(1, 2), 0}, {0, 0}}, RVec{0, 0}}}};
  PwaMap f(Polytope::box(RVec{0, 0}, RVec{1, 1}), ps);
  try {
    covering_counts(f, 1, 3, 0.25, 32);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::estimation_failed);
  }
}

TEST_CASE("estimate on the doubling map brackets log 2") {
  Fixture fx = doubling();
  EstimateConfig c = fx.estimate;
  c.samples = 3000;
  EntropyReport r = estimate(*fx.map, c);
  CHECK(r.ladder.size() == c.eps_ladder.size());
  CHECK(std::abs(r.headline - kLog2) <= 0.05);
  REQUIRE(r.rates_bound.has_value());
  CHECK(r.upper_bound == doctest::Approx(kLog2).epsilon(1e-9));
  CHECK(r.verdict_lo <= kLog2 + 1e-9);
  CHECK(r.verdict_hi >= kLog2 - 1e-9);
  CHECK(r.lower_bound >= kLog2 - 0.1);
}

TEST_CASE("non-expanding conformal toys estimate zero") {
  for (const char* name : {"rotation", "contraction", "quadrant-exchange"}) {
    CAPTURE(std::string(name));
    Fixture fx = named(name);
    EstimateConfig c;
    c.eps_ladder = {1.0 / 8};
    c.n_max = 6;
    c.samples = 500;
    c.sep_n = 6;
    c.bound_n = 5;
    EntropyReport r = estimate(*fx.map, c);
    CHECK(r.headline <= 0.05);
    CHECK(r.upper_bound <= 0.02);
  }
}

TEST_CASE("estimates do not depend on the worker count") {
  Fixture fx = example3();
  EstimateConfig c;
  c.eps_ladder = {1.0 / 8};
  c.n_max = 6;
  c.samples = 800;
  c.sep_n = 6;
  c.bound_n = 4;
  set_worker_count(1);
  EntropyReport a = estimate(*fx.map, c);
  set_worker_count(3);
  EntropyReport b = estimate(*fx.map, c);
  set_worker_count(1);
  REQUIRE(a.ladder.size() == b.ladder.size());
  CHECK(a.ladder[0].series.counts == b.ladder[0].series.counts);
  CHECK(a.separated[0].series.counts == b.separated[0].series.counts);
  CHECK(a.headline == b.headline);
  CHECK(a.upper_bound == b.upper_bound);
}
