#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pwaff/catalog.hpp"
#include "pwaff/errors.hpp"
#include "pwaff/parallel.hpp"
#include "pwaff/rates.hpp"

using namespace pwaff;

namespace {

const double kLog2 = std::log(2.0);

// Largest singular value of a 2x2 matrix in closed form.
double top_singular_2x2(const Eigen::MatrixXd& m) {
  const double fro = m.squaredNorm();
  const double det = m.determinant();
  return std::sqrt((fro + std::sqrt(std::max(0.0, fro * fro - 4 * det * det))) / 2);
}

Fixture toy(const std::string& name) { return fixture_by_name(name); }

}  // namespace

TEST_CASE("exterior norms against closed forms") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 50; ++k) {
    Eigen::MatrixXd m(2, 2);
    m << u(rng), u(rng), u(rng), u(rng);
    CHECK(exterior_norm(m, 0) == 1.0);
    CHECK(exterior_norm(m, 1) == doctest::Approx(top_singular_2x2(m)).epsilon(1e-12));
    CHECK(exterior_norm(m, 2) == doctest::Approx(std::abs(m.determinant())).epsilon(1e-12));
  }
  for (int k = 0; k < 20; ++k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return u(rng); });
    // Second compound matrix: its norm is the product of the two largest
    // singular values.
    Eigen::MatrixXd c(3, 3);
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) {
        const int a = pairs[r][0], b = pairs[r][1], p = pairs[s][0], q = pairs[s][1];
        c(r, s) = m(a, p) * m(b, q) - m(a, q) * m(b, p);
      }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
    CHECK(exterior_norm(m, 2) == doctest::Approx(svd.singularValues()[0]).epsilon(1e-10));
    CHECK(exterior_norm(m, 3) == doctest::Approx(std::abs(m.determinant())).epsilon(1e-10));
  }
  CHECK(log_exterior_norm(Eigen::MatrixXd::Zero(2, 2), 1) == kMinusInfinity);
}

TEST_CASE("lambda values of diagonal and hyperbolic maps") {
  PwaMap diag = toy("diag-torus").map.value();
  RateReport r = lambda_rates(diag, iterate_partition(diag, 6));
  CHECK(r.lambda_plus == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(r.lambda_max == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(r.lambda_min == doctest::Approx(-kLog2).epsilon(1e-12));
  REQUIRE(r.lambda_plus_graded.size() == 2);
  CHECK(r.lambda_plus_graded[0] == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(r.lambda_plus_graded[1] == doctest::Approx(kLog2).epsilon(1e-12));

  PwaMap cat = cat_map().map.value();
  RateReport c = lambda_rates(cat, iterate_partition(cat, 8));
  const double h = std::log((3 + std::sqrt(5.0)) / 2);
  CHECK(std::abs(c.lambda_max - h) <= 1e-9);
  CHECK(std::abs(c.lambda_min + h) <= 1e-9);
  CHECK(c.witness_lambda_max.size() == 8);
}

TEST_CASE("non-expanding maps have lambda plus zero") {
  for (const char* name : {"identity", "rotation", "contraction", "conformal-contraction", "quadrant-exchange"}) {
    CAPTURE(std::string(name));
    PwaMap f = toy(name).map.value();
    CHECK(std::abs(lambda_rates(f, iterate_partition(f, 5)).lambda_plus) <= 1e-12);
  }
}

TEST_CASE("streamed lambda values equal the full partition values") {
  for (auto [fx, n, split] : {std::tuple{example1(), 10, 4}, std::tuple{example3(), 6, 3}, std::tuple{cat_map(), 6, 2}}) {
    CAPTURE(fx.name);
    const PwaMap& f = *fx.map;
    RateReport full = lambda_rates(f, iterate_partition(f, n));
    RateReport streamed = lambda_rates_at_depth(f, n, split);
    CHECK(streamed.n == n);
    CHECK(streamed.lambda_plus == full.lambda_plus);
    CHECK(streamed.lambda_max == full.lambda_max);
    CHECK(streamed.lambda_min == full.lambda_min);
    CHECK(streamed.lambda_plus_graded == full.lambda_plus_graded);
    CHECK(streamed.witness_lambda_plus == full.witness_lambda_plus);
    CHECK(streamed.witness_lambda_min == full.witness_lambda_min);
  }
}

TEST_CASE("spherical derivative") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 30; ++k) {
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return g(rng); });
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(3, [&] { return g(rng); }).normalized();
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(3, [&] { return g(rng); });
    Eigen::VectorXd d = sph_derivative(a, x, v);
    CHECK(std::abs(d.dot((a * x).normalized())) <= 1e-12 * (1 + d.norm()));
    // Finite-difference check of x -> Ax/|Ax| along v.
    const double t = 1e-6;
    Eigen::VectorXd num = ((a * (x + t * v)).normalized() - (a * (x - t * v)).normalized()) / (2 * t);
    CHECK((num - d).norm() <= 1e-6 * (1 + d.norm()));
  }
  // Scaled rotations act isometrically on tangent directions.
  Eigen::MatrixXd r(2, 2);
  r << 0.6, -0.8, 0.8, 0.6;
  Eigen::VectorXd x(2), v(2);
  x << 1, 0;
  v << 0, 1;
  CHECK(sph_derivative(3 * r, x, v).norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(sph_derivative(Eigen::MatrixXd::Zero(2, 2), x, v), Error);
}

TEST_CASE("frame propagation under conformal steps keeps volume") {
  Eigen::MatrixXd r(3, 3);
  r << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  std::vector<Eigen::MatrixXd> steps(10, 0.5 * r);
  Eigen::VectorXd v(3);
  v << 1, 0, 0;
  Eigen::MatrixXd frame(3, 2);
  frame << 0, 0, 1, 0, 0, 1;
  SphSample s = propagate_sphere_frame(steps, v, frame);
  CHECK(std::abs(s.value) <= 1e-12);
  CHECK(s.max_frame_defect <= 1e-12);
  CHECK(s.step_log_growth.size() == 10);
}

TEST_CASE("sampled angular rates stay below the exact bound") {
  PwaMap f = example1().map.value();
  Partition p = iterate_partition(f, 8);
  RhoEstimate est = rho_sampled(f, p, 1, 500, 1);
  const double bound = rho_upper_bound(f, p, 1);
  CHECK(est.accepted > 0);
  CHECK(est.value <= bound + 1e-9);
  CHECK(est.value > 0.5);
}

TEST_CASE("conformal toys have zero angular expansion") {
  for (const char* name : {"identity", "rotation", "contraction", "conformal-contraction", "quadrant-exchange"}) {
    CAPTURE(std::string(name));
    PwaMap f = toy(name).map.value();
    Partition p = iterate_partition(f, 6);
    CHECK(std::abs(rho_sampled(f, p, 1, 200, 2).value) <= 1e-9);
  }
  // The bound keeps the k = 0 term, so for c times an isometry it is
  // max(0, -log c): zero for isometries, log 2 for the halving toys.
  for (auto [name, want] : {std::pair{"identity", 0.0}, std::pair{"rotation", 0.0},
                            std::pair{"quadrant-exchange", 0.0}, std::pair{"contraction", kLog2},
                            std::pair{"conformal-contraction", kLog2}}) {
    CAPTURE(std::string(name));
    PwaMap f = toy(name).map.value();
    CHECK(rho_upper_bound(f, iterate_partition(f, 6), 1) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("bound formula on a single diagonal piece") {
  PwaMap diag = toy("diag-torus").map.value();
  CHECK(rho_upper_bound(diag, iterate_partition(diag, 1), 1) == doctest::Approx(2 * kLog2).epsilon(1e-12));
}

TEST_CASE("exterior norms are submultiplicative along cell words") {
  for (const char* name : {"example1", "example3", "catmap"}) {
    CAPTURE(std::string(name));
    PwaMap f = fixture_by_name(name).map.value();
    Partition p = iterate_partition(f, 5);
    for (const auto& c : p.cells) {
      // Split w = uv with u the first two symbols.
      RMat u = RMat::identity(f.dim()), v = RMat::identity(f.dim());
      for (std::size_t k = 0; k < c.word.size(); ++k) {
        const RMat& a = f.piece(c.word[k]).map.linear;
        if (k < 2) u = a * u;
        else v = a * v;
      }
      for (int k = 1; k <= static_cast<int>(f.dim()); ++k)
        CHECK(log_exterior_norm(to_eigen(c.composed.linear), k) <=
              log_exterior_norm(to_eigen(u), k) + log_exterior_norm(to_eigen(v), k) + 1e-9);
    }
  }
}

TEST_CASE("sampling is deterministic and independent of the worker count") {
  PwaMap f = example3().map.value();
  Partition p = iterate_partition(f, 6);
  set_worker_count(1);
  RhoEstimate a = rho_sampled(f, p, 1, 300, 42);
  set_worker_count(3);
  RhoEstimate b = rho_sampled(f, p, 1, 300, 42);
  set_worker_count(1);
  CHECK(a.value == b.value);
  CHECK(a.accepted == b.accepted);
  CHECK(a.witness == b.witness);
  RhoEstimate c = rho_sampled(f, p, 1, 300, 43);
  CHECK(c.accepted + c.discarded == 300);
}

TEST_CASE("scalar cocycles cancel exactly") {
  RMat a{{2, 1}, {1, 1}};
  CHECK(projective_normal_form(Rat(3) * a) == projective_normal_form(a));
  CHECK(projective_normal_form(Rat(-1, 7) * a) == projective_normal_form(a));
  CHECK(projective_normal_form(RMat{{0, 2}, {4, 6}}) == RMat{{0, 1}, {2, 3}});
  PwaMap f = example1().map.value();
  Partition p = iterate_partition(f, 6);
  std::vector<RMat> scaled;
  for (const auto& piece : f.pieces()) scaled.push_back(Rat(3) * piece.map.linear);
  RhoEstimate plain = rho_sampled(f, p, 1, 300, 5);
  RhoEstimate cocycle = rho_sampled(f, p, 1, 300, 5, &scaled);
  CHECK(plain.value == cocycle.value);
}

TEST_CASE("singular linear parts") {
  std::vector<Piece> ps{{Polytope::box(RVec{0, 0}, RVec{1, 1}, true), AffineMap{RMat{{Rat(1, 2), 0}, {0, 0}}, RVec{0, Rat(1, 2)}}}};
  PwaMap f(Polytope::box(RVec{0, 0}, RVec{1, 1}), ps);
  CHECK_FALSE(f.non_degenerate());
  Partition p = iterate_partition(f, 1);
  CHECK(lambda_rates(f, p).lambda_min == kMinusInfinity);
  CHECK_THROWS_AS(rho_upper_bound(f, p, 1), Error);
  BoundBreakdown b = entropy_upper_bound(f, 1);
  CHECK_FALSE(b.rho_sum.has_value());
  CHECK_FALSE(b.conformal_gap.has_value());
}

TEST_CASE("assembled bound takes the smallest available multiplicity term") {
  for (const char* name : {"example1", "example3", "catmap", "rotation", "diag-torus"}) {
    CAPTURE(std::string(name));
    Fixture fx = fixture_by_name(name);
    BoundBreakdown b = entropy_upper_bound(*fx.map, 6);
    double term = std::max(0.0, b.mult_slope);
    if (b.rho_sum) term = std::min(term, *b.rho_sum);
    if (b.conformal_gap) term = std::min(term, *b.conformal_gap);
    CHECK(b.multiplicity_term == doctest::Approx(std::max(0.0, term)));
    CHECK(b.total == doctest::Approx(b.lambda_plus + b.multiplicity_term));
    CHECK(b.n == 6);
  }
  BoundBreakdown rot = entropy_upper_bound(toy("rotation").map.value(), 6);
  CHECK(rot.total <= 1e-12);
}

TEST_CASE("rate report fills every grade") {
  PwaMap f = example1().map.value();
  GrowthReport g = growth_sequences(f, 8);
  RateReport r = rate_report(f, g, 300, 1);
  CHECK(r.n == 8);
  CHECK(r.rho_bound.size() == 1);
  CHECK(r.rho_sampled.size() == 1);
  CHECK(r.rho_sampled_slope.size() == 1);
  CHECK(r.rho_sampled[0] <= r.rho_bound[0] + 1e-9);
  CHECK(r.rho_sampled_slope[0] == doctest::Approx(rho_sampled_slope(f, g.mid, g.last, 1, 300, 1)));
}
