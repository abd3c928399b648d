#pragma once

// Built-in, exactly specified systems with their known entropy data.

#include <optional>
#include <string>
#include <vector>

#include "pwaff/entropyest.hpp"
#include "pwaff/pwamap.hpp"
#include "pwaff/skew.hpp"

namespace pwaff {

/// Where an expected value comes from: stated in the reference literature,
/// derived by an independent computation, or immediate from the definitions.
enum class Provenance { reference, derived, trivial };
const char* to_string(Provenance p);

/// How an observed value is compared with the expectation.
enum class Check {
  near,       // |observed - value| <= tolerance
  at_most,    // observed <= value + tolerance
  at_least,   // observed >= value - tolerance
  in_verdict  // verdict interval widened by tolerance contains value
};
const char* to_string(Check c);

/// Quantities understood by the verification driver:
///   cells, mult_at (needs `point`), h_sing, h_mult, lambda_plus, lambda_max,
///   lambda_min, rho_1 (sampled two-point slope), bound, entropy,
///   entropy_headline, pieces, skew_lower, skew_upper, fiber_lambda, fiber_mult.
struct Expectation {
  std::string quantity;
  double value = 0.0;
  double tolerance = 0.0;
  Check check = Check::near;
  Provenance provenance = Provenance::trivial;
  std::string note;
  int n = 0;                   // partition depth; 0 = the fixture's default
  std::optional<RVec> point;   // for mult_at
};

struct Fixture {
  std::string name;
  std::string description;
  std::optional<PwaMap> map;        // flattened for skew products with a map base
  std::optional<SkewProduct> skew;
  std::vector<Expectation> expected;
  int depth = 8;                    // default partition depth for checks
  int fiber_m = 4;                  // fiber word length for skew checks
  EstimateConfig estimate;          // sampling protocol for this system
};

/// x -> src_k maps to dst_k for d+1 affinely independent points. Throws
/// Error{singular_matrix} for degenerate sources.
AffineMap affine_from_points(const std::vector<RVec>& src, const std::vector<RVec>& dst);

Fixture example1();
/// x -> (S(x) + f) / 2 with S and f = (0, 1) of example1.
Fixture example1_contracted();
Fixture example2();
Fixture example3();
/// x -> Ax mod Z^d on [0,1]^d. Throws Error{singular_matrix}.
Fixture torus_map(const RMat& a, const std::string& name = "torus");
Fixture cat_map();
Fixture doubling();
std::vector<Fixture> toys();
/// Full shift on N symbols over N single-piece conformal contractions of [-1,1]^2.
Fixture shift_fixture(int symbols);

/// Every built-in fixture, in a fixed order.
std::vector<Fixture> all_fixtures();
std::vector<std::string> fixture_names();
/// Throws std::out_of_range for an unknown name.
Fixture fixture_by_name(const std::string& name);

}  // namespace pwaff
