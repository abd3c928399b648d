#pragma once

// Expansion rates of composed linear parts (lambda^+, lambda_max,
// lambda_min, graded lambda^+_[i]), the spherization's vertical derivative
// and angular-expansion rates rho_i, and the assembled entropy upper bound.
//
// Linear parts are composed exactly; doubles appear only when a finished
// rational matrix is handed to an SVD.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "pwaff/pwamap.hpp"

namespace pwaff {

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd to_eigen(const RMat& m);

/// Operator norm of the k-th exterior power: product of the k largest
/// singular values (1 for k = 0).
double exterior_norm(const Eigen::MatrixXd& m, int k);
/// ln of exterior_norm, -inf when the product vanishes.
double log_exterior_norm(const Eigen::MatrixXd& m, int k);

struct RateReport {
  int n = 0;
  int dim = 0;
  double lambda_plus = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;  // kMinusInfinity when some composed part is singular
  std::vector<double> lambda_plus_graded;  // index i-1 for i = 1..d
  std::vector<double> rho_bound;           // index i-1 for i = 1..d-1 (empty if degenerate)
  std::vector<double> rho_sampled;         // index i-1 for i = 1..d-1 (optional)
  std::vector<double> rho_sampled_slope;   // two-point slope of the sampled rates
  Word witness_lambda_plus;
  Word witness_lambda_max;
  Word witness_lambda_min;
};

/// Finite-n lambda values over the cells of `partition` (= Z^n of f).
RateReport lambda_rates(const PwaMap& f, const Partition& partition);
/// Same values for Z^n without holding Z^n: the cells of Z^split are refined
/// one at a time, depth first. Memory stays near |Z^split| plus one subtree.
RateReport lambda_rates_at_depth(const PwaMap& f, int n, int split = 10,
                                 std::size_t cell_cap = default_cell_cap());

/// Derivative of the spherical map x -> Ax/|Ax| at unit x applied to v:
/// the component of Av/|Ax| orthogonal to w = Ax/|Ax|.
/// Throws Error{singular_matrix} for singular A.
Eigen::VectorXd sph_derivative(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v);

/// One propagated sample of the spherization's vertical derivative.
struct SphSample {
  Eigen::VectorXd start;          // orbit seed x
  Eigen::VectorXd direction;      // v on S^{d-1}
  Eigen::MatrixXd frame;          // final orthonormal i-frame
  std::vector<double> step_log_growth;  // ln |det R_t| per step
  double max_frame_defect = 0.0;  // max |F^T F - I| seen after re-orthonormalization
  double value = 0.0;             // (1/n) max_{k<=i} ln |Lambda^k D|
  Word word;
};

/// Propagates direction v with tangent i-frame `frame` through the linear
/// parts `steps` (applied in order) and evaluates the rate.
SphSample propagate_sphere_frame(const std::vector<Eigen::MatrixXd>& steps,
                                 const Eigen::VectorXd& v, const Eigen::MatrixXd& frame);

struct RhoEstimate {
  double value = 0.0;      // max over accepted samples
  int accepted = 0;
  int discarded = 0;       // random seeds that hit Sing(X) within n steps
  Word witness;
};

/// Monte-Carlo lower estimate of the finite-n angular expansion rate rho_i.
/// Half of the samples seed at cell interiors of Z^n, half at random points
/// of X; directions are either uniform or the least-expanded direction of
/// the composed linear part. `cocycle`, when given, replaces the per-piece
/// linear parts used for the derivative (the itinerary still comes from f).
/// Deterministic in `seed`; each sample draws from its own substream.
RhoEstimate rho_sampled(const PwaMap& f, const Partition& partition, int i, int samples,
                        std::uint64_t seed, const std::vector<RMat>* cocycle = nullptr);

/// (1/n) max over cells of [ max_{k<=i} ln|Lambda^k L_w| + i ln|L_w^{-1}| ].
/// Throws Error{singular_matrix} for degenerate cells.
double rho_upper_bound(const PwaMap& f, const Partition& partition, int i);

/// (n r_n - m r_m) / (n - m) for the sampled rates r at the two partitions
/// (m < n); the rate of the last n - m steps, free of the start-up transient.
double rho_sampled_slope(const PwaMap& f, const Partition& mid, const Partition& last, int i,
                         int samples, std::uint64_t seed);

/// lambda rates at growth.last; rho bounds, sampled rates and sampled slopes
/// for i = 1..d-1 when every piece is invertible.
RateReport rate_report(const PwaMap& f, const GrowthReport& growth, int samples, std::uint64_t seed);

struct BoundBreakdown {
  int n = 0;
  double lambda_plus = 0.0;
  double mult_slope = 0.0;       // headline H_mult estimate
  std::optional<double> rho_sum;     // sum_i rho_upper_bound_i (non-degenerate only)
  std::optional<double> conformal_gap;  // d(d-1)/2 (lambda_max - lambda_min)
  double multiplicity_term = 0.0;   // min of the available terms
  double total = 0.0;               // lambda_plus + multiplicity_term
};

/// lambda^+_n + min(H_mult slope, sum_i rho bound_i, d(d-1)/2 (lambda_max - lambda_min)).
BoundBreakdown entropy_upper_bound(const PwaMap& f, int n,
                                   std::size_t cell_cap = default_cell_cap());
/// Same, from a precomputed growth report (its `last` partition is used).
BoundBreakdown entropy_upper_bound(const PwaMap& f, const GrowthReport& growth);

/// Divides a linear part by its first non-zero entry (row-major). The result
/// is identical for A and cA, c != 0, so scalar cocycles cancel exactly.
RMat projective_normal_form(const RMat& m);

}  // namespace pwaff
