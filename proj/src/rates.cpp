#include "pwaff/rates.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pwaff/floatmap.hpp"
#include "pwaff/parallel.hpp"

namespace pwaff {

Eigen::MatrixXd to_eigen(const RMat& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c).get_d();
  return out;
}

namespace {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

// ln of the product of the k largest singular values, k = 0..d.
std::vector<double> log_exterior_profile(const Eigen::VectorXd& sv) {
  std::vector<double> out(sv.size() + 1, 0.0);
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    out[k + 1] = sv[k] > 0.0 ? out[k] + std::log(sv[k]) : kMinusInfinity;
  }
  return out;
}

double max_prefix(const std::vector<double>& profile, int upto) {
  double best = 0.0;  // k = 0
  for (int k = 1; k <= upto; ++k) best = std::max(best, profile[k]);
  return best;
}

}  // namespace

double exterior_norm(const Eigen::MatrixXd& m, int k) {
  if (k < 0 || k > m.cols()) throw Error(ErrorKind::dimension_mismatch, "exterior_norm: bad k");
  Eigen::VectorXd sv = singular_values(m);
  double prod = 1.0;
  for (int j = 0; j < k; ++j) prod *= sv[j];
  return prod;
}

double log_exterior_norm(const Eigen::MatrixXd& m, int k) {
  if (k < 0 || k > m.cols()) throw Error(ErrorKind::dimension_mismatch, "exterior_norm: bad k");
  return log_exterior_profile(singular_values(m))[k];
}

RMat projective_normal_form(const RMat& m) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (sgn(m(r, c)) != 0) {
        Rat inv = 1 / m(r, c);
        return inv * m;
      }
  return m;
}

// ---------------------------------------------------------------------------
// lambda rates

RateReport lambda_rates(const PwaMap& f, const Partition& partition) {
  const int d = static_cast<int>(f.dim());
  const double n = partition.n;
  RateReport rep;
  rep.n = partition.n;
  rep.dim = d;
  rep.lambda_plus_graded.assign(d, 0.0);
  rep.lambda_max = kMinusInfinity;
  double worst_inverse = kMinusInfinity;
  bool singular = false;

  struct CellRates {
    std::vector<double> profile;
    double log_inverse = 0.0;
    bool singular = false;
  };
  std::vector<CellRates> per_cell(partition.cells.size());
  parallel_for(partition.cells.size(), [&](std::size_t c) {
    const RMat& lin = partition.cells[c].composed.linear;
    Eigen::VectorXd sv = singular_values(to_eigen(lin));
    per_cell[c].profile = log_exterior_profile(sv);
    per_cell[c].singular = sgn(lin.determinant()) == 0;
    if (!per_cell[c].singular) per_cell[c].log_inverse = -std::log(sv[d - 1]);
  });

  for (std::size_t c = 0; c < per_cell.size(); ++c) {
    const auto& cr = per_cell[c];
    const Word& w = partition.cells[c].word;
    for (int i = 1; i <= d; ++i) {
      rep.lambda_plus_graded[i - 1] = std::max(rep.lambda_plus_graded[i - 1], max_prefix(cr.profile, i) / n);
    }
    double plus = max_prefix(cr.profile, d) / n;
    if (c == 0 || plus > rep.lambda_plus) {
      rep.lambda_plus = plus;
      rep.witness_lambda_plus = w;
    }
    double top = cr.profile[1] / n;
    if (c == 0 || top > rep.lambda_max) {
      rep.lambda_max = top;
      rep.witness_lambda_max = w;
    }
    if (cr.singular) {
      if (!singular) rep.witness_lambda_min = w;
      singular = true;
    } else if (!singular && cr.log_inverse / n > worst_inverse) {
      worst_inverse = cr.log_inverse / n;
      rep.witness_lambda_min = w;
    }
  }
  rep.lambda_min = singular ? kMinusInfinity : -worst_inverse;
  return rep;
}

namespace {

// Folds the report of a later run of cells (in word order) into acc.
void merge_rates(RateReport& acc, const RateReport& r) {
  for (std::size_t i = 0; i < acc.lambda_plus_graded.size(); ++i)
    acc.lambda_plus_graded[i] = std::max(acc.lambda_plus_graded[i], r.lambda_plus_graded[i]);
  if (r.lambda_plus > acc.lambda_plus) {
    acc.lambda_plus = r.lambda_plus;
    acc.witness_lambda_plus = r.witness_lambda_plus;
  }
  if (r.lambda_max > acc.lambda_max) {
    acc.lambda_max = r.lambda_max;
    acc.witness_lambda_max = r.witness_lambda_max;
  }
  const bool acc_singular = acc.lambda_min == kMinusInfinity;
  const bool r_singular = r.lambda_min == kMinusInfinity;
  if ((!acc_singular && r_singular) || (!acc_singular && r.lambda_min < acc.lambda_min)) {
    acc.lambda_min = r.lambda_min;
    acc.witness_lambda_min = r.witness_lambda_min;
  }
}

}  // namespace

RateReport lambda_rates_at_depth(const PwaMap& f, int n, int split, std::size_t cell_cap) {
  if (n < 1) throw Error(ErrorKind::dimension_mismatch, "partition depth must be at least 1");
  split = std::clamp(split, 1, n);
  const Partition top = iterate_partition(f, split, cell_cap);
  if (split == n) return lambda_rates(f, top);
  RateReport acc;
  bool any = false;
  for (const Cell& c : top.cells) {
    Partition sub;
    sub.n = top.n;
    sub.cells.push_back(c);
    for (int k = split; k < n; ++k) sub = refine(sub, f, cell_cap);
    if (sub.cells.empty()) continue;
    RateReport r = lambda_rates(f, sub);
    if (!any) acc = std::move(r);
    else merge_rates(acc, r);
    any = true;
  }
  acc.n = n;
  acc.dim = static_cast<int>(f.dim());
  return acc;
}

// ---------------------------------------------------------------------------
// Spherization

Eigen::VectorXd sph_derivative(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v) {
  if (a.rows() != a.cols() || a.cols() != x.size() || x.size() != v.size()) {
    throw Error(ErrorKind::dimension_mismatch, "sph_derivative");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorKind::singular_matrix, "sph_derivative needs invertible A");
  Eigen::VectorXd ax = a * x;
  const double nrm = ax.norm();
  Eigen::VectorXd w = ax / nrm;
  Eigen::VectorXd u = a * v / nrm;
  return u - w * w.dot(u);
}

namespace {

// Thin QR with a non-negative diagonal; overwrites g with Q, returns R.
Eigen::MatrixXd orthonormalize(Eigen::MatrixXd& g) {
  const Eigen::Index rows = g.rows();
  const Eigen::Index k = g.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, k);
  Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) {
      r.row(j) *= -1.0;
      q.col(j) *= -1.0;
    }
  }
  g = q;
  return r;
}

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& v) {
  // Columns 1..d-1 of a Householder reflection that maps e_0 to v span v^perp.
  const Eigen::Index d = v.size();
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(v).householderQ() *
                      Eigen::MatrixXd::Identity(d, d);
  return q.rightCols(d - 1);
}

}  // namespace

SphSample propagate_sphere_frame(const std::vector<Eigen::MatrixXd>& steps,
                                 const Eigen::VectorXd& v, const Eigen::MatrixXd& frame) {
  SphSample s;
  s.direction = v.normalized();
  Eigen::VectorXd dir = s.direction;
  Eigen::MatrixXd f = frame;
  const Eigen::Index k = f.cols();
  orthonormalize(f);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(k, k);
  double log_scale = 0.0;
  for (const auto& m : steps) {
    Eigen::VectorXd mv = m * dir;
    const double nrm = mv.norm();
    if (!(nrm > 0.0)) throw Error(ErrorKind::singular_matrix, "direction collapsed");
    Eigen::VectorXd w = mv / nrm;
    Eigen::MatrixXd g = m * f / nrm;
    g -= w * (w.transpose() * g);
    Eigen::MatrixXd r = orthonormalize(g);
    double step_log = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) step_log += std::log(std::abs(r(j, j)));
    s.step_log_growth.push_back(step_log);
    f = g;
    s.max_frame_defect = std::max(
        s.max_frame_defect,
        (f.transpose() * f - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff());
    acc = r * acc;
    const double scale = acc.cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      acc /= scale;
      log_scale += std::log(scale);
    }
    dir = w;
  }
  s.frame = f;
  Eigen::VectorXd sv = singular_values(acc);
  double best = 0.0;
  double running = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    running += sv[j] > 0.0 ? std::log(sv[j]) + log_scale : kMinusInfinity;
    best = std::max(best, running);
  }
  const double n = steps.empty() ? 1.0 : static_cast<double>(steps.size());
  s.value = best / n;
  return s;
}

namespace {

Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = normal(rng);
  return v;
}

}  // namespace

RhoEstimate rho_sampled(const PwaMap& f, const Partition& partition, int i, int samples,
                        std::uint64_t seed, const std::vector<RMat>* cocycle) {
  const auto d = static_cast<Eigen::Index>(f.dim());
  if (i < 1 || i > d - 1) throw Error(ErrorKind::dimension_mismatch, "rho_sampled needs 1 <= i < d");
  if (!f.non_degenerate()) throw Error(ErrorKind::degenerate_piece, "rho_sampled needs invertible pieces");
  if (cocycle && cocycle->size() != f.pieces().size()) {
    throw Error(ErrorKind::dimension_mismatch, "cocycle must have one matrix per piece");
  }
  if (partition.cells.empty()) throw Error(ErrorKind::empty_interior, "empty partition");
  const int n = partition.n;

  std::vector<Eigen::MatrixXd> step_mats;
  for (std::size_t j = 0; j < f.pieces().size(); ++j) {
    const RMat& lin = cocycle ? (*cocycle)[j] : f.piece(j).map.linear;
    if (sgn(lin.determinant()) == 0) throw Error(ErrorKind::singular_matrix, "singular cocycle matrix");
    step_mats.push_back(to_eigen(projective_normal_form(lin)));
  }
  const FloatMap fm(f);

  struct Outcome {
    bool accepted = false;
    double value = 0.0;
    Word word;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(std::max(samples, 0)));
  parallel_for(outcomes.size(), [&](std::size_t s) {
    std::seed_seq sseq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(s)};
    std::mt19937_64 rng(sseq);
    const bool from_cell = (s % 4 == 0) || (s % 4 == 2);
    const bool guided = (s % 4 == 0) || (s % 4 == 3);
    Word word;
    if (from_cell) {
      word = partition.cells[rng() % partition.cells.size()].word;
    } else {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<double> y(static_cast<std::size_t>(d));
      bool found = false;
      for (int attempt = 0; attempt < 64 && !found; ++attempt) {
        for (Eigen::Index j = 0; j < d; ++j)
          y[j] = fm.lower()[j] + (fm.upper()[j] - fm.lower()[j]) * unit(rng);
        found = fm.locate(y.data()).has_value();
      }
      if (!found) return;
      for (int t = 0; t < n; ++t) {
        std::size_t piece = 0;
        if (!fm.step(y.data(), &piece)) return;
        word.push_back(static_cast<std::uint16_t>(piece));
      }
    }
    std::vector<Eigen::MatrixXd> steps;
    steps.reserve(word.size());
    for (auto w : word) steps.push_back(step_mats[w]);

    Eigen::VectorXd v;
    Eigen::MatrixXd frame;
    if (guided) {
      Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(d, d);
      for (const auto& m : steps) prod = m * prod;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(prod, Eigen::ComputeFullV);
      v = svd.matrixV().col(d - 1);
      Eigen::MatrixXd q = tangent_basis(v);
      Eigen::VectorXd pv = prod * v;
      Eigen::VectorXd w = pv.normalized();
      Eigen::MatrixXd dq = prod * q / pv.norm();
      dq -= w * (w.transpose() * dq);
      Eigen::JacobiSVD<Eigen::MatrixXd> dsvd(dq, Eigen::ComputeFullV);
      frame = q * dsvd.matrixV().leftCols(i);
    } else {
      v = gaussian_vector(rng, d).normalized();
      frame.resize(d, i);
      for (int j = 0; j < i; ++j) {
        Eigen::VectorXd g = gaussian_vector(rng, d);
        frame.col(j) = g - v * v.dot(g);
      }
    }
    SphSample sample = propagate_sphere_frame(steps, v, frame);
    outcomes[s] = {true, sample.value, std::move(word)};
  });

  RhoEstimate est;
  bool any = false;
  for (const auto& o : outcomes) {
    if (!o.accepted) {
      ++est.discarded;
      continue;
    }
    ++est.accepted;
    if (!any || o.value > est.value) {
      est.value = o.value;
      est.witness = o.word;
      any = true;
    }
  }
  return est;
}

double rho_upper_bound(const PwaMap& f, const Partition& partition, int i) {
  const int d = static_cast<int>(f.dim());
  if (i < 0 || i > d) throw Error(ErrorKind::dimension_mismatch, "rho_upper_bound: bad i");
  std::vector<double> per_cell(partition.cells.size(), 0.0);
  std::vector<char> singular(partition.cells.size(), 0);
  parallel_for(partition.cells.size(), [&](std::size_t c) {
    const RMat& lin = partition.cells[c].composed.linear;
    if (sgn(lin.determinant()) == 0) {
      singular[c] = 1;
      return;
    }
    Eigen::VectorXd sv = singular_values(to_eigen(lin));
    per_cell[c] = max_prefix(log_exterior_profile(sv), i) - i * std::log(sv[d - 1]);
  });
  if (std::any_of(singular.begin(), singular.end(), [](char s) { return s != 0; })) {
    throw Error(ErrorKind::singular_matrix, "rho_upper_bound needs invertible composed parts");
  }
  double best = 0.0;
  for (double v : per_cell) best = std::max(best, v);
  return best / partition.n;
}

double rho_sampled_slope(const PwaMap& f, const Partition& mid, const Partition& last, int i,
                         int samples, std::uint64_t seed) {
  const double hi = rho_sampled(f, last, i, samples, seed).value;
  if (mid.n >= last.n) return hi;
  const double lo = rho_sampled(f, mid, i, samples, seed).value;
  return (last.n * hi - mid.n * lo) / (last.n - mid.n);
}

RateReport rate_report(const PwaMap& f, const GrowthReport& growth, int samples, std::uint64_t seed) {
  RateReport rep = lambda_rates(f, growth.last);
  const int d = static_cast<int>(f.dim());
  if (d < 2 || !f.non_degenerate()) return rep;
  for (int i = 1; i < d; ++i) {
    rep.rho_bound.push_back(rho_upper_bound(f, growth.last, i));
    const double hi = rho_sampled(f, growth.last, i, samples, seed).value;
    rep.rho_sampled.push_back(hi);
    if (growth.mid.n > 0 && growth.mid.n < growth.last.n) {
      const double lo = rho_sampled(f, growth.mid, i, samples, seed).value;
      rep.rho_sampled_slope.push_back((growth.last.n * hi - growth.mid.n * lo) /
                                      (growth.last.n - growth.mid.n));
    } else {
      rep.rho_sampled_slope.push_back(hi);
    }
  }
  return rep;
}

BoundBreakdown entropy_upper_bound(const PwaMap& f, const GrowthReport& growth) {
  const Partition& z = growth.last;
  const int d = static_cast<int>(f.dim());
  BoundBreakdown b;
  b.n = z.n;
  RateReport rates = lambda_rates(f, z);
  b.lambda_plus = rates.lambda_plus;
  // H_mult >= 0 always; a finite-n slope below zero carries no information.
  b.mult_slope = std::max(0.0, growth.multiplicity.two_point_slope());
  double term = b.mult_slope;
  if (f.non_degenerate()) {
    double sum = 0.0;
    for (int i = 1; i < d; ++i) sum += rho_upper_bound(f, z, i);
    b.rho_sum = sum;
    term = std::min(term, sum);
  }
  if (std::isfinite(rates.lambda_min)) {
    b.conformal_gap = 0.5 * d * (d - 1) * (rates.lambda_max - rates.lambda_min);
    term = std::min(term, *b.conformal_gap);
  }
  b.multiplicity_term = std::max(0.0, term);
  b.total = b.lambda_plus + b.multiplicity_term;
  return b;
}

BoundBreakdown entropy_upper_bound(const PwaMap& f, int n, std::size_t cell_cap) {
  return entropy_upper_bound(f, growth_sequences(f, n, cell_cap));
}

}  // namespace pwaff
