#include "pwaff/verify.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <memory>

#include "pwaff/entropyest.hpp"
#include "pwaff/errors.hpp"
#include "pwaff/rates.hpp"
#include "pwaff/skew.hpp"

namespace pwaff {

bool VerifyReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

bool evaluate_check(const Expectation& e, double observed, double verdict_lo, double verdict_hi) {
  switch (e.check) {
    case Check::near: return std::abs(observed - e.value) <= e.tolerance;
    case Check::at_most: return observed <= e.value + e.tolerance;
    case Check::at_least: return observed >= e.value - e.tolerance;
    case Check::in_verdict:
      return verdict_lo - e.tolerance <= e.value && e.value <= verdict_hi + e.tolerance;
  }
  return false;
}

namespace {

// Lazily computed pipeline results for one fixture.
class Context {
 public:
  Context(const Fixture& fx, const VerifyOptions& opt) : fx_(fx), opt_(opt) {}

  const PwaMap& map() const {
    if (!fx_.map) throw Error(ErrorKind::invalid_map, "fixture has no piecewise affine map");
    return *fx_.map;
  }

  const GrowthReport& growth(int n) {
    auto& slot = growth_[n];
    if (!slot) slot = std::make_unique<GrowthReport>(growth_sequences(map(), n, opt_.cell_cap));
    return *slot;
  }

  const Partition& partition(int n) {
    for (auto& [depth, g] : growth_) {
      if (g && g->last.n == n) return g->last;
      if (g && g->mid.n == n) return g->mid;
    }
    return growth(n).last;
  }

  // Lambda values at depth n; deep partitions are streamed rather than held.
  const RateReport& rates(int n) {
    auto& slot = rates_[n];
    if (!slot) {
      const Partition* cached = nullptr;
      for (auto& [depth, g] : growth_) {
        if (g && g->last.n == n) cached = &g->last;
        if (g && g->mid.n == n) cached = &g->mid;
      }
      slot = std::make_unique<RateReport>(cached ? lambda_rates(map(), *cached)
                                                 : lambda_rates_at_depth(map(), n, 10, opt_.cell_cap));
    }
    return *slot;
  }

  const EntropyReport& entropy() {
    if (!entropy_) entropy_ = std::make_unique<EntropyReport>(estimate(map(), fx_.estimate));
    return *entropy_;
  }

  const SkewBounds& skew() {
    if (!fx_.skew) throw Error(ErrorKind::invalid_map, "fixture is not a skew product");
    if (!skew_) skew_ = std::make_unique<SkewBounds>(skew_entropy_bounds(*fx_.skew, fx_.depth, fx_.fiber_m, EstimateConfig{}));
    return *skew_;
  }

  const VerifyOptions& options() const { return opt_; }

 private:
  const Fixture& fx_;
  const VerifyOptions& opt_;
  std::map<int, std::unique_ptr<GrowthReport>> growth_;
  std::map<int, std::unique_ptr<RateReport>> rates_;
  std::unique_ptr<EntropyReport> entropy_;
  std::unique_ptr<SkewBounds> skew_;
};

double observe(Context& ctx, const Expectation& e, int n, double& lo, double& hi) {
  const std::string& q = e.quantity;
  if (q == "pieces") return static_cast<double>(ctx.map().pieces().size());
  if (q == "cells") return static_cast<double>(ctx.partition(n).size());
  if (q == "mult_at") {
    if (!e.point) throw Error(ErrorKind::parse_error, "mult_at needs a point");
    return static_cast<double>(multiplicity_at(ctx.partition(n), *e.point));
  }
  if (q == "max_mult") return static_cast<double>(ctx.growth(n).multiplicity.entries.back().value);
  if (q == "h_sing") return ctx.growth(n).cells.two_point_slope();
  if (q == "h_mult") return ctx.growth(n).multiplicity.two_point_slope();
  if (q == "lambda_plus") return ctx.rates(n).lambda_plus;
  if (q == "lambda_max") return ctx.rates(n).lambda_max;
  if (q == "lambda_min") return ctx.rates(n).lambda_min;
  if (q == "rho_1") {
    const GrowthReport& g = ctx.growth(n);
    return rho_sampled_slope(ctx.map(), g.mid, g.last, 1, ctx.options().rho_samples, ctx.options().seed);
  }
  if (q == "bound") return entropy_upper_bound(ctx.map(), ctx.growth(n)).total;
  if (q == "entropy") {
    const EntropyReport& r = ctx.entropy();
    lo = r.verdict_lo;
    hi = r.verdict_hi;
    return r.headline;
  }
  if (q == "entropy_headline") return ctx.entropy().headline;
  if (q == "skew_lower") return ctx.skew().lower;
  if (q == "skew_upper") return ctx.skew().upper;
  if (q == "fiber_lambda") return ctx.skew().fiber.lambda_plus_fiber;
  if (q == "fiber_mult") return ctx.skew().fiber.mult_fiber;
  throw Error(ErrorKind::parse_error, "unknown quantity " + q);
}

}  // namespace

VerifyReport verify(const Fixture& fx, const VerifyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  VerifyReport rep;
  rep.fixture = fx.name;
  Context ctx(fx, options);
  for (const auto& e : fx.expected) {
    CheckResult r;
    r.expected = e;
    const int n = e.n > 0 ? e.n : fx.depth;
    double lo = 0.0, hi = 0.0;
    try {
      r.observed = observe(ctx, e, n, lo, hi);
      r.passed = evaluate_check(e, r.observed, lo, hi);
      if (e.check == Check::in_verdict)
        r.detail = "verdict [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = ex.what();
    }
    rep.checks.push_back(std::move(r));
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace pwaff
