// pwaff: command-line front end for the piecewise affine entropy toolkit.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "pwaff/catalog.hpp"
#include "pwaff/entropyest.hpp"
#include "pwaff/errors.hpp"
#include "pwaff/io.hpp"
#include "pwaff/parallel.hpp"
#include "pwaff/rates.hpp"
#include "pwaff/skew.hpp"
#include "pwaff/verify.hpp"

namespace fs = std::filesystem;
using namespace pwaff;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;  // verification or estimation did not succeed
constexpr int kExitInvalidMap = 2;
constexpr int kExitResource = 3;
constexpr int kExitUsage = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::resource_limit: return kExitResource;
    case ErrorKind::estimation_failed: return kExitFailed;
    default: return kExitInvalidMap;
  }
}

struct Common {
  std::string format = "table";
  std::string out;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::size_t cell_cap = default_cell_cap();
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
  cmd->add_option("--out", c.out, "Directory for artifact files");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--cell-cap", c.cell_cap, "Maximum number of cells per partition level (default from PWAFF_CELL_CAP or 2000000)")
      ->check(CLI::PositiveNumber);
}

// "@name" names a catalog fixture; anything else is a JSON file.
Fixture fixture_for(const std::string& name) {
  try {
    return fixture_by_name(name);
  } catch (const std::out_of_range&) {
    throw UsageError("unknown fixture \"" + name + "\"; see `pwaff catalog list`");
  }
}

PwaMap load_map(const std::string& source) {
  if (source.starts_with("@")) {
    Fixture fx = fixture_for(source.substr(1));
    if (!fx.map) throw Error(ErrorKind::invalid_map, "fixture " + fx.name + " has no piecewise affine map");
    return *fx.map;
  }
  Json j = read_json_file(source);
  if (j.is_object() && j.contains("base")) return flatten(skew_from_json(j));
  return map_from_json(j);
}

SkewProduct load_skew(const std::string& source) {
  if (source.starts_with("@")) {
    Fixture fx = fixture_for(source.substr(1));
    if (!fx.skew) throw Error(ErrorKind::invalid_map, "fixture " + fx.name + " is not a skew product");
    return *fx.skew;
  }
  return skew_from_json(read_json_file(source));
}

void write_file(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) return;
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + (fs::path(c.out) / name).string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

// ln value followed by the base-2 value.
std::string both_logs(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : "-inf";
  return fmt(x) + " (log2 " + fmt(x / std::log(2.0)) + ")";
}

void emit(const Common& c, const Json& j, const std::string& csv, const std::string& table) {
  if (c.format == "json") std::cout << dump(j);
  else if (c.format == "csv") std::cout << csv;
  else std::cout << table;
}

// ---------------------------------------------------------------------------

int cmd_partition(const Common& c, const std::string& source, int n) {
  PwaMap f = load_map(source);
  GrowthReport g = growth_sequences(f, n, c.cell_cap);
  Json part = partition_to_json(g.last);
  Json j = {{"n", n}, {"growth", growth_to_json(g)}, {"cells", part}};
  write_file(c, "partition.json", dump(part));
  write_file(c, "growth.csv", growth_csv(g));
  std::ostringstream t;
  t << "n  cells  max_mult\n";
  for (std::size_t i = 0; i < g.cells.entries.size(); ++i)
    t << g.cells.entries[i].n << "  " << g.cells.entries[i].value << "  " << g.multiplicity.entries[i].value << "\n";
  t << "H_sing slope " << both_logs(g.cells.two_point_slope()) << "\n";
  t << "H_mult slope " << both_logs(g.multiplicity.two_point_slope()) << "\n";
  emit(c, j, growth_csv(g), t.str());
  return kExitOk;
}

int cmd_rates(const Common& c, const std::string& source, int n, std::vector<int> is, int samples,
              std::uint64_t seed) {
  PwaMap f = load_map(source);
  GrowthReport g = growth_sequences(f, n, c.cell_cap);
  RateReport r = rate_report(f, g, samples, seed);
  BoundBreakdown b = entropy_upper_bound(f, g);
  const int d = static_cast<int>(f.dim());
  if (is.empty())
    for (int i = 1; i < d; ++i) is.push_back(i);
  for (int i : is)
    if (i < 1 || i >= std::max(d, 2)) throw UsageError("--i values must lie in 1..d-1");
  Json j = rates_to_json(r);
  j["h_bound"] = std::isfinite(b.total) ? Json(b.total) : Json(nullptr);
  write_file(c, "rates.json", dump(j));
  std::ostringstream csv, t;
  csv << "n,lambda_plus,lambda_max,lambda_min";
  for (int i : is) csv << ",rho_sampled_" << i << ",rho_slope_" << i << ",rho_bound_" << i;
  csv << ",h_bound\n" << r.n << ',' << r.lambda_plus << ',' << r.lambda_max << ',' << r.lambda_min;
  auto at = [](const std::vector<double>& v, int i) {
    return static_cast<std::size_t>(i - 1) < v.size() ? v[i - 1] : std::nan("");
  };
  for (int i : is)
    csv << ',' << at(r.rho_sampled, i) << ',' << at(r.rho_sampled_slope, i) << ',' << at(r.rho_bound, i);
  csv << ',' << b.total << "\n";
  t << "n           " << r.n << "\n";
  t << "lambda+     " << both_logs(r.lambda_plus) << "\n";
  t << "lambda_max  " << both_logs(r.lambda_max) << "\n";
  t << "lambda_min  " << both_logs(r.lambda_min) << "\n";
  for (int i : is) {
    t << "rho_" << i << "       sampled " << fmt(at(r.rho_sampled, i)) << "  slope " << fmt(at(r.rho_sampled_slope, i))
      << "  bound " << fmt(at(r.rho_bound, i)) << "\n";
  }
  t << "h bound     " << both_logs(b.total) << "\n";
  emit(c, j, csv.str(), t.str());
  return kExitOk;
}

int cmd_bound(const Common& c, const std::string& source, int n) {
  PwaMap f = load_map(source);
  BoundBreakdown b = entropy_upper_bound(f, n, c.cell_cap);
  Json j = bound_to_json(b);
  write_file(c, "bound.json", dump(j));
  std::ostringstream csv, t;
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); };
  csv << "n,lambda_plus,mult_slope,rho_sum,conformal_gap,multiplicity_term,total\n"
      << b.n << ',' << b.lambda_plus << ',' << b.mult_slope << ',' << opt(b.rho_sum) << ',' << opt(b.conformal_gap)
      << ',' << b.multiplicity_term << ',' << b.total << "\n";
  t << "n                  " << b.n << "\n"
    << "lambda+            " << both_logs(b.lambda_plus) << "\n"
    << "H_mult slope       " << fmt(b.mult_slope) << "\n"
    << "rho sum            " << opt(b.rho_sum) << "\n"
    << "conformal gap      " << opt(b.conformal_gap) << "\n"
    << "multiplicity term  " << fmt(b.multiplicity_term) << "\n"
    << "h <=               " << both_logs(b.total) << "\n";
  emit(c, j, csv.str(), t.str());
  return kExitOk;
}

int cmd_estimate(const Common& c, const std::string& source, EstimateConfig cfg) {
  PwaMap f = load_map(source);
  cfg.cell_cap = c.cell_cap;
  try {
    check_config(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  EntropyReport r = estimate(f, cfg);
  Json j = entropy_to_json(r);
  write_file(c, "estimate.json", dump(j));
  write_file(c, "counts.csv", entropy_csv(r));
  std::ostringstream t;
  t << "eps       covering slope (two-point / regression)\n";
  for (const auto& l : r.ladder)
    t << fmt(l.eps) << "  " << fmt(l.series.two_point_slope()) << " / " << fmt(l.series.regression_slope()) << "\n";
  for (const auto& s : r.separated)
    t << "separated eps " << fmt(s.eps) << "  slope " << fmt(s.series.two_point_slope()) << "\n";
  t << "headline  " << both_logs(r.headline) << "\n";
  t << "verdict   [" << fmt(r.verdict_lo) << ", " << (std::isfinite(r.verdict_hi) ? fmt(r.verdict_hi) : "inf")
    << "]\n";
  emit(c, j, entropy_csv(r), t.str());
  return kExitOk;
}

int cmd_skew_bound(const Common& c, const std::string& source, int n, int m) {
  SkewProduct sp = load_skew(source);
  EstimateConfig base;
  base.cell_cap = c.cell_cap;
  SkewBounds b = skew_entropy_bounds(sp, n, m, base);
  Json j = skew_bounds_to_json(b);
  write_file(c, "skew_bound.json", dump(j));
  std::ostringstream csv, t;
  csv << "lower,upper,base_entropy,base_mult_slope,lambda_plus_fiber,mult_fiber\n"
      << b.lower << ',' << b.upper << ',' << b.base_entropy << ',' << b.base_mult_slope << ','
      << b.fiber.lambda_plus_fiber << ',' << b.fiber.mult_fiber << "\n";
  t << "base entropy        " << both_logs(b.base_entropy) << "\n"
    << "base H_mult slope   " << fmt(b.base_mult_slope) << "\n"
    << "fiber lambda+       " << fmt(b.fiber.lambda_plus_fiber) << "  (" << b.fiber.words << " words of length "
    << b.fiber.m << ")\n"
    << "fiber H_mult        " << fmt(b.fiber.mult_fiber) << "\n"
    << "h in                [" << fmt(b.lower) << ", " << fmt(b.upper) << "]\n";
  emit(c, j, csv.str(), t.str());
  return kExitOk;
}

int cmd_catalog_list(const Common& c) {
  Json j = Json::array();
  std::ostringstream csv, t;
  csv << "name,kind,description\n";
  for (const auto& fx : all_fixtures()) {
    const std::string kind = fx.skew ? "skew" : "map";
    j.push_back({{"name", fx.name}, {"kind", kind}, {"description", fx.description}});
    csv << fx.name << ',' << kind << ",\"" << fx.description << "\"\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-26s %-5s %s\n", fx.name.c_str(), kind.c_str(), fx.description.c_str());
    t << line;
  }
  emit(c, j, csv.str(), t.str());
  return kExitOk;
}

int cmd_catalog_export(const Common& c, const std::string& name, bool skew, bool expected) {
  Fixture fx = fixture_for(name);
  Json j;
  if (expected) j = fixture_to_json(fx);
  else if (skew || !fx.map) {
    if (!fx.skew) throw UsageError("fixture " + fx.name + " is not a skew product");
    j = skew_to_json(*fx.skew);
  } else {
    j = map_to_json(*fx.map);
  }
  write_file(c, fx.name + ".json", dump(j));
  std::cout << dump(j);
  return kExitOk;
}

int cmd_verify(const Common& c, std::vector<std::string> names, const VerifyOptions& opt) {
  if (names.empty()) names = fixture_names();
  std::vector<Fixture> fixtures;
  for (const auto& n : names) fixtures.push_back(fixture_for(n));
  Json j = Json::array();
  std::ostringstream csv, t;
  csv << "fixture,quantity,n,check,expected,tolerance,observed,passed\n";
  bool all = true;
  for (const auto& fx : fixtures) {
    VerifyReport r = verify(fx, opt);
    all = all && r.passed();
    j.push_back(verify_to_json(r));
    t << (r.passed() ? "PASS " : "FAIL ") << r.fixture << "  (" << fmt(r.seconds) << " s)\n";
    for (const auto& ch : r.checks) {
      const int n = ch.expected.n > 0 ? ch.expected.n : fx.depth;
      csv << r.fixture << ',' << ch.expected.quantity << ',' << n << ',' << to_string(ch.expected.check) << ','
          << ch.expected.value << ',' << ch.expected.tolerance << ',' << ch.observed << ','
          << (ch.passed ? "true" : "false") << "\n";
      t << "  " << (ch.passed ? "ok   " : "FAIL ") << ch.expected.quantity << " n=" << n << " "
        << to_string(ch.expected.check) << " " << fmt(ch.expected.value) << " +- " << fmt(ch.expected.tolerance)
        << "  observed " << fmt(ch.observed) << "  [" << to_string(ch.expected.provenance) << "]";
      if (!ch.detail.empty()) t << "  " << ch.detail;
      t << "\n";
    }
  }
  write_file(c, "verify.json", dump(j));
  write_file(c, "verify.csv", csv.str());
  emit(c, j, csv.str(), t.str());
  return all ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact partitions, expansion rates and entropy bounds for piecewise affine maps.\n"
               "MAP arguments are JSON files or @name for a catalog fixture."};
  app.require_subcommand(1);
  Common common;

  std::string source;
  int n = 8;

  auto* partition = app.add_subcommand("partition", "Iterated continuity partition Z^n and growth counts");
  partition->add_option("map", source, "Map file or @fixture")->required();
  partition->add_option("-n,--n", n, "Partition depth")->check(CLI::PositiveNumber);
  add_common(partition, common);

  std::vector<int> is;
  int samples = 2000;
  std::uint64_t seed = 1;
  auto* rates = app.add_subcommand("rates", "Expansion and angular-expansion rates at depth n");
  rates->add_option("map", source, "Map file or @fixture")->required();
  rates->add_option("-n,--n", n, "Partition depth")->check(CLI::PositiveNumber);
  rates->add_option("--i", is, "Frame sizes i for the angular rates (default 1..d-1)");
  rates->add_option("--samples", samples, "Sampled frames per rate")->check(CLI::PositiveNumber);
  rates->add_option("--seed", seed, "Random seed");
  add_common(rates, common);

  auto* bound = app.add_subcommand("bound", "Entropy upper bound with its breakdown");
  bound->add_option("map", source, "Map file or @fixture")->required();
  bound->add_option("-n,--n", n, "Partition depth")->check(CLI::PositiveNumber);
  add_common(bound, common);

  EstimateConfig cfg;
  std::vector<double> ladder, sep_eps;
  int n_min = 0, n_max = 0, grid = 0, sep_n = 0, bound_n = -1, est_samples = 0;
  std::uint64_t est_seed = 0;
  auto* est = app.add_subcommand("estimate", "Direct entropy estimate from covering and separated counts");
  est->add_option("map", source, "Map file or @fixture (fixtures bring their own protocol)")->required();
  auto* o_ladder = est->add_option("--eps-ladder", ladder, "Covering scales")->delimiter(',');
  auto* o_nmin = est->add_option("--n-min", n_min, "Smallest orbit length")->check(CLI::PositiveNumber);
  auto* o_nmax = est->add_option("--n-max", n_max, "Largest orbit length")->check(CLI::PositiveNumber);
  auto* o_samples = est->add_option("--samples", est_samples, "Separated-set candidates")->check(CLI::PositiveNumber);
  auto* o_seed = est->add_option("--seed", est_seed, "Random seed");
  auto* o_grid = est->add_option("--grid", grid, "Covering samples per axis")->check(CLI::PositiveNumber);
  auto* o_sep = est->add_option("--sep-eps", sep_eps, "Separation scales")->delimiter(',');
  auto* o_sepn = est->add_option("--sep-n", sep_n, "Separated orbit length")->check(CLI::PositiveNumber);
  auto* o_boundn = est->add_option("--bound-n", bound_n, "Depth of the rates bound (0 skips it)")
                       ->check(CLI::NonNegativeNumber);
  add_common(est, common);

  int m = 4;
  auto* skew = app.add_subcommand("skew-bound", "Lower and upper entropy bounds for a skew product");
  skew->add_option("skew", source, "Skew-product file or @fixture")->required();
  skew->add_option("-n,--n", n, "Base partition depth")->check(CLI::PositiveNumber);
  skew->add_option("-m,--m", m, "Fiber word length")->check(CLI::PositiveNumber);
  add_common(skew, common);

  auto* catalog = app.add_subcommand("catalog", "Built-in fixtures");
  catalog->require_subcommand(1);
  auto* list = catalog->add_subcommand("list", "List fixture names");
  add_common(list, common);
  std::string name;
  bool as_skew = false, with_expected = false;
  auto* exp = catalog->add_subcommand("export", "Print a fixture's map definition");
  exp->add_option("name", name, "Fixture name")->required();
  exp->add_flag("--skew", as_skew, "Export the skew-product definition");
  exp->add_flag("--expected", with_expected, "Export definition and expected values");
  add_common(exp, common);

  std::vector<std::string> names;
  VerifyOptions vopt;
  auto* ver = app.add_subcommand("verify", "Check fixtures against their expected values");
  ver->add_option("names", names, "Fixture names (default: all)");
  ver->add_option("--samples", vopt.rho_samples, "Sampled frames for angular rates")->check(CLI::PositiveNumber);
  ver->add_option("--seed", vopt.seed, "Random seed");
  add_common(ver, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    set_worker_count(common.threads);
    if (*partition) return cmd_partition(common, source, n);
    if (*rates) return cmd_rates(common, source, n, is, samples, seed);
    if (*bound) return cmd_bound(common, source, n);
    if (*est) {
      if (source.starts_with("@")) cfg = fixture_for(source.substr(1)).estimate;
      if (o_ladder->count()) cfg.eps_ladder = ladder;
      if (o_nmin->count()) cfg.n_min = n_min;
      if (o_nmax->count()) cfg.n_max = n_max;
      if (o_samples->count()) cfg.samples = est_samples;
      if (o_seed->count()) cfg.seed = est_seed;
      if (o_grid->count()) cfg.grid_per_axis = grid;
      if (o_sep->count()) cfg.sep_eps = sep_eps;
      if (o_sepn->count()) cfg.sep_n = sep_n;
      if (o_boundn->count()) cfg.bound_n = bound_n;
      return cmd_estimate(common, source, cfg);
    }
    if (*skew) return cmd_skew_bound(common, source, n, m);
    if (*list) return cmd_catalog_list(common);
    if (*exp) return cmd_catalog_export(common, name, as_skew, with_expected);
    if (*ver) {
      vopt.cell_cap = common.cell_cap;
      return cmd_verify(common, names, vopt);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}
