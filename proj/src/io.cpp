#include "pwaff/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pwaff/errors.hpp"

namespace pwaff {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::parse_error, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

std::string text(const Json& j, const char* what) {
  if (!j.is_string()) bad(std::string("\"") + what + "\" must be a string");
  return j.get<std::string>();
}

Rat rat_from_json(const Json& j) {
  if (j.is_string()) return parse_rat(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<long>());
  bad("rational values must be strings such as \"-1/2\" or integers");
}

RVec vec_from_json(const Json& j, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) bad("expected an array of " + std::to_string(dim) + " rationals");
  RVec v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = rat_from_json(j[i]);
  return v;
}

RMat mat_from_json(const Json& j, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) bad("expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  RMat m(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    RVec row = vec_from_json(j[r], dim);
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = row[c];
  }
  return m;
}

Json vec_to_json(const RVec& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(format_rat(x));
  return out;
}

Json mat_to_json(const RMat& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(vec_to_json(m.row(r)));
  return out;
}

Json word_to_json(const Word& w) {
  Json out = Json::array();
  for (auto s : w) out.push_back(s);
  return out;
}

Json doubles(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

// JSON has no infinities; they are written as null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json series_to_json(const CountSeries& s) {
  Json counts = Json::array();
  for (const auto& [n, c] : s.counts) counts.push_back({{"n", n}, {"S", c}});
  return {{"counts", counts},
          {"two_point_slope", number(s.two_point_slope())},
          {"regression_slope", number(s.regression_slope())}};
}

Json stats_to_json(const SampleStats& s) {
  return {{"in_domain", s.in_domain},
          {"discarded", s.discarded},
          {"shadow_checked", s.shadow_checked},
          {"shadow_mismatches", s.shadow_mismatches}};
}

Json growth_seq_to_json(const GrowthSeq& g) {
  Json entries = Json::array();
  for (const auto& e : g.entries) entries.push_back({{"n", e.n}, {"value", e.value}, {"rate", e.rate}});
  return {{"entries", entries},
          {"last_rate", number(g.last_rate())},
          {"two_point_slope", number(g.two_point_slope())}};
}

}  // namespace

Json polytope_to_json(const Polytope& p) {
  Json cs = Json::array();
  for (const auto& h : p.constraints()) {
    cs.push_back({{"a", vec_to_json(h.normal)}, {"b", format_rat(h.offset)}, {"strict", h.strict}, {"sense", "le"}});
  }
  return {{"constraints", cs}};
}

Polytope polytope_from_json(const Json& j, std::size_t dim) {
  const Json& cs = field(j, "constraints");
  if (!cs.is_array()) bad("\"constraints\" must be an array");
  std::vector<HalfSpace> hs;
  for (const auto& c : cs) {
    HalfSpace h{vec_from_json(field(c, "a"), dim), rat_from_json(field(c, "b")), false};
    if (c.contains("strict")) {
      if (!c["strict"].is_boolean()) bad("\"strict\" must be a boolean");
      h.strict = c["strict"].get<bool>();
    }
    const std::string sense = c.contains("sense") ? text(c["sense"], "sense") : "le";
    if (sense == "ge") {
      h.normal *= Rat(-1);
      h.offset = -h.offset;
    } else if (sense != "le") {
      bad("constraint sense must be \"le\" or \"ge\", got \"" + sense + "\"");
    }
    hs.push_back(std::move(h));
  }
  return Polytope(dim, std::move(hs));
}

Json affine_to_json(const AffineMap& g) { return {{"A", mat_to_json(g.linear)}, {"b", vec_to_json(g.offset)}}; }

Json map_to_json(const PwaMap& f) {
  Json pieces = Json::array();
  for (const auto& p : f.pieces()) {
    Json g = affine_to_json(p.map);
    pieces.push_back({{"domain", polytope_to_json(p.domain)}, {"A", g["A"]}, {"b", g["b"]}});
  }
  return {{"dim", f.dim()}, {"ambient", polytope_to_json(f.ambient())}, {"pieces", pieces}};
}

PwaMap map_from_json(const Json& j) {
  const Json& dj = field(j, "dim");
  if (!dj.is_number_integer() || dj.get<long>() < 1) bad("\"dim\" must be a positive integer");
  const auto dim = static_cast<std::size_t>(dj.get<long>());
  Polytope ambient = polytope_from_json(field(j, "ambient"), dim);
  const Json& pj = field(j, "pieces");
  if (!pj.is_array() || pj.empty()) bad("\"pieces\" must be a non-empty array");
  std::vector<Piece> pieces;
  for (const auto& p : pj) {
    pieces.push_back({polytope_from_json(field(p, "domain"), dim),
                      AffineMap{mat_from_json(field(p, "A"), dim), vec_from_json(field(p, "b"), dim)}});
  }
  return PwaMap(std::move(ambient), std::move(pieces));
}

Json skew_to_json(const SkewProduct& sp) {
  Json base;
  if (sp.has_map_base()) {
    base = {{"type", "pwamap"}, {"map", map_to_json(sp.base_map())}};
  } else {
    base = {{"type", "shift"}, {"N", std::get<FullShift>(sp.base()).symbols}};
  }
  Json fibers = Json::array();
  for (const auto& f : sp.fibers()) fibers.push_back(map_to_json(f));
  return {{"base", base},
          {"fiber_space", polytope_to_json(sp.fiber_space())},
          {"fibers", fibers},
          {"assignment", sp.assignment()}};
}

SkewProduct skew_from_json(const Json& j) {
  const Json& bj = field(j, "base");
  const std::string type = text(field(bj, "type"), "type");
  std::variant<PwaMap, FullShift> base = FullShift{};
  if (type == "pwamap") {
    base = map_from_json(field(bj, "map"));
  } else if (type == "shift") {
    const Json& n = field(bj, "N");
    if (!n.is_number_integer()) bad("shift \"N\" must be an integer");
    base = FullShift{n.get<int>()};
  } else {
    bad("base type must be \"pwamap\" or \"shift\", got \"" + type + "\"");
  }
  const Json& fj = field(j, "fibers");
  if (!fj.is_array() || fj.empty()) bad("\"fibers\" must be a non-empty array");
  std::vector<PwaMap> fibers;
  for (const auto& f : fj) fibers.push_back(map_from_json(f));
  Polytope y = polytope_from_json(field(j, "fiber_space"), fibers.front().dim());
  const Json& aj = field(j, "assignment");
  if (!aj.is_array()) bad("\"assignment\" must be an array");
  std::vector<std::size_t> assignment;
  for (const auto& a : aj) {
    if (!a.is_number_integer() || a.get<long>() < 0) bad("assignment entries must be non-negative integers");
    assignment.push_back(static_cast<std::size_t>(a.get<long>()));
  }
  return SkewProduct(std::move(base), std::move(y), std::move(fibers), std::move(assignment));
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    bad(path + ": " + e.what());
  }
}

Json partition_to_json(const Partition& p) {
  Json cells = Json::array();
  for (const auto& c : p.cells) {
    cells.push_back({{"word", word_to_json(c.word)},
                     {"constraints", polytope_to_json(c.region)["constraints"]},
                     {"composed", affine_to_json(c.composed)}});
  }
  return cells;
}

Json growth_to_json(const GrowthReport& g) {
  return {{"cells", growth_seq_to_json(g.cells)}, {"multiplicity", growth_seq_to_json(g.multiplicity)}};
}

std::string growth_csv(const GrowthReport& g) {
  std::ostringstream out;
  out << "n,cells,max_mult\n";
  for (std::size_t i = 0; i < g.cells.entries.size(); ++i) {
    out << g.cells.entries[i].n << ',' << g.cells.entries[i].value << ',' << g.multiplicity.entries[i].value << '\n';
  }
  return out.str();
}

Json rates_to_json(const RateReport& r) {
  return {{"n", r.n},
          {"dim", r.dim},
          {"lambda_plus", number(r.lambda_plus)},
          {"lambda_max", number(r.lambda_max)},
          {"lambda_min", number(r.lambda_min)},
          {"lambda_plus_graded", doubles(r.lambda_plus_graded)},
          {"rho_bound", doubles(r.rho_bound)},
          {"rho_sampled", doubles(r.rho_sampled)},
          {"rho_sampled_slope", doubles(r.rho_sampled_slope)},
          {"witness_lambda_plus", word_to_json(r.witness_lambda_plus)},
          {"witness_lambda_max", word_to_json(r.witness_lambda_max)},
          {"witness_lambda_min", word_to_json(r.witness_lambda_min)}};
}

Json bound_to_json(const BoundBreakdown& b) {
  return {{"n", b.n},
          {"lambda_plus", number(b.lambda_plus)},
          {"mult_slope", number(b.mult_slope)},
          {"rho_sum", b.rho_sum ? number(*b.rho_sum) : Json(nullptr)},
          {"conformal_gap", b.conformal_gap ? number(*b.conformal_gap) : Json(nullptr)},
          {"multiplicity_term", number(b.multiplicity_term)},
          {"total", number(b.total)}};
}

Json entropy_to_json(const EntropyReport& r) {
  Json ladder = Json::array();
  for (const auto& c : r.ladder)
    ladder.push_back({{"eps", c.eps}, {"series", series_to_json(c.series)}, {"stats", stats_to_json(c.stats)}});
  Json sep = Json::array();
  for (const auto& s : r.separated)
    sep.push_back({{"eps", s.eps}, {"series", series_to_json(s.series)}, {"stats", stats_to_json(s.stats)}});
  return {{"covering", ladder},
          {"separated", sep},
          {"seeded_cells", r.seeded_cells},
          {"headline", number(r.headline)},
          {"lower_bound", number(r.lower_bound)},
          {"rates_bound", r.rates_bound ? bound_to_json(*r.rates_bound) : Json(nullptr)},
          {"upper_bound", number(r.upper_bound)},
          {"verdict", {number(r.verdict_lo), number(r.verdict_hi)}}};
}

std::string entropy_csv(const EntropyReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "kind,eps,n,S\n";
  for (const auto& c : r.ladder)
    for (const auto& [n, s] : c.series.counts) out << "covering," << c.eps << ',' << n << ',' << s << '\n';
  for (const auto& c : r.separated)
    for (const auto& [n, s] : c.series.counts) out << "separated," << c.eps << ',' << n << ',' << s << '\n';
  return out.str();
}

Json fiber_to_json(const FiberWordReport& r) {
  return {{"m", r.m},
          {"words", r.words},
          {"lambda_plus_fiber", number(r.lambda_plus_fiber)},
          {"mult_fiber", number(r.mult_fiber)},
          {"mult_fiber_slope", number(r.mult_fiber_slope)},
          {"mult_fiber_rate", number(r.mult_fiber_rate)},
          {"witness_lambda", word_to_json(r.witness_lambda)},
          {"witness_mult", word_to_json(r.witness_mult)}};
}

Json skew_bounds_to_json(const SkewBounds& b) {
  return {{"lower", number(b.lower)},
          {"upper", number(b.upper)},
          {"base_entropy", number(b.base_entropy)},
          {"base_mult_slope", number(b.base_mult_slope)},
          {"fiber", fiber_to_json(b.fiber)}};
}

Json fixture_to_json(const Fixture& fx) {
  Json out = {{"name", fx.name}, {"description", fx.description}};
  if (fx.skew) out["skew"] = skew_to_json(*fx.skew);
  if (fx.map) out["map"] = map_to_json(*fx.map);
  Json expected = Json::array();
  for (const auto& e : fx.expected) {
    Json x = {{"quantity", e.quantity},
              {"value", e.value},
              {"tolerance", e.tolerance},
              {"check", to_string(e.check)},
              {"provenance", to_string(e.provenance)},
              {"n", e.n > 0 ? e.n : fx.depth},
              {"note", e.note}};
    if (e.point) x["point"] = vec_to_json(*e.point);
    expected.push_back(std::move(x));
  }
  out["expected"] = expected;
  return out;
}

Json verify_to_json(const VerifyReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"quantity", c.expected.quantity},
                      {"n", c.expected.n},
                      {"check", to_string(c.expected.check)},
                      {"expected", c.expected.value},
                      {"tolerance", c.expected.tolerance},
                      {"provenance", to_string(c.expected.provenance)},
                      {"observed", number(c.observed)},
                      {"passed", c.passed},
                      {"detail", c.detail}});
  }
  return {{"fixture", r.fixture}, {"passed", r.passed()}, {"checks", checks}};
}

}  // namespace pwaff
