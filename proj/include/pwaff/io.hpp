#pragma once

// JSON and CSV forms of maps, skew products, partitions and reports.
// Rationals travel as exact "p/q" strings; reports carry doubles.

#include <string>

#include "json.hpp"

#include "pwaff/catalog.hpp"
#include "pwaff/entropyest.hpp"
#include "pwaff/pwamap.hpp"
#include "pwaff/rates.hpp"
#include "pwaff/skew.hpp"
#include "pwaff/verify.hpp"

namespace pwaff {

using Json = nlohmann::ordered_json;

/// {"constraints":[{"a":[...],"b":"...","strict":bool,"sense":"le"},...]}
Json polytope_to_json(const Polytope& p);
/// Accepts sense "le" (a.x <= b) or "ge" (a.x >= b). Throws Error{parse_error}.
Polytope polytope_from_json(const Json& j, std::size_t dim);

Json affine_to_json(const AffineMap& g);

/// {"dim":d,"ambient":{...},"pieces":[{"domain":{...},"A":[[...]],"b":[...]},...]}
Json map_to_json(const PwaMap& f);
/// Throws Error{parse_error} for malformed input and Error{invalid_map} when
/// the definition breaks a map invariant.
PwaMap map_from_json(const Json& j);

/// {"base":{"type":"pwamap","map":...}|{"type":"shift","N":k},
///  "fiber_space":{...},"fibers":[...],"assignment":[...]}
Json skew_to_json(const SkewProduct& sp);
SkewProduct skew_from_json(const Json& j);

/// Reads a whole file and parses it as JSON. Throws Error{parse_error}.
Json read_json_file(const std::string& path);

/// List of {word, constraints, composed:{A,b}} in word order.
Json partition_to_json(const Partition& p);
Json growth_to_json(const GrowthReport& g);
/// n,cells,max_mult
std::string growth_csv(const GrowthReport& g);

Json rates_to_json(const RateReport& r);
Json bound_to_json(const BoundBreakdown& b);

Json entropy_to_json(const EntropyReport& r);
/// kind,eps,n,S with kind covering or separated.
std::string entropy_csv(const EntropyReport& r);

Json fiber_to_json(const FiberWordReport& r);
Json skew_bounds_to_json(const SkewBounds& b);

Json fixture_to_json(const Fixture& fx);
/// Timing is left out so that the output depends only on the inputs.
Json verify_to_json(const VerifyReport& r);

}  // namespace pwaff
