#pragma once

#include "perfectoid/aring.hpp"
#include "perfectoid/descent.hpp"
#include "perfectoid/perfseries.hpp"
#include "perfectoid/witt.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace perfectoid {

using Json = nlohmann::json;

// Every parser throws SchemaError with a path such as "$.coords[1].terms[0].e".

Json field_to_json(const Field& F);
FieldPtr field_from_json(const Json& j, const std::string& path = "$");

// {"p","f","modulus","scale","denom_bound","e_max","terms":[{"e","c"}],"prec"}; prec null when exact.
Json perfseries_to_json(const PerfSeries& a);
PerfSeries perfseries_from_json(const Json& j, const std::string& path = "$");

// {"N","coords":[<series>, ...]}
Json wittvec_to_json(const WittVec& x);
WittVec wittvec_from_json(const Json& j, const std::string& path = "$");

// {"p","N","window":[lo, hi],"coeffs":{"n": c}}; hi null when exact. p may come from the context.
Json aseries_to_json(const ASeries& a);
ASeries aseries_from_json(const Json& j, std::optional<std::int64_t> p = std::nullopt,
                          const std::string& path = "$");

// The description string when it parses back to the same element, else {"value","exact"}.
Json gamma_to_json(const GammaElt& g);
GammaElt gamma_from_json(const Json& j, std::int64_t p, const std::string& path = "$");

// {"e": <series>} keyed by component.
Json telt_to_json(const TElt& z);
TElt telt_from_json(const Json& j, std::optional<std::int64_t> p = std::nullopt, const std::string& path = "$");

// {"d","layer","gamma","A":[[...]],"G":[[...]]}; A-layer modules add "field" and "N".
Json module_to_json(const PhiGammaModule& M);
PhiGammaModule module_from_json(const Json& j, const std::string& path = "$");

Json wmat_to_json(const WMat& m);
Json amat_to_json(const AMat& m);
Json neglog_to_json(const NegLog& v);

Json split_to_json(const SplitResult& s);
Json good_basis_to_json(const GoodBasisResult& g);
Json descent_report_to_json(const DescentReport& r);

// Two-space indented, keys sorted.
std::string json_dump(const Json& j);
Json json_parse(const std::string& text, const std::string& what);

}  // namespace perfectoid
