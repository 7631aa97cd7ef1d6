#pragma once

#include "levygibbs/conditioner.hpp"
#include "levygibbs/density_kernel.hpp"
#include "levygibbs/gibbs_weight.hpp"
#include "levygibbs/nls_flow.hpp"

#include <json.hpp>

// nlohmann::json conversions, found by ADL: `nlohmann::json j = report;`
namespace levygibbs {

void to_json(nlohmann::json& j, const CharFnSpec& s);
void to_json(nlohmann::json& j, const Axis& a);
void to_json(nlohmann::json& j, const InversionMeta& m);
void to_json(nlohmann::json& j, const PositivityReport& r);
void to_json(nlohmann::json& j, const ConditioningSpec& s);
void to_json(nlohmann::json& j, const Provenance& p);
void to_json(nlohmann::json& j, const SweepTable& t);
void to_json(nlohmann::json& j, const GibbsSpec& s);
void to_json(nlohmann::json& j, const PartitionEstimate& e);
void to_json(nlohmann::json& j, const WeightedEstimate& e);
void to_json(nlohmann::json& j, const TailReport& r);
void to_json(nlohmann::json& j, const DyadicDiagnostic& d);
void to_json(nlohmann::json& j, const LargeDeviationReport& r);
void to_json(nlohmann::json& j, const FlowSpec& s);
void to_json(nlohmann::json& j, const ConservationTrace& t);
void to_json(nlohmann::json& j, const InvarianceReport& r);
void to_json(nlohmann::json& j, const LevyProbeReport& r);

} // namespace levygibbs
