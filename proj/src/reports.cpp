#include "levygibbs/reports.hpp"

namespace levygibbs {

using nlohmann::json;

void to_json(json& j, const CharFnSpec& s)
{
    j = json{{"tail_start", s.tail_start},
             {"product_cutoff", s.product_cutoff},
             {"weights", s.weights == WeightMode::Wiener ? "wiener" : "bm-loop"}};
    if (s.window_M)
        j["window_M"] = *s.window_M;
}

void to_json(json& j, const Axis& a) { j = json{{"min", a.min}, {"max", a.max}, {"n", a.n}}; }

void to_json(json& j, const InversionMeta& m)
{
    j = json{{"s_cutoff", m.s_cutoff},         {"t_cutoff", m.t_cutoff}, {"ds", m.ds},
             {"dt", m.dt},                     {"period_a", m.period_a}, {"period_b", m.period_b},
             {"truncation_error", m.truncation_error}, {"ringing", m.ringing}, {"envelope_C", m.envelope_C}};
}

void to_json(json& j, const PositivityReport& r)
{
    j = json{{"pass", r.pass},
             {"expected_zero_region", r.expected_zero_region},
             {"minimum", r.minimum},
             {"argmin", {r.min_a, r.min_b}},
             {"mirror_value", r.mirror_value},
             {"ringing_tolerance", r.ringing_tolerance},
             {"probed", r.probed},
             {"failing_nodes", r.failing_nodes.size()}};
}

void to_json(json& j, const ConditioningSpec& s) { j = json{{"a", s.a}, {"b", s.b}, {"epsilon", s.epsilon}}; }

void to_json(json& j, const Provenance& p)
{
    j = json{{"seed", p.seed},         {"stream", p.stream}, {"attempts", p.attempts},
             {"accepted", p.accepted}, {"acceptance_rate", p.acceptance_rate},
             {"method", p.method},     {"cutoff", p.cutoff}, {"batch", p.batch}};
}

void to_json(json& j, const SweepTable& t)
{
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"epsilon", r.epsilon},
                        {"mean", r.mean},
                        {"se", r.se},
                        {"acceptance_rate", r.acceptance_rate},
                        {"count", r.count}});
    j = json{{"rows", rows}, {"extrapolated", t.extrapolated}, {"extrapolated_se", t.extrapolated_se},
             {"c", t.c},     {"q", t.q}};
}

void to_json(json& j, const GibbsSpec& s)
{
    j = json{{"p", s.p},
             {"sign", to_string(s.sign)},
             {"mass_a", s.mass_a},
             {"momentum_b", s.momentum_b},
             {"epsilon", s.epsilon}};
}

void to_json(json& j, const PartitionEstimate& e)
{
    j = json{{"Z", e.Z}, {"ci", e.ci}, {"se", e.se}, {"ess", e.ess}};
}

void to_json(json& j, const WeightedEstimate& e)
{
    j = json{{"value", e.value}, {"ci", e.ci}, {"se", e.se}, {"ess", e.ess}};
}

void to_json(json& j, const TailReport& r)
{
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"level", p.level},
                       {"survival", p.survival},
                       {"se", p.se},
                       {"exceedances", p.exceedances},
                       {"envelope", p.envelope},
                       {"below_envelope", p.below_envelope},
                       {"gibbs_survival", p.gibbs_survival}});
    j = json{{"quantity", r.quantity}, {"exponent", r.exponent}, {"C", r.C},
             {"c", r.c},               {"r2", r.r2},             {"slope", r.slope},
             {"slope_se", r.slope_se}, {"points", pts},          {"monotone", r.monotone},
             {"verdict", r.verdict},   {"samples", r.samples},   {"low_mode_violations", r.low_mode_violations}};
}

void to_json(json& j, const DyadicDiagnostic& d)
{
    json blocks = json::array();
    for (const auto& b : d.blocks)
        blocks.push_back({{"j", b.j},
                          {"lo", b.lo},
                          {"hi", b.hi},
                          {"sigma", b.sigma},
                          {"mass", b.mass},
                          {"threshold", b.threshold},
                          {"flagged", b.flagged}});
    j = json{{"M0", d.M0},
             {"sobolev_floor_active", d.sobolev_floor_active},
             {"low_integral", d.low_integral},
             {"low_exceeds", d.low_exceeds},
             {"total_integral", d.total_integral},
             {"blocks", blocks},
             {"any_flagged", d.any_flagged},
             {"sigma_sum", d.sigma_sum}};
}

void to_json(json& j, const LargeDeviationReport& r)
{
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"R", p.R},
                       {"epsilon", p.epsilon},
                       {"survival", p.survival},
                       {"se", p.se},
                       {"oracle", p.oracle},
                       {"envelope", p.envelope},
                       {"below_envelope", p.below_envelope},
                       {"ess", p.ess}});
    j = json{{"window_M", r.window_M},       {"window_N", r.window_N}, {"points", pts},
             {"fitted_C", r.fitted_C},       {"shared_C", r.shared_C}, {"C_spread", r.C_spread},
             {"oracle_match", r.oracle_match}, {"verdict", r.verdict}};
}

void to_json(json& j, const FlowSpec& s)
{
    j = json{{"p", s.p},
             {"sign", to_string(s.sign)},
             {"galerkin_cutoff", s.galerkin_cutoff},
             {"dt", s.dt},
             {"T", s.T},
             {"splitting", "strang"},
             {"nonlinear", to_string(s.nonlinear)},
             {"stability_c", s.stability_c},
             {"linear_only", s.linear_only},
             {"grid_size", s.work_grid()}};
}

void to_json(json& j, const ConservationTrace& t)
{
    j = json{{"t", t.t},
             {"mass", t.mass},
             {"momentum", t.momentum},
             {"hamiltonian", t.hamiltonian},
             {"mass_max_rel", t.mass_max_rel()},
             {"momentum_max_abs", t.momentum_max_abs()},
             {"energy_max_rel", t.energy_max_rel()}};
}

void to_json(json& j, const InvarianceReport& r)
{
    json obs = json::array();
    for (const auto& o : r.observables)
        obs.push_back({{"name", o.name}, {"ks", o.ks}, {"threshold", o.threshold}, {"pass", o.pass}});
    j = json{{"observables", obs},
             {"drift",
              {{"mass_max_rel", r.mass_max_rel},
               {"momentum_max_abs", r.momentum_max_abs},
               {"energy_max_rel", r.energy_max_rel}}},
             {"ess", r.ess},
             {"samples", r.samples},
             {"verdict", r.verdict}};
}

void to_json(json& j, const LevyProbeReport& r)
{
    j = json{{"K", r.K},
             {"max_drift", r.max_drift},
             {"mean_drift", r.mean_drift},
             {"max_mismatch", r.max_mismatch},
             {"rule_spread", r.rule_spread},
             {"tolerance", r.tolerance},
             {"verdict", r.verdict},
             {"samples", r.momentum_drift.size()}};
}

} // namespace levygibbs
