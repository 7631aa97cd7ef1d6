#include "cli.hpp"

#include "levygibbs/conditioner.hpp"
#include "levygibbs/density_kernel.hpp"
#include "levygibbs/error.hpp"
#include "levygibbs/gibbs_weight.hpp"
#include "levygibbs/io.hpp"
#include "levygibbs/nls_flow.hpp"
#include "levygibbs/parallel.hpp"
#include "levygibbs/reports.hpp"
#include "levygibbs/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

namespace levygibbs::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

class AuditFailure : public Error
{
public:
    using Error::Error;
};

// One output directory per run; the manifest is written before any result
// and rewritten at the end with the hash of every output.
class Run
{
public:
    Run(fs::path dir, std::string command, std::string config, std::uint64_t seed)
      : dir_(std::move(dir))
    {
        fs::create_directories(dir_);
        manifest_ = {{"command", command}, {"version", kVersion}, {"seed", seed}, {"config", config},
                     {"workers", worker_count()},  {"status", "running"}, {"outputs", json::array()}};
        flush();
    }

    fs::path path(const std::string& name)
    {
        names_.push_back(name);
        return dir_ / name;
    }

    void result(const std::string& key, json value) { manifest_["results"][key] = std::move(value); }

    void finish()
    {
        json outs = json::array();
        for (const auto& n : names_)
            outs.push_back({{"file", n}, {"fnv1a", io::fnv1a_file(dir_ / n)}});
        manifest_["outputs"] = outs;
        manifest_["status"] = "complete";
        flush();
    }

    void write_json(const std::string& name, const json& j)
    {
        std::ofstream(path(name)) << j.dump(2) << '\n';
    }

private:
    void flush() { std::ofstream(dir_ / "manifest.json") << manifest_.dump(2) << '\n'; }

    fs::path dir_;
    json manifest_;
    std::vector<std::string> names_;
};

struct Common
{
    std::string out;
    unsigned workers = 0;
    std::uint64_t seed = 1;
};

struct EnsembleOpts
{
    std::string load;
    std::size_t n = 1000;
    int cutoff = 128;
    std::uint64_t stream = 0;
    std::optional<double> a, b, eps;
    std::uint64_t max_attempts = 400'000'000;
    bool fallback = false;
};

void add_ensemble_options(CLI::App* sub, EnsembleOpts& o, bool allow_load)
{
    if (allow_load)
        sub->add_option("--ensemble", o.load, "read the ensemble from a .lgen file instead of sampling");
    sub->add_option("--n", o.n, "number of fields")->capture_default_str();
    sub->add_option("--cutoff", o.cutoff, "Fourier cutoff N")->capture_default_str();
    sub->add_option("--stream", o.stream, "substream id")->capture_default_str();
    sub->add_option("--a", o.a, "conditioning: mass centre");
    sub->add_option("--b", o.b, "conditioning: momentum centre (default 0)");
    sub->add_option("--eps", o.eps, "conditioning: window half width");
    sub->add_option("--max-attempts", o.max_attempts, "rejection budget")->capture_default_str();
    sub->add_flag("--fallback", o.fallback, "reweight instead of failing when the budget runs out");
}

std::optional<ConditioningSpec> conditioning(const EnsembleOpts& o)
{
    if (!o.a && !o.eps && !o.b)
        return std::nullopt;
    if (!o.a)
        throw ConfigError("ConditioningSpec: --a (mass centre) is required when --eps or --b is given");
    if (!o.eps)
        throw ConfigError("ConditioningSpec: --eps (window half width) is required when --a is given");
    ConditioningSpec s{*o.a, o.b.value_or(0.0), *o.eps};
    s.validate();
    return s;
}

Ensemble obtain_ensemble(const EnsembleOpts& o, const Common& c)
{
    if (!o.load.empty()) {
        auto e = io::read_ensemble(o.load);
        const auto want = conditioning(o);
        if (want && (!e.spec || !(*e.spec == *want)))
            throw MismatchedSpec("ensemble file was conditioned on a different (a, b, eps)");
        return e;
    }
    SamplerConfig cfg;
    cfg.cutoff = o.cutoff;
    cfg.seed = c.seed;
    cfg.stream_id = o.stream;
    const auto spec = conditioning(o);
    if (!spec)
        return sample_unconditioned(o.n, cfg);
    RejectionOptions ro;
    ro.max_attempts = o.max_attempts;
    ro.fallback = o.fallback;
    return sample_conditioned(*spec, o.n, cfg, ro);
}

json ensemble_summary(const Ensemble& e)
{
    json j = {{"size", e.size()}, {"provenance", e.provenance}, {"conditioning_holds", e.conditioning_holds()}};
    if (e.spec)
        j["conditioning"] = *e.spec;
    return j;
}

std::string out_dir(const Common& c, const std::string& command)
{
    if (!c.out.empty())
        return c.out;
    if (const char* env = std::getenv("LEVYGIBBS_OUT"))
        return (fs::path(env) / command).string();
    return (fs::path("levygibbs-out") / command).string();
}

int audit(const fs::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in)
        throw AuditFailure("no manifest.json in " + dir.string());
    const json m = json::parse(in);
    std::set<std::string> listed;
    bool ok = m.value("status", "") == "complete";
    if (!ok)
        std::cout << "FAIL manifest status is " << m.value("status", "missing") << '\n';
    for (const auto& o : m.at("outputs")) {
        const std::string f = o.at("file");
        listed.insert(f);
        if (!fs::exists(dir / f)) {
            std::cout << "FAIL missing output " << f << '\n';
            ok = false;
        } else if (io::fnv1a_file(dir / f) != o.at("fnv1a").get<std::string>()) {
            std::cout << "FAIL hash mismatch " << f << '\n';
            ok = false;
        }
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name != "manifest.json" && !listed.count(name)) {
            std::cout << "FAIL orphan output " << name << '\n';
            ok = false;
        }
    }
    if (!ok)
        throw AuditFailure("audit failed for " + dir.string());
    std::cout << "PASS audit " << dir.string() << " (" << listed.size() << " outputs)\n";
    return kOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args)
{
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv)
{
    CLI::App app{"Gibbs measures conditioned on mass and Levy area: sampling, densities, tails, NLS flow"};
    app.set_config("--config", "", "TOML configuration; command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--out", common.out, "output directory (default $LEVYGIBBS_OUT/<command>)");
    app.add_option("--workers", common.workers, "worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--seed", common.seed, "root seed")->capture_default_str();

    // sample
    auto* sample = app.add_subcommand("sample", "draw a Wiener ensemble, optionally conditioned on (a, b, eps)");
    EnsembleOpts sample_o;
    std::vector<std::string> sample_obs{"mass", "momentum", "l4", "hs_quarter"};
    add_ensemble_options(sample, sample_o, false);
    sample->add_option("--observables", sample_obs, "observables written to observables.csv");

    // density
    auto* density = app.add_subcommand("density", "invert the characteristic function onto a grid");
    CharFnSpec dspec;
    Axis dax = default_a_axis(), dbx = default_b_axis();
    InversionOptions dopt;
    std::optional<long> window_M;
    bool bm_mode = false, conv_check = false, csv = false;
    std::string marginal;
    std::optional<std::vector<double>> positivity;
    density->add_option("--tail-start", dspec.tail_start, "drop modes with |n - M| < tail-start")->capture_default_str();
    density->add_option("--product-cutoff", dspec.product_cutoff)->capture_default_str();
    density->add_option("--window-M", window_M, "centre M of the excluded window");
    density->add_flag("--bm-mode", bm_mode, "Brownian-loop weights 1/(2 pi n)^2");
    density->add_option("--a-min", dax.min)->capture_default_str();
    density->add_option("--a-max", dax.max)->capture_default_str();
    density->add_option("--a-n", dax.n)->capture_default_str();
    density->add_option("--b-min", dbx.min)->capture_default_str();
    density->add_option("--b-max", dbx.max)->capture_default_str();
    density->add_option("--b-n", dbx.n)->capture_default_str();
    density->add_option("--tolerance", dopt.tolerance)->capture_default_str();
    density->add_option("--s-cutoff", dopt.s_cutoff, "0 = automatic")->capture_default_str();
    density->add_option("--t-cutoff", dopt.t_cutoff, "0 = automatic")->capture_default_str();
    density->add_flag("--convolution-check", conv_check, "with --tail-start 1: rebuild f_0 by convolution");
    density->add_option("--marginal", marginal, "momentum: tabulate the momentum marginal")
        ->check(CLI::IsMember({"momentum"}));
    density->add_option("--positivity", positivity, "a_min a_max b_lo b_hi: positivity report")->expected(4);
    density->add_flag("--csv", csv, "also write density.csv");

    // condition-sweep
    auto* sweep = app.add_subcommand("condition-sweep", "conditioned means over shrinking eps, extrapolated to 0");
    EnsembleOpts sweep_o;
    sweep_o.n = 2000;
    std::vector<double> eps_list{0.4, 0.2, 0.1};
    std::vector<std::string> sweep_obs{"mass", "momentum"};
    add_ensemble_options(sweep, sweep_o, false);
    sweep->add_option("--eps-list", eps_list, "strictly decreasing")->capture_default_str();
    sweep->add_option("--observables", sweep_obs)->capture_default_str();

    // gibbs
    auto* gibbs = app.add_subcommand("gibbs", "partition function and Gibbs expectations");
    EnsembleOpts gibbs_o;
    GibbsSpec gspec;
    bool focusing = false;
    std::vector<std::string> gibbs_obs{"l4", "hs_quarter", "mass"};
    add_ensemble_options(gibbs, gibbs_o, true);
    gibbs->add_option("--p", gspec.p)->capture_default_str();
    gibbs->add_flag("--focusing,!--defocusing", focusing, "sign of the nonlinearity (default defocusing)");
    gibbs->add_option("--observables", gibbs_obs)->capture_default_str();

    // tails
    auto* tails = app.add_subcommand("tails", "tail envelopes: L^p, H^s and window large deviations");
    EnsembleOpts tails_o;
    GibbsSpec tspec;
    bool tfocusing = false;
    std::optional<double> hs_s;
    std::optional<long> ld_N, ld_M;
    std::vector<double> ld_R, ld_eps;
    std::size_t ld_samples = 40000;
    add_ensemble_options(tails, tails_o, true);
    tails->add_option("--p", tspec.p)->capture_default_str();
    tails->add_flag("--focusing,!--defocusing", tfocusing);
    tails->add_option("--hs", hs_s, "also check the H^s tail at this s < 1/2");
    tails->add_option("--window-N", ld_N, "large deviation of a window of 2N+1 modes (no ensemble needed)");
    tails->add_option("--window-M", ld_M, "window centre (default N)");
    tails->add_option("--R", ld_R, "radii (default 5, 6, 7 x sqrt N)");
    tails->add_option("--ld-eps", ld_eps, "conditioned runs at these eps (needs --a)");
    tails->add_option("--ld-samples", ld_samples)->capture_default_str();

    // evolve / invariance share flow options
    FlowSpec flow;
    std::optional<int> flow_N;
    std::string nonlinear = "galerkin";
    bool ffocusing = false;
    auto add_flow = [&](CLI::App* sub) {
        sub->add_option("--p", flow.p)->capture_default_str();
        sub->add_flag("--focusing,!--defocusing", ffocusing);
        sub->add_option("--dt", flow.dt)->capture_default_str();
        sub->add_option("--T", flow.T)->capture_default_str();
        sub->add_option("--galerkin-cutoff", flow_N, "default: ensemble cutoff");
        sub->add_option("--nonlinear", nonlinear)->check(CLI::IsMember({"galerkin", "pointwise"}))->capture_default_str();
        sub->add_option("--stability-c", flow.stability_c)->capture_default_str();
        sub->add_flag("--linear-only", flow.linear_only);
    };
    auto* evolve_cmd = app.add_subcommand("evolve", "push an ensemble through the truncated NLS flow");
    EnsembleOpts evolve_o;
    evolve_o.n = 16;
    evolve_o.cutoff = 64;
    long stride = 10;
    add_ensemble_options(evolve_cmd, evolve_o, true);
    add_flow(evolve_cmd);
    evolve_cmd->add_option("--stride", stride, "trace stride in steps")->capture_default_str();

    auto* inv = app.add_subcommand("invariance", "weighted KS test of the flow against the Gibbs measure");
    EnsembleOpts inv_o;
    inv_o.n = 2000;
    inv_o.cutoff = 64;
    InvarianceOptions iopt;
    add_ensemble_options(inv, inv_o, true);
    add_flow(inv);
    inv->add_option("--permutations", iopt.permutations)->capture_default_str();
    inv->add_option("--observables", iopt.observables)->capture_default_str();

    auto* audit_cmd = app.add_subcommand("audit", "check a run directory against its manifest");
    std::string audit_dir;
    audit_cmd->add_option("dir", audit_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        set_worker_count(common.workers);
        if (audit_cmd->parsed())
            return audit(audit_dir);

        const auto* sub = app.get_subcommands().front();
        bool all_pass = true;
        auto verdict = [&](bool ok) {
            all_pass = all_pass && ok;
            return ok ? "PASS" : "FAIL";
        };
        Run run(out_dir(common, sub->get_name()), sub->get_name(), app.config_to_str(false, false), common.seed);

        if (sample->parsed()) {
            const auto e = obtain_ensemble(sample_o, common);
            io::write_ensemble(run.path("ensemble.lgen"), e);
            io::write_observables_csv(run.path("observables.csv"), e, sample_obs);
            run.result("ensemble", ensemble_summary(e));
            std::cout << "sampled " << e.size() << " fields";
            if (e.spec)
                std::cout << ", acceptance rate " << e.provenance.acceptance_rate;
            std::cout << '\n';
        } else if (density->parsed()) {
            dspec.window_M = window_M;
            dspec.weights = bm_mode ? WeightMode::BrownianLoop : WeightMode::Wiener;
            dspec.validate();
            if (!marginal.empty()) {
                const auto md = marginal_momentum_density(dspec, dbx);
                const double k = fit_sech2_scale(md.b, md.values);
                std::ofstream out(run.path("marginal.csv"));
                out.precision(17);
                out << "b,density,sech2,difference\n";
                double sup = 0;
                for (std::size_t j = 0; j < md.b.n; ++j) {
                    const double x = md.b.at(j), s = sech2_density(x, k);
                    sup = std::max(sup, std::abs(md.values[j] - s));
                    out << x << ',' << md.values[j] << ',' << s << ',' << md.values[j] - s << '\n';
                }
                run.result("marginal", {{"fitted_scale", k}, {"sup_difference", sup}, {"integral", md.integral()},
                                        {"t_cutoff", md.t_cutoff}});
                std::cout << "momentum marginal: fitted scale " << k << ", sup |f - sech2| = " << sup << '\n';
            } else {
                const auto grid = invert_density(dspec, dax, dbx, dopt);
                io::write_density_grid(run.path("density.lgdg"), grid);
                if (csv)
                    io::write_density_csv(run.path("density.csv"), grid);
                const double I = grid.integral();
                json r = {{"spec", dspec},          {"a_axis", dax},
                          {"b_axis", dbx},          {"meta", grid.meta()},
                          {"integral", I},          {"symmetry_defect", grid.symmetry_defect()},
                          {"minimum", grid.min_value()}};
                std::clog << "normalization " << I << " (|1 - I| = " << std::abs(1 - I) << ")\n";
                if (positivity) {
                    const auto& p = *positivity;
                    const auto pr = positivity_report(grid, p[0], p[1], p[2], p[3]);
                    r["positivity"] = pr;
                    std::cout << verdict(pr.pass) << " positivity min " << pr.minimum << " vs "
                              << pr.ringing_tolerance << '\n';
                }
                if (conv_check) {
                    if (dspec.tail_start != 1)
                        throw ConfigError("--convolution-check needs --tail-start 1");
                    CharFnSpec s0 = dspec;
                    s0.tail_start = 0;
                    const auto f0 = invert_density(s0, dax, dbx, dopt);
                    // f_1 on a nested a axis fine enough to resolve its peak near a = 0
                    const auto refine = static_cast<std::size_t>(std::ceil(dax.step() / 0.008));
                    const auto f1 = refine > 1 ? invert_density(dspec, {dax.min, dax.max, (dax.n - 1) * refine + 1}, dbx, dopt)
                                               : grid;
                    const double d = convolution_consistency(f0, f1);
                    const double tol = 1e-3;
                    r["convolution_defect"] = d;
                    std::cout << verdict(d <= tol) << " convolution consistency max |f0 - conv f1| = " << d
                              << " (tolerance " << tol << ")\n";
                }
                run.result("density", r);
            }
        } else if (sweep->parsed()) {
            const auto spec = conditioning(sweep_o);
            if (!spec)
                throw ConfigError("ConditioningSpec: condition-sweep needs --a (and optionally --b)");
            SamplerConfig cfg;
            cfg.cutoff = sweep_o.cutoff;
            cfg.seed = common.seed;
            cfg.stream_id = sweep_o.stream;
            RejectionOptions ro;
            ro.max_attempts = sweep_o.max_attempts;
            json tables;
            for (const auto& name : sweep_obs) {
                const auto t = epsilon_sweep(named_observable(name), *spec, eps_list, sweep_o.n, cfg, ro);
                tables[name] = t;
                std::cout << name << ": extrapolated " << t.extrapolated << " +- " << 1.96 * t.extrapolated_se << '\n';
            }
            run.write_json("sweep.json", tables);
            run.result("sweep", tables);
        } else if (gibbs->parsed()) {
            const auto e = obtain_ensemble(gibbs_o, common);
            if (!e.spec)
                throw ConfigError("ConditioningSpec: gibbs needs a conditioned ensemble (--a, --eps)");
            gspec.sign = focusing ? Sign::Focusing : Sign::Defocusing;
            gspec.mass_a = e.spec->a;
            gspec.momentum_b = e.spec->b;
            gspec.epsilon = e.spec->epsilon;
            EstimatorOptions eo;
            eo.seed = common.seed;
            json r = {{"gibbs", gspec}, {"ensemble", ensemble_summary(e)},
                      {"partition", estimate_partition(e, gspec, eo)}};
            for (const auto& name : gibbs_obs)
                r["expectations"][name] = expectation_mu(named_observable(name), e, gspec, eo);
            run.write_json("gibbs.json", r);
            run.result("gibbs", r);
            std::cout << "Z = " << r["partition"]["Z"] << " +- " << r["partition"]["ci"] << '\n';
        } else if (tails->parsed()) {
            json r;
            if (ld_N) {
                const long M = ld_M.value_or(*ld_N);
                if (ld_R.empty())
                    for (double k : {5.0, 6.0, 7.0})
                        ld_R.push_back(k * std::sqrt(static_cast<double>(*ld_N)));
                LargeDeviationOptions lo;
                lo.samples = ld_samples;
                lo.seed = common.seed;
                const auto spec = conditioning(tails_o);
                const auto rep = large_deviation_check(M, *ld_N, ld_R, spec, ld_eps, lo);
                r["large_deviation"] = rep;
                std::cout << verdict(rep.verdict) << " large deviation envelope, C spread " << rep.C_spread
                          << '\n';
            } else {
                const auto e = obtain_ensemble(tails_o, common);
                if (!e.spec)
                    throw ConfigError("ConditioningSpec: tails needs a conditioned ensemble (--a, --eps)");
                tspec.sign = tfocusing ? Sign::Focusing : Sign::Defocusing;
                tspec.mass_a = e.spec->a;
                tspec.momentum_b = e.spec->b;
                tspec.epsilon = e.spec->epsilon;
                r["ensemble"] = ensemble_summary(e);
                r["gibbs"] = tspec;
                const auto lp = tail_check(tspec, e);
                r["lp"] = lp;
                std::cout << verdict(lp.verdict) << " L^p tail: slope " << lp.slope << " r2 " << lp.r2
                          << '\n';
                if (hs_s) {
                    const auto hs = hs_tail_check(*hs_s, e);
                    r["hs"] = hs;
                    std::cout << verdict(hs.verdict) << " H^s tail: slope " << hs.slope << " r2 " << hs.r2
                              << '\n';
                }
            }
            run.write_json("tails.json", r);
            run.result("tails", r);
        } else if (evolve_cmd->parsed() || inv->parsed()) {
            const bool is_inv = inv->parsed();
            const auto& eo = is_inv ? inv_o : evolve_o;
            flow.sign = ffocusing ? Sign::Focusing : Sign::Defocusing;
            flow.nonlinear = nonlinear == "pointwise" ? NonlinearStep::Pointwise : NonlinearStep::Galerkin;
            flow.galerkin_cutoff = flow_N.value_or(eo.load.empty() ? eo.cutoff : 0);
            if (flow.galerkin_cutoff > 0)
                flow.validate(); // fail on dt before any sampling
            const auto e = obtain_ensemble(eo, common);
            if (!flow_N && e.size())
                flow.galerkin_cutoff = e.fields.front().cutoff();
            flow.validate();
            if (is_inv) {
                if (!e.spec)
                    throw ConfigError("ConditioningSpec: invariance needs a conditioned ensemble (--a, --eps)");
                GibbsSpec g;
                g.p = flow.p;
                g.sign = flow.sign;
                g.mass_a = e.spec->a;
                g.momentum_b = e.spec->b;
                g.epsilon = e.spec->epsilon;
                iopt.seed = common.seed;
                const auto rep = invariance_test(e, g, flow, iopt);
                json r = {{"flow", flow}, {"gibbs", g}, {"ensemble", ensemble_summary(e)}, {"report", rep}};
                run.write_json("invariance.json", r);
                run.result("invariance", r);
                for (const auto& o : rep.observables)
                    std::cout << (o.pass ? "PASS " : "FAIL ") << o.name << " ks " << o.ks << " threshold " << o.threshold
                              << '\n';
                std::cout << verdict(rep.verdict) << " invariance (" << rep.samples << " samples, ess "
                          << rep.ess << ")\n";
            } else {
                Ensemble out = e;
                json drifts = json::array();
                for (std::size_t i = 0; i < e.size(); ++i) {
                    auto r = evolve(e.fields[i], flow, stride);
                    if (i == 0)
                        io::write_trace_csv(run.path("trace.csv"), r.trace);
                    drifts.push_back({{"mass_max_rel", r.trace.mass_max_rel()},
                                      {"momentum_max_abs", r.trace.momentum_max_abs()},
                                      {"energy_max_rel", r.trace.energy_max_rel()}});
                    out.fields[i] = std::move(r.field);
                }
                io::write_ensemble(run.path("evolved.lgen"), out,
                                   io::FlowMeta{flow.p, flow.sign, flow.galerkin_cutoff, flow.dt, flow.T, flow.nonlinear});
                run.result("evolve", {{"flow", flow}, {"drift", drifts}});
                std::cout << "evolved " << e.size() << " fields to T = " << flow.T << '\n';
            }
        }
        run.finish();
        return all_pass ? kOk : kFailure;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const MismatchedSpec& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const BudgetExhausted& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return kBudget;
    } catch (const CutoffTooSmall& e) {
        std::cerr << "cutoff too small: " << e.what() << '\n';
        return kCutoff;
    } catch (const Instability& e) {
        std::cerr << "instability: " << e.what() << '\n';
        return kInstability;
    } catch (const AuditFailure& e) {
        std::cerr << e.what() << '\n';
        return kAudit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}

} // namespace levygibbs::cli
