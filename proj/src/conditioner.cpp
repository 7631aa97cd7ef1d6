#include "levygibbs/conditioner.hpp"

#include "levygibbs/error.hpp"
#include "levygibbs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace levygibbs {

void ConditioningSpec::validate() const
{
    if (!(a > 0))
        throw ConfigError("ConditioningSpec: target mass a must be > 0");
    if (!(epsilon > 0))
        throw ConfigError("ConditioningSpec: epsilon must be > 0");
    if (epsilon > a)
        throw ConfigError("ConditioningSpec: epsilon must not exceed a");
    if (!std::isfinite(b))
        throw ConfigError("ConditioningSpec: target momentum b must be finite");
}

bool Ensemble::conditioning_holds() const
{
    if (!spec)
        return true;
    return std::all_of(fields.begin(), fields.end(), [&](const FourierField& u) { return spec->accepts(u); });
}

Ensemble Ensemble::merge(const Ensemble& x, const Ensemble& y)
{
    if (x.spec != y.spec)
        throw MismatchedSpec("Ensemble::merge: conditioning specs differ");
    Ensemble out = x;
    out.fields.insert(out.fields.end(), y.fields.begin(), y.fields.end());
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    out.weights.clear();
    for (double w : x.weights)
        out.weights.push_back(w * nx / (nx + ny));
    for (double w : y.weights)
        out.weights.push_back(w * ny / (nx + ny));
    out.provenance.attempts += y.provenance.attempts;
    out.provenance.accepted += y.provenance.accepted;
    out.provenance.acceptance_rate = out.provenance.attempts
                                         ? static_cast<double>(out.provenance.accepted) / out.provenance.attempts
                                         : 0.0;
    return out;
}

Ensemble Ensemble::subset(std::size_t begin, std::size_t end) const
{
    Ensemble out;
    out.spec = spec;
    out.provenance = provenance;
    end = std::min(end, size());
    out.fields.assign(fields.begin() + static_cast<long>(begin), fields.begin() + static_cast<long>(end));
    double total = 0;
    for (std::size_t i = begin; i < end; ++i)
        total += weights[i];
    for (std::size_t i = begin; i < end; ++i)
        out.weights.push_back(weights[i] / total);
    return out;
}

Ensemble sample_unconditioned(std::size_t count, const SamplerConfig& cfg)
{
    Ensemble e;
    e.fields.resize(count);
    parallel_for(count, [&](std::size_t i) { e.fields[i] = sample_wiener(cfg, i); }, 16);
    e.weights.assign(count, count ? 1.0 / static_cast<double>(count) : 0.0);
    e.provenance = {cfg.seed, cfg.stream_id, count, count, 1.0, "wiener", cfg.cutoff, 0};
    return e;
}

namespace {

// Prefilter margin: the |g|^2-only sums differ from the exact ones by rounding.
bool near_window(const ConditioningSpec& spec, const MassMomentum& mm)
{
    const double tol = 1e-9;
    return std::abs(mm.mass - spec.a) < spec.epsilon + tol * (1 + std::abs(spec.a)) &&
           std::abs(mm.momentum - spec.b) < spec.epsilon + tol * (1 + std::abs(spec.b) + std::abs(mm.momentum));
}

// Overlap fraction of [x - h, x + h] with (c - eps, c + eps).
double smoothed_indicator(double x, double c, double eps, double h)
{
    const double lo = std::max(x - h, c - eps), hi = std::min(x + h, c + eps);
    return hi > lo ? (hi - lo) / (2 * h) : 0.0;
}

Ensemble reweighted_fallback(const ConditioningSpec& spec, std::size_t count, const SamplerConfig& cfg,
                             const RejectionOptions& opt, std::uint64_t first_draw)
{
    // Wiener proposals weighted by window indicators smoothed over one cell.
    const double h = std::max(opt.fallback_cell, spec.epsilon);
    Ensemble e;
    e.spec = spec;
    std::uint64_t draw = first_draw;
    const std::uint64_t limit = first_draw + opt.max_attempts;
    while (e.fields.size() < count && draw < limit) {
        const auto mm = wiener_mass_momentum(cfg, draw);
        const double w = smoothed_indicator(mm.mass, spec.a, spec.epsilon, h) *
                         smoothed_indicator(mm.momentum, spec.b, spec.epsilon, h);
        if (w > 0) {
            e.fields.push_back(sample_wiener(cfg, draw));
            e.weights.push_back(w);
        }
        ++draw;
    }
    if (e.fields.size() < count)
        throw BudgetExhausted("reweighting fallback also ran out of attempts", draw - first_draw, e.fields.size());
    double total = 0;
    for (double w : e.weights)
        total += w;
    for (double& w : e.weights)
        w /= total;
    e.provenance = {cfg.seed, cfg.stream_id, draw - first_draw, e.fields.size(),
                    static_cast<double>(e.fields.size()) / static_cast<double>(draw - first_draw),
                    "reweighted-fallback", cfg.cutoff, 0};
    return e;
}

} // namespace

Ensemble sample_conditioned(const ConditioningSpec& spec, std::size_t count, const SamplerConfig& cfg,
                            const RejectionOptions& opt)
{
    spec.validate();
    if (count < 1)
        throw ConfigError("sample_conditioned: count must be >= 1");
    if (opt.batch == 0)
        throw ConfigError("sample_conditioned: batch must be >= 1");

    struct Hit
    {
        std::uint64_t draw;
        FourierField field;
    };
    std::vector<Hit> accepted;
    accepted.reserve(count);
    std::uint64_t next = 0, attempts = 0;
    const std::size_t B = opt.batch;

    while (accepted.size() < count) {
        if (next >= opt.max_attempts) {
            if (opt.fallback)
                return reweighted_fallback(spec, count, cfg, opt, next);
            std::ostringstream os;
            os << "sample_conditioned: " << accepted.size() << " of " << count << " fields after " << next
               << " attempts (a=" << spec.a << ", b=" << spec.b << ", eps=" << spec.epsilon << ")";
            throw BudgetExhausted(os.str(), next, accepted.size());
        }
        const std::size_t nb = std::max<std::size_t>(1, worker_count());
        std::vector<std::vector<Hit>> hits(nb);
        parallel_for(nb, [&](std::size_t bi) {
            const std::uint64_t begin = next + bi * B;
            const std::uint64_t end = std::min<std::uint64_t>(begin + B, opt.max_attempts);
            for (std::uint64_t d = begin; d < end; ++d) {
                if (!near_window(spec, wiener_mass_momentum(cfg, d)))
                    continue;
                auto u = sample_wiener(cfg, d);
                if (spec.accepts(u))
                    hits[bi].push_back({d, std::move(u)});
            }
        });
        for (auto& h : hits)
            for (auto& x : h) {
                if (accepted.size() == count)
                    break;
                attempts = x.draw + 1;
                accepted.push_back(std::move(x));
            }
        next = std::min<std::uint64_t>(next + nb * B, opt.max_attempts);
        if (accepted.size() < count)
            attempts = next;
    }

    Ensemble e;
    e.spec = spec;
    e.fields.reserve(count);
    for (auto& h : accepted)
        e.fields.push_back(std::move(h.field));
    e.weights.assign(count, 1.0 / static_cast<double>(count));
    e.provenance = {cfg.seed, cfg.stream_id, attempts, count,
                    static_cast<double>(count) / static_cast<double>(attempts), "rejection", cfg.cutoff, B};
    return e;
}

stats::Estimate acceptance_rate(const ConditioningSpec& spec, std::uint64_t attempts, const SamplerConfig& cfg)
{
    spec.validate();
    const std::size_t chunks = 256;
    std::vector<std::uint64_t> hits(chunks, 0);
    parallel_for(chunks, [&](std::size_t c) {
        const std::uint64_t begin = attempts * c / chunks, end = attempts * (c + 1) / chunks;
        for (std::uint64_t d = begin; d < end; ++d) {
            if (!near_window(spec, wiener_mass_momentum(cfg, d)))
                continue;
            if (spec.accepts(sample_wiener(cfg, d)))
                ++hits[c];
        }
    });
    std::uint64_t k = 0;
    for (auto h : hits)
        k += h;
    return stats::proportion(k, attempts);
}

LowModeEstimate low_mode_marginal(const ConditioningSpec& spec, int mode_cutoff,
                                  const std::function<bool(std::span<const cplx>)>& region,
                                  const DensityGrid* f_tail, const DensityGrid* f0, std::size_t samples,
                                  std::uint64_t seed, std::uint64_t stream, bool use_boxes)
{
    if (!f_tail || !f0)
        throw MissingDensity("low_mode_marginal: densities f_{N+1} and f_0 must be precomputed");
    if (f_tail->tail_start() != mode_cutoff + 1 || f0->tail_start() != 0)
        throw MismatchedSpec("low_mode_marginal: expected grids with tail_start N+1 and 0");
    const double eps = spec.epsilon;
    const double denom = use_boxes ? f0->box_integral(spec.a - eps, spec.a + eps, spec.b - eps, spec.b + eps)
                                   : (*f0)(spec.a, spec.b);
    if (!(denom > 0))
        throw MissingDensity("low_mode_marginal: f_0 vanishes at the conditioning point");

    const SamplerConfig cfg{mode_cutoff, seed, stream, 0};
    const std::size_t n_modes = 2 * static_cast<std::size_t>(mode_cutoff) + 1;
    std::vector<double> vals(samples);
    parallel_for(
        samples,
        [&](std::size_t i) {
            std::vector<cplx> xi(n_modes);
            double da = 0, db = 0;
            for (long n = -mode_cutoff; n <= mode_cutoff; ++n) {
                const auto g = wiener_gaussian(cfg, i, n);
                xi[static_cast<std::size_t>(n + mode_cutoff)] = g;
                const double w = 1.0 / bracket_sq(n);
                da += w * std::norm(g);
                db += w * freq(n) * std::norm(g);
            }
            if (!region(xi)) {
                vals[i] = 0;
                return;
            }
            const double at = spec.a - da, bt = spec.b - db;
            const double num = use_boxes ? f_tail->box_integral(at - eps, at + eps, bt - eps, bt + eps) : (*f_tail)(at, bt);
            vals[i] = num / denom;
        },
        64);
    const auto m = stats::mean(vals);
    return {m.value, m.se};
}

Observable named_observable(const std::string& name)
{
    if (name == "mass")
        return [](const FourierField& u) { return mass(u); };
    if (name == "momentum")
        return [](const FourierField& u) { return momentum(u); };
    if (name == "l4")
        return [](const FourierField& u) { return lp_integral(u, 4.0); };
    if (name == "l6")
        return [](const FourierField& u) { return lp_integral(u, 6.0); };
    if (name == "hamiltonian4")
        return [](const FourierField& u) { return hamiltonian(u, 4.0, Sign::Defocusing); };
    if (name == "hs_quarter")
        return [](const FourierField& u) { return hs_norm(u, 0.25); };
    if (name == "hs04")
        return [](const FourierField& u) { return hs_norm(u, 0.4); };
    if (name == "re_c1")
        return [](const FourierField& u) { return u[1].real(); };
    if (name == "abs_c0_sq")
        return [](const FourierField& u) { return std::norm(u[0]); };
    throw ConfigError("unknown observable '" + name + "'");
}

std::vector<std::string> observable_names()
{
    return {"mass", "momentum", "l4", "l6", "hamiltonian4", "hs_quarter", "hs04", "re_c1", "abs_c0_sq"};
}

SweepTable fit_extrapolation(std::vector<SweepRow> rows)
{
    SweepTable tab;
    tab.rows = rows;
    if (rows.empty())
        return tab;
    if (rows.size() == 1) {
        tab.extrapolated = rows[0].mean;
        tab.extrapolated_se = rows[0].se;
        return tab;
    }
    const bool weighted = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.se > 0; });
    auto wt = [&](const SweepRow& r) { return weighted ? 1.0 / (r.se * r.se) : 1.0; };

    double best = std::numeric_limits<double>::infinity();
    const bool free_q = rows.size() >= 3;
    for (double q = free_q ? 0.25 : 2.0; q <= (free_q ? 4.0 + 1e-9 : 2.0); q += 0.05) {
        double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& r : rows) {
            const double x = std::pow(r.epsilon, q), w = wt(r);
            sw += w;
            sx += w * x;
            sy += w * r.mean;
            sxx += w * x * x;
            sxy += w * x * r.mean;
        }
        const double det = sw * sxx - sx * sx;
        if (!(det > 0))
            continue;
        const double c = (sw * sxy - sx * sy) / det;
        const double e0 = (sy - c * sx) / sw;
        double sse = 0;
        for (const auto& r : rows) {
            const double res = r.mean - e0 - c * std::pow(r.epsilon, q);
            sse += wt(r) * res * res;
        }
        if (!std::isfinite(best) || sse < best - 1e-12 * std::abs(best)) {
            best = sse;
            tab.extrapolated = e0;
            tab.c = c;
            tab.q = q;
            // variance of the intercept under known weights
            double var = sxx / det;
            if (!weighted)
                var *= rows.size() > 2 ? sse / static_cast<double>(rows.size() - 2) : 0.0;
            tab.extrapolated_se = std::sqrt(var);
        }
    }
    return tab;
}

SweepTable epsilon_sweep(const Observable& observable, const ConditioningSpec& tmpl, const std::vector<double>& eps_list,
                         std::size_t count, const SamplerConfig& cfg, const RejectionOptions& opt)
{
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("epsilon_sweep: eps_list must be strictly decreasing");
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        auto spec = tmpl;
        spec.epsilon = eps_list[i];
        auto c = cfg;
        c.stream_id = cfg.stream_id + i;
        const auto ens = sample_conditioned(spec, count, c, opt);
        std::vector<double> v(ens.size());
        parallel_for(ens.size(), [&](std::size_t k) { v[k] = observable(ens.fields[k]); }, 16);
        const auto m = stats::mean(v);
        rows.push_back({spec.epsilon, m.value, m.se, ens.provenance.acceptance_rate, ens.size()});
    }
    return fit_extrapolation(std::move(rows));
}

} // namespace levygibbs
