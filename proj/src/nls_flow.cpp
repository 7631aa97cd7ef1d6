#include "levygibbs/nls_flow.hpp"

#include "levygibbs/error.hpp"
#include "levygibbs/fft.hpp"
#include "levygibbs/parallel.hpp"
#include "levygibbs/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace levygibbs {

const char* to_string(NonlinearStep s) { return s == NonlinearStep::Galerkin ? "galerkin" : "pointwise"; }

double FlowSpec::dt_max() const
{
    const double k = 2 * std::numbers::pi * std::max(galerkin_cutoff, 1);
    return stability_c / (k * k);
}

long FlowSpec::steps() const
{
    if (T == 0)
        return 0;
    const double r = T / dt;
    const double n = std::round(r);
    if (std::abs(r - n) > 1e-9 * std::max(1.0, r))
        throw ConfigError("FlowSpec: T / dt must be an integer");
    return static_cast<long>(n);
}

std::size_t FlowSpec::work_grid() const
{
    if (grid_size)
        return grid_size;
    const auto need = static_cast<std::size_t>(std::ceil(p)) * static_cast<std::size_t>(galerkin_cutoff) + 2;
    return std::bit_ceil(need);
}

void FlowSpec::validate() const
{
    if (!(p > 2))
        throw ConfigError("FlowSpec: p must be > 2");
    if (galerkin_cutoff < 1)
        throw ConfigError("FlowSpec: galerkin_cutoff must be >= 1");
    if (!(dt > 0))
        throw ConfigError("FlowSpec: dt must be > 0");
    if (!(T >= 0))
        throw ConfigError("FlowSpec: T must be >= 0");
    const std::size_t G = work_grid();
    if (!std::has_single_bit(G) || G < 2 * static_cast<std::size_t>(galerkin_cutoff) + 2)
        throw ConfigError("FlowSpec: grid_size must be a power of two >= 2N + 2");
    if (dt > dt_max()) {
        std::ostringstream os;
        os << "FlowSpec: dt = " << dt << " exceeds the stability bound dt_max = " << dt_max() << " (c = "
           << stability_c << ", N = " << galerkin_cutoff << ")";
        throw Instability(os.str());
    }
    steps();
}

namespace {

class Stepper
{
public:
    explicit Stepper(const FlowSpec& spec)
      : spec_(spec)
      , N_(spec.galerkin_cutoff)
      , G_(spec.work_grid())
      , sigma_(spec.sign == Sign::Defocusing ? 1.0 : -1.0)
      , buf_(G_)
      , tmp_(2 * static_cast<std::size_t>(N_) + 1)
    {}

    void run(std::vector<cplx>& c, double dt)
    {
        linear(c, 0.5 * dt);
        if (!spec_.linear_only) {
            if (spec_.nonlinear == NonlinearStep::Galerkin)
                midpoint(c, dt);
            else
                pointwise(c, dt);
        }
        linear(c, 0.5 * dt);
        for (const auto& x : c)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag()) || std::abs(x) > spec_.overflow_guard)
                throw Instability("step: coefficient exceeded the overflow guard; dt is too large for this field");
    }

private:
    void linear(std::vector<cplx>& c, double h)
    {
        for (long n = -N_; n <= N_; ++n) {
            const double k = freq(n);
            c[idx(n)] *= std::polar(1.0, -k * k * h);
        }
    }

    void to_grid(const std::vector<cplx>& c)
    {
        std::fill(buf_.begin(), buf_.end(), cplx{});
        const long g = static_cast<long>(G_);
        for (long n = -N_; n <= N_; ++n)
            buf_[static_cast<std::size_t>((n + g) % g)] = c[idx(n)];
        fft::backward(buf_);
    }

    void from_grid(std::vector<cplx>& c)
    {
        fft::forward(buf_);
        const long g = static_cast<long>(G_);
        const double inv = 1.0 / static_cast<double>(G_);
        for (long n = -N_; n <= N_; ++n)
            c[idx(n)] = buf_[static_cast<std::size_t>((n + g) % g)] * inv;
    }

    double modulus_power(const cplx& u) const
    {
        const double m2 = std::norm(u);
        if (spec_.p == 4)
            return m2;
        if (spec_.p == 6)
            return m2 * m2;
        return std::pow(std::max(std::sqrt(m2), 1e-300), spec_.p - 2);
    }

    // tmp_ = P_N(|u|^{p-2} u) for u given by coefficients c.
    void nonlinearity(const std::vector<cplx>& c)
    {
        to_grid(c);
        for (auto& u : buf_)
            u *= modulus_power(u);
        from_grid(tmp_);
    }

    void midpoint(std::vector<cplx>& c, double dt)
    {
        const cplx f = cplx(0, -sigma_ * 0.5 * dt);
        double scale = 0;
        for (const auto& x : c)
            scale = std::max(scale, std::abs(x));
        if (scale == 0)
            return;
        std::vector<cplx> bar = c, next(c.size());
        double prev = HUGE_VAL;
        bool done = false;
        for (int it = 0; it < spec_.max_fixed_point; ++it) {
            nonlinearity(bar);
            double diff = 0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                next[i] = c[i] + f * tmp_[i];
                diff = std::max(diff, std::abs(next[i] - bar[i]));
            }
            bar.swap(next);
            if (!std::isfinite(diff))
                break;
            // converged, or stalled at the roundoff floor
            if (diff <= 1e-15 * scale || (diff <= 1e-12 * scale && diff >= 0.5 * prev)) {
                done = true;
                break;
            }
            prev = diff;
        }
        if (!done)
            throw Instability("step: implicit midpoint iteration did not converge; reduce dt");
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = 2.0 * bar[i] - c[i];
    }

    void pointwise(std::vector<cplx>& c, double dt)
    {
        to_grid(c);
        for (auto& u : buf_)
            u *= std::polar(1.0, -sigma_ * modulus_power(u) * dt);
        from_grid(c);
    }

    std::size_t idx(long n) const { return static_cast<std::size_t>(n + N_); }

    const FlowSpec& spec_;
    long N_;
    std::size_t G_;
    double sigma_;
    std::vector<cplx> buf_;
    std::vector<cplx> tmp_;
};

std::vector<cplx> lift(const FourierField& u, int N)
{
    if (u.cutoff() > N)
        throw ConfigError("step: field cutoff exceeds galerkin_cutoff");
    std::vector<cplx> c(2 * static_cast<std::size_t>(N) + 1);
    for (long n = -u.cutoff(); n <= u.cutoff(); ++n)
        c[static_cast<std::size_t>(n + N)] = u[n];
    return c;
}

} // namespace

FourierField step(const FourierField& u, const FlowSpec& spec, double dt)
{
    spec.validate();
    if (std::abs(dt) > spec.dt_max())
        throw Instability("step: |dt| exceeds the stability bound");
    auto c = lift(u, spec.galerkin_cutoff);
    Stepper(spec).run(c, dt);
    return FourierField(spec.galerkin_cutoff, std::move(c), spec.work_grid());
}

double ConservationTrace::mass_max_rel() const
{
    double m = 0;
    for (double x : mass)
        m = std::max(m, std::abs(x - mass.front()) / std::max(std::abs(mass.front()), 1e-300));
    return mass.empty() ? 0 : m;
}

double ConservationTrace::momentum_max_abs() const
{
    double m = 0;
    for (double x : momentum)
        m = std::max(m, std::abs(x - momentum.front()));
    return m;
}

double ConservationTrace::energy_max_rel() const
{
    double m = 0;
    for (double x : hamiltonian)
        m = std::max(m, std::abs(x - hamiltonian.front()) / std::max(std::abs(hamiltonian.front()), 1e-300));
    return hamiltonian.empty() ? 0 : m;
}

EvolveResult evolve(const FourierField& u0, const FlowSpec& spec, long stride, int direction)
{
    spec.validate();
    const long n_steps = spec.steps();
    const double dt = direction >= 0 ? spec.dt : -spec.dt;
    const std::size_t G = spec.work_grid();
    const int N = spec.galerkin_cutoff;
    auto c = lift(u0, N);
    Stepper stepper(spec);

    EvolveResult res;
    auto record = [&](long k) {
        const FourierField f(N, c, G);
        res.trace.t.push_back(static_cast<double>(k) * dt);
        res.trace.mass.push_back(mass(f));
        res.trace.momentum.push_back(momentum(f));
        res.trace.hamiltonian.push_back(hamiltonian(f, spec.p, spec.sign));
    };
    record(0);
    for (long k = 1; k <= n_steps; ++k) {
        stepper.run(c, dt);
        if ((stride > 0 && k % stride == 0) || k == n_steps)
            if (res.trace.t.size() < 2 || res.trace.t.back() != static_cast<double>(k) * dt)
                record(k);
    }
    res.field = FourierField(N, std::move(c), G);
    return res;
}

InvarianceReport invariance_test(const Ensemble& ens, const GibbsSpec& gibbs, const FlowSpec& flow,
                                 const InvarianceOptions& opt)
{
    gibbs.validate();
    flow.validate();
    check_matching(ens, gibbs);
    if (gibbs.p != flow.p || gibbs.sign != flow.sign)
        throw ConfigError("invariance_test: Gibbs and flow specs disagree on p or sign");
    for (const auto& u : ens.fields)
        if (u.cutoff() > flow.galerkin_cutoff)
            throw ConfigError("invariance_test: galerkin_cutoff is below the ensemble cutoff");

    const std::size_t n = ens.size();
    const auto w = combined_weights(ens, gibbs);
    std::vector<FourierField> start(n), end(n);
    std::vector<double> dm(n), dp(n), de(n);
    parallel_for(n, [&](std::size_t i) {
        start[i] = FourierField(flow.galerkin_cutoff, lift(ens.fields[i], flow.galerkin_cutoff), flow.work_grid());
        auto r = evolve(start[i], flow);
        dm[i] = r.trace.mass_max_rel();
        dp[i] = r.trace.momentum_max_abs();
        de[i] = r.trace.energy_max_rel();
        end[i] = std::move(r.field);
    });

    InvarianceReport rep;
    rep.samples = n;
    rep.ess = stats::effective_sample_size(w);
    for (std::size_t i = 0; i < n; ++i) {
        rep.mass_max_rel = std::max(rep.mass_max_rel, dm[i]);
        rep.momentum_max_abs = std::max(rep.momentum_max_abs, dp[i]);
        rep.energy_max_rel = std::max(rep.energy_max_rel, de[i]);
    }
    rep.verdict = true;
    for (std::size_t k = 0; k < opt.observables.size(); ++k) {
        const auto phi = named_observable(opt.observables[k]);
        std::vector<double> x0(n), xT(n);
        parallel_for(n, [&](std::size_t i) {
            x0[i] = phi(start[i]);
            xT[i] = phi(end[i]);
        }, 16);
        ObservableKS o;
        o.name = opt.observables[k];
        o.ks = stats::weighted_ks(x0, w, xT, w);
        o.threshold =
            stats::permutation_ks_critical(x0, w, xT, w, opt.permutations, opt.level, opt.seed, opt.stream + k);
        o.pass = o.ks == 0 || o.ks < o.threshold;
        rep.verdict = rep.verdict && o.pass;
        rep.observables.push_back(o);
    }
    return rep;
}

LevyProbeReport levy_area_conservation_probe(const Ensemble& ens, const FlowSpec& flow, std::size_t K)
{
    flow.validate();
    const std::size_t n = ens.size();
    const AreaRule rules[] = {AreaRule::LeftEndpoint, AreaRule::Midpoint, AreaRule::Trapezoid};
    LevyProbeReport rep;
    rep.K = K;
    rep.momentum_drift.assign(n, 0);
    rep.area_drift.assign(3, std::vector<double>(n, 0));
    std::vector<double> p0(n);
    parallel_for(n, [&](std::size_t i) {
        const FourierField u0(flow.galerkin_cutoff, lift(ens.fields[i], flow.galerkin_cutoff), flow.work_grid());
        const auto uT = evolve(u0, flow).field;
        p0[i] = momentum(u0);
        rep.momentum_drift[i] = momentum(uT) - p0[i];
        for (int r = 0; r < 3; ++r)
            rep.area_drift[r][i] = levy_area_extrapolated(uT, K, rules[r]) - levy_area_extrapolated(u0, K, rules[r]);
    });
    double pmax = 0, sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pmax = std::max(pmax, std::abs(p0[i]));
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (int r = 0; r < 3; ++r) {
            const double d = rep.area_drift[r][i];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            rep.max_drift = std::max(rep.max_drift, std::abs(d));
            rep.max_mismatch = std::max(rep.max_mismatch, std::abs(d - rep.momentum_drift[i]));
        }
        sum += std::abs(rep.area_drift[1][i]);
        rep.rule_spread = std::max(rep.rule_spread, hi - lo);
    }
    rep.mean_drift = n ? sum / static_cast<double>(n) : 0;
    rep.tolerance = flow.dt * flow.dt * flow.T * (1 + pmax);
    rep.verdict = rep.max_mismatch <= 1e-10 && rep.max_drift <= rep.tolerance;
    return rep;
}

} // namespace levygibbs
