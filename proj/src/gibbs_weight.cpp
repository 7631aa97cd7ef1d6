#include "levygibbs/gibbs_weight.hpp"

#include "levygibbs/error.hpp"
#include "levygibbs/parallel.hpp"
#include "levygibbs/rng.hpp"
#include "levygibbs/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace levygibbs {

void GibbsSpec::validate() const
{
    if (!(p > 2))
        throw ConfigError("GibbsSpec: p must be > 2");
    if (!(mass_a > 0))
        throw ConfigError("GibbsSpec: mass_a must be > 0");
    if (!(epsilon > 0) || epsilon > mass_a)
        throw ConfigError("GibbsSpec: need 0 < epsilon <= mass_a");
    if (sign == Sign::Focusing && p > 6)
        throw ConfigError("GibbsSpec: focusing weights are not integrable for p > 6");
    if (sign == Sign::Focusing && p == 6 && mass_a > focusing_mass_guard) {
        std::ostringstream os;
        os << "GibbsSpec: focusing p = 6 needs mass_a <= focusing_mass_guard (" << focusing_mass_guard << ")";
        throw ConfigError(os.str());
    }
}

double gibbs_weight(const FourierField& u, const GibbsSpec& spec)
{
    const double v = lp_integral(u, spec.p) / spec.p;
    return std::exp(spec.sign == Sign::Defocusing ? -v : v);
}

void check_matching(const Ensemble& ens, const GibbsSpec& spec)
{
    if (!ens.spec)
        throw MismatchedSpec("ensemble is unconditioned but the Gibbs spec conditions on (a, b, eps)");
    const auto& c = *ens.spec;
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1 + std::abs(x) + std::abs(y)); };
    if (!close(c.a, spec.mass_a) || !close(c.b, spec.momentum_b) || !close(c.epsilon, spec.epsilon)) {
        std::ostringstream os;
        os << "ensemble conditioned on (a, b, eps) = (" << c.a << ", " << c.b << ", " << c.epsilon
           << ") but Gibbs spec has (" << spec.mass_a << ", " << spec.momentum_b << ", " << spec.epsilon << ")";
        throw MismatchedSpec(os.str());
    }
}

std::vector<double> combined_weights(const Ensemble& ens, const GibbsSpec& spec)
{
    std::vector<double> w(ens.size());
    parallel_for(ens.size(), [&](std::size_t i) { w[i] = ens.weights[i] * gibbs_weight(ens.fields[i], spec); }, 16);
    return w;
}

PartitionEstimate estimate_partition(const Ensemble& ens, const GibbsSpec& spec, const EstimatorOptions& opt)
{
    spec.validate();
    check_matching(ens, spec);
    if (ens.size() == 0)
        throw ConfigError("estimate_partition: empty ensemble");
    const double n = static_cast<double>(ens.size());
    // terms whose plain mean is Z: n * (ensemble weight) * (Gibbs weight)
    auto terms = combined_weights(ens, spec);
    for (double& t : terms)
        t *= n;
    PartitionEstimate pe;
    pe.Z = stats::neumaier_sum(terms) / n;
    pe.ess = stats::effective_sample_size(terms);
    pe.se = stats::bootstrap_se(terms, opt.bootstrap, opt.seed, opt.stream);
    pe.ci = 1.96 * pe.se;
    if (pe.ess < opt.ess_floor) {
        std::ostringstream os;
        os << "estimate_partition: effective sample size " << pe.ess << " below floor " << opt.ess_floor;
        throw DegenerateWeights(os.str());
    }
    return pe;
}

WeightedEstimate expectation_mu(const Observable& phi, const Ensemble& ens, const GibbsSpec& spec,
                                const EstimatorOptions& opt)
{
    spec.validate();
    check_matching(ens, spec);
    const auto w = combined_weights(ens, spec);
    std::vector<double> v(ens.size());
    parallel_for(ens.size(), [&](std::size_t i) { v[i] = phi(ens.fields[i]); }, 16);
    const double sw = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(sw > 0))
        throw DegenerateWeights("expectation_mu: weights sum to zero");
    WeightedEstimate est;
    double num = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        num += w[i] * v[i];
    est.value = num / sw;
    double var = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        var += w[i] * w[i] * (v[i] - est.value) * (v[i] - est.value);
    est.se = std::sqrt(var) / sw;
    est.ci = 1.96 * est.se;
    est.ess = stats::effective_sample_size(w);
    if (est.ess < opt.ess_floor) {
        std::ostringstream os;
        os << "expectation_mu: effective sample size " << est.ess << " below floor " << opt.ess_floor;
        throw DegenerateWeights(os.str());
    }
    return est;
}

std::vector<double> quantile_levels(std::vector<double> values, std::size_t points, std::size_t min_events)
{
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    if (values.size() < 2 * min_events || points < 2)
        throw InsufficientTailEvents("quantile_levels: ensemble too small for a tail grid");
    const double s_hi = 0.25, s_lo = static_cast<double>(min_events) / n;
    std::vector<double> out;
    for (std::size_t k = 0; k < points; ++k) {
        const double s = s_hi * std::pow(s_lo / s_hi, static_cast<double>(k) / static_cast<double>(points - 1));
        // midway below the ceil(s n)-th largest value, so >= and > count the same events
        const auto idx = values.size() - std::max<std::size_t>(static_cast<std::size_t>(std::ceil(s * n)), 1);
        out.push_back(idx > 0 ? 0.5 * (values[idx - 1] + values[idx]) : values[0]);
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

TailReport fit_tail(std::string quantity, const std::vector<double>& values, const std::vector<double>& weights,
                    const std::vector<double>& gibbs, std::vector<double> levels, double kappa, bool strict)
{
    TailReport rep;
    rep.quantity = std::move(quantity);
    rep.exponent = kappa;
    rep.samples = values.size();
    std::sort(levels.begin(), levels.end());
    const double n_eff = stats::effective_sample_size(weights);
    const double gsum = std::accumulate(gibbs.begin(), gibbs.end(), 0.0);

    for (double lv : levels) {
        TailPoint pt;
        pt.level = lv;
        double s = 0, g = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const bool hit = strict ? values[i] > lv : values[i] >= lv;
            if (hit) {
                s += weights[i];
                g += gibbs[i];
                ++pt.exceedances;
            }
        }
        pt.survival = s;
        pt.gibbs_survival = gsum > 0 ? g / gsum : 0;
        const double sp = pt.exceedances == 0 ? 1.0 / (n_eff + 2) : s;
        pt.se = std::sqrt(sp * (1 - sp) / n_eff);
        rep.points.push_back(pt);
    }
    for (std::size_t k = 1; k < rep.points.size(); ++k)
        if (rep.points[k].survival > rep.points[k - 1].survival)
            rep.monotone = false;

    const TailPoint* last_nonzero = nullptr;
    for (const auto& pt : rep.points)
        if (pt.survival > 0)
            last_nonzero = &pt;
    if (last_nonzero && last_nonzero->exceedances < 10) {
        std::ostringstream os;
        os << "tail check: only " << last_nonzero->exceedances << " exceedances at level " << last_nonzero->level
           << " (need 10)";
        throw InsufficientTailEvents(os.str());
    }

    // weights 1 / var(log S) up to the common factor n_eff
    std::vector<double> x, y, w;
    for (const auto& pt : rep.points)
        if (pt.survival > 0) {
            x.push_back(std::pow(pt.level, kappa));
            y.push_back(std::log(pt.survival));
            w.push_back(pt.survival < 1 ? pt.survival / (1 - pt.survival) : 1.0);
        }
    if (x.size() < 2)
        return rep;
    const auto fit = stats::linear_fit(x, y, w);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_se;
    rep.r2 = fit.r2;
    rep.C = std::exp(fit.intercept);
    rep.c = -fit.slope;
    bool all_below = true;
    for (auto& pt : rep.points) {
        pt.envelope = rep.C * std::exp(-rep.c * std::pow(pt.level, kappa));
        pt.below_envelope = pt.survival <= pt.envelope + 3 * pt.se;
        all_below = all_below && pt.below_envelope;
    }
    rep.verdict = all_below && rep.monotone && rep.slope < 0;
    return rep;
}

} // namespace

TailReport tail_check(const GibbsSpec& spec, const Ensemble& ens, std::vector<double> lambdas, std::size_t grid_points)
{
    spec.validate();
    check_matching(ens, spec);
    std::vector<double> v(ens.size()), gw(ens.size());
    parallel_for(ens.size(), [&](std::size_t i) {
        v[i] = lp_integral(ens.fields[i], spec.p) / spec.p;
        gw[i] = ens.weights[i] * std::exp(spec.sign == Sign::Defocusing ? -v[i] : v[i]);
    }, 16);
    if (lambdas.empty())
        lambdas = quantile_levels(v, grid_points);
    const double kappa = 1.0 + (6.0 - spec.p) / (spec.p - 2.0);
    auto rep = fit_tail("lp", v, ens.weights, gw, lambdas, kappa, false);

    // Attribution at the largest level: does the |n| <= M0 part ever carry half the integral?
    if (!rep.points.empty()) {
        const double lam = rep.points.back().level;
        for (std::size_t i = 0; i < ens.size(); ++i)
            if (v[i] >= lam) {
                const auto d = dyadic_decomposition(ens.fields[i], spec.p, lam, spec.mass_a);
                if (d.sobolev_floor_active && d.low_exceeds)
                    ++rep.low_mode_violations;
            }
    }
    return rep;
}

TailReport hs_tail_check(double s, const Ensemble& ens, std::vector<double> Lambdas, std::size_t grid_points)
{
    if (!(s >= 0 && s < 0.5))
        throw ConfigError("hs_tail_check: need 0 <= s < 1/2");
    std::vector<double> v(ens.size());
    parallel_for(ens.size(), [&](std::size_t i) { v[i] = hs_norm(ens.fields[i], s); }, 16);
    if (Lambdas.empty())
        Lambdas = quantile_levels(v, grid_points);
    return fit_tail("hs", v, ens.weights, ens.weights, Lambdas, 2.0, true);
}

long sobolev_M0(double p, double lambda, double K)
{
    // ((2 M0 + 1) K)^{(p-2)/2} K <= p lambda / 2 bounds int |P_{<=M0} u|^p when mass <= K.
    const double r = (p * lambda / 2) / std::pow(K, p / 2);
    const double bound = std::pow(r, 2.0 / (p - 2));
    const double m = std::floor((bound - 1) / 2);
    if (!(m >= 0))
        return -1;
    return m > 1e9 ? 1000000000L : static_cast<long>(m);
}

double dyadic_sigma(int j, double delta) { return (std::pow(2.0, delta) - 1) * std::pow(2.0, -delta * j); }

DyadicDiagnostic dyadic_decomposition(const FourierField& u, double p, double lambda, double a, double delta)
{
    DyadicDiagnostic d;
    const double K = 2 * a;
    const long m0 = sobolev_M0(p, lambda, K);
    d.sobolev_floor_active = m0 >= 0;
    d.M0 = std::max<long>(m0, 0);
    d.total_integral = lp_integral(u, p);

    std::vector<cplx> low(2 * static_cast<std::size_t>(u.cutoff()) + 1);
    for (long n = -std::min<long>(d.M0, u.cutoff()); n <= std::min<long>(d.M0, u.cutoff()); ++n)
        low[static_cast<std::size_t>(n + u.cutoff())] = u[n];
    d.low_integral = lp_integral(FourierField(u.cutoff(), low, u.grid_size()), p);
    d.low_exceeds = d.low_integral > p * lambda / 2;

    // closed form: sum_{j>=1} (2^delta - 1) 2^{-delta j} = 1
    double ssum = 0;
    for (int j = 1; j < 4000; ++j)
        ssum += dyadic_sigma(j, delta);
    d.sigma_sum = ssum + dyadic_sigma(4000, delta) / (1 - std::pow(2.0, -delta));

    const double c = (1 - std::pow(2.0, -1.0 / p)) * std::pow(p * lambda, 1.0 / p);
    long lo = d.M0;
    const long unit = std::max<long>(d.M0, 1);
    for (int j = 1; lo < u.cutoff(); ++j) {
        const long hi = unit << j;
        DyadicBlock blk;
        blk.j = j;
        blk.lo = lo;
        blk.hi = hi;
        blk.sigma = dyadic_sigma(j, delta);
        for (long n = lo + 1; n <= std::min<long>(hi, u.cutoff()); ++n)
            blk.mass += (std::norm(u[n]) + std::norm(u[-n])) * bracket_sq(n);
        // ||P_j u||_p <= (2 M_j)^{1/2 - 1/p} ||P_j u||_2 and ||P_j u||_2^2 <= sum |g|^2 / <M_{j-1}>^2
        const double R = blk.sigma * c * std::pow(2.0 * static_cast<double>(hi), 1.0 / p - 0.5) *
                         std::sqrt(bracket_sq(lo));
        blk.threshold = R * R;
        blk.flagged = blk.mass >= blk.threshold;
        d.any_flagged = d.any_flagged || blk.flagged;
        d.blocks.push_back(blk);
        lo = hi;
        if (j > 60)
            break;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Large deviations of the window mass by exponential tilting.

namespace {

struct WindowTilt
{
    std::vector<double> rate; // Exp rate per window mode (base law has rate 1/2)
    double theta = 0, kappa = 0, eta = 0;
    bool ok = false;
    double rate_function = std::numeric_limits<double>::infinity();
};

// Newton on the convex dual G(th, ka, et) = -sum log(2 r_n) - th R2 + ka x + et y,
// r_n = 1/2 - th + ka w_n + et v_n. Stationary point: the tilted means hit (R2, x, y).
WindowTilt solve_tilt(const std::vector<double>& w, const std::vector<double>& v, double R2, double x, double y,
                      bool with_xy)
{
    WindowTilt t;
    const std::size_t J = w.size();
    std::array<double, 3> lam{0.5 - static_cast<double>(J) / R2, 0.0, 0.0};
    auto rates = [&](const std::array<double, 3>& l, std::vector<double>& r) {
        r.resize(J);
        for (std::size_t n = 0; n < J; ++n) {
            r[n] = 0.5 - l[0] + l[1] * w[n] + l[2] * v[n];
            if (!(r[n] > 0))
                return false;
        }
        return true;
    };
    auto G = [&](const std::array<double, 3>& l) {
        std::vector<double> r;
        if (!rates(l, r))
            return std::numeric_limits<double>::infinity();
        double g = -l[0] * R2 + l[1] * x + l[2] * y;
        for (double rn : r)
            g -= std::log(2 * rn);
        return g;
    };
    const int dim = with_xy ? 3 : 1;
    std::vector<double> r;
    for (int it = 0; it < 200; ++it) {
        if (!rates(lam, r))
            return t;
        // gradient and Hessian
        double grad[3] = {0, 0, 0}, H[3][3] = {{0}};
        const double tgt[3] = {R2, x, y};
        for (std::size_t n = 0; n < J; ++n) {
            const double m = 1 / r[n];
            const double d[3] = {1.0, -w[n], -v[n]}; // d r_n / d lam = -d
            // dG/dlam_k = sum m * d_k ... signs: dG/dth = sum m - R2, dG/dka = -sum w m + x, dG/det = -sum v m + y
            for (int a = 0; a < dim; ++a) {
                grad[a] += d[a] * m;
                for (int b = 0; b < dim; ++b)
                    H[a][b] += d[a] * d[b] * m * m;
            }
        }
        grad[0] -= tgt[0];
        grad[1] += tgt[1];
        grad[2] += tgt[2];
        double gnorm = 0;
        for (int a = 0; a < dim; ++a)
            gnorm += grad[a] * grad[a];
        if (std::sqrt(gnorm) < 1e-10 * (1 + R2)) {
            t.ok = true;
            break;
        }
        // solve H step = -grad (dim <= 3, Gaussian elimination)
        double A[3][4];
        for (int a = 0; a < dim; ++a) {
            for (int b = 0; b < dim; ++b)
                A[a][b] = H[a][b];
            A[a][dim] = -grad[a];
        }
        for (int c = 0; c < dim; ++c) {
            int piv = c;
            for (int a = c + 1; a < dim; ++a)
                if (std::abs(A[a][c]) > std::abs(A[piv][c]))
                    piv = a;
            for (int b = 0; b <= dim; ++b)
                std::swap(A[c][b], A[piv][b]);
            if (std::abs(A[c][c]) < 1e-300)
                return t;
            for (int a = c + 1; a < dim; ++a) {
                const double f = A[a][c] / A[c][c];
                for (int b = c; b <= dim; ++b)
                    A[a][b] -= f * A[c][b];
            }
        }
        double step[3] = {0, 0, 0};
        for (int c = dim - 1; c >= 0; --c) {
            double s = A[c][dim];
            for (int b = c + 1; b < dim; ++b)
                s -= A[c][b] * step[b];
            step[c] = s / A[c][c];
        }
        const double g0 = G(lam);
        double alpha = 1;
        std::array<double, 3> trial;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            trial = lam;
            for (int a = 0; a < dim; ++a)
                trial[a] += alpha * step[a];
            if (G(trial) <= g0)
                break;
        }
        if (G(trial) > g0 || G(trial) < -1e12)
            return t;
        lam = trial;
    }
    if (!t.ok || !rates(lam, r))
        return t;
    t.rate = r;
    t.theta = lam[0];
    t.kappa = lam[1];
    t.eta = lam[2];
    t.rate_function = -G(lam);
    return t;
}

} // namespace

LargeDeviationReport large_deviation_check(long window_M, long window_N, const std::vector<double>& R_list,
                                           const std::optional<ConditioningSpec>& spec,
                                           const std::vector<double>& eps_list, const LargeDeviationOptions& opt)
{
    if (window_N < 1)
        throw ConfigError("large_deviation_check: window_N must be >= 1");
    const double ratio = static_cast<double>(window_M) / static_cast<double>(window_N);
    if (ratio < 0.5 || ratio > 2.0)
        throw ConfigError("large_deviation_check: need window_M / window_N in [1/2, 2]");
    for (double R : R_list)
        if (R < 5 * std::sqrt(static_cast<double>(window_N)) - 1e-12)
            throw ConfigError("large_deviation_check: every R must satisfy R >= 5 sqrt(N)");
    if (!eps_list.empty() && !spec)
        throw ConfigError("large_deviation_check: conditioned runs need a ConditioningSpec");

    LargeDeviationReport rep;
    rep.window_M = window_M;
    rep.window_N = window_N;
    const long J = 2 * window_N + 1;
    std::vector<double> w(static_cast<std::size_t>(J)), v(static_cast<std::size_t>(J));
    for (long k = 0; k < J; ++k) {
        const long n = window_M - window_N + k;
        w[static_cast<std::size_t>(k)] = 1.0 / bracket_sq(n);
        v[static_cast<std::size_t>(k)] = freq(n) / bracket_sq(n);
    }

    // Runs: unconditioned first (eps = 0), then each eps.
    std::vector<double> runs{0.0};
    for (double e : eps_list)
        runs.push_back(e);

    std::optional<DensityGrid> rest, full;
    if (!eps_list.empty()) {
        const double eps_max = *std::max_element(eps_list.begin(), eps_list.end());
        CharFnSpec rs;
        rs.tail_start = static_cast<int>(window_N + 1);
        rs.window_M = window_M;
        rs.product_cutoff = opt.product_cutoff;
        const auto cf = char_fn_evaluator(rs);
        const double bmax = std::max(8.0, std::abs(spec->b) + std::abs(cf->mean_momentum()) + 12 * std::sqrt(cf->var_momentum()) + 2);
        rest = invert_density(rs, {0.0, spec->a + 2 * eps_max, opt.grid_n}, {-bmax, bmax, opt.grid_n});
        CharFnSpec fs;
        fs.product_cutoff = opt.product_cutoff;
        full = invert_density(fs, default_a_axis(), default_b_axis());
    }

    for (std::size_t ri = 0; ri < runs.size(); ++ri) {
        const double eps = runs[ri];
        const bool cond = eps > 0;
        double box0 = 1;
        if (cond) {
            box0 = full->box_integral(spec->a - eps, spec->a + eps, spec->b - eps, spec->b + eps);
            if (!(box0 > 0))
                throw MissingDensity("large_deviation_check: f_0 box integral vanishes");
        }
        auto B = [&](double xw, double yw) {
            const double at = spec->a - xw, bt = spec->b - yw;
            return rest->box_integral(at - eps, at + eps, bt - eps, bt + eps);
        };

        for (std::size_t k = 0; k < R_list.size(); ++k) {
            const double R = R_list[k];
            const double R2 = R * R;
            WindowTilt tilt;
            if (!cond) {
                tilt = solve_tilt(w, v, R2, 0, 0, false);
            } else {
                // Pick the window target (x, y) maximizing log B(x, y) - I(x, y).
                double best = -std::numeric_limits<double>::infinity();
                const auto& bax = rest->b_axis();
                const int nx = 40, ny = 60;
                for (int ix = 1; ix < nx; ++ix) {
                    const double x = (spec->a + eps) * ix / nx;
                    for (int iy = 0; iy <= ny; ++iy) {
                        const double bt = bax.min + (bax.max - bax.min) * iy / ny;
                        const double y = spec->b - bt;
                        const double lb = B(x, y);
                        if (!(lb > 0))
                            continue;
                        auto t = solve_tilt(w, v, R2, x, y, true);
                        if (!t.ok)
                            continue;
                        const double score = std::log(lb) - t.rate_function;
                        if (score > best) {
                            best = score;
                            tilt = t;
                        }
                    }
                }
                if (!tilt.ok)
                    tilt = solve_tilt(w, v, R2, 0, 0, false);
            }
            if (!tilt.ok)
                throw Error("large_deviation_check: could not construct a tilted proposal");

            std::vector<double> val(opt.samples);
            const std::uint64_t stream = opt.stream + 1000 * ri + k;
            parallel_for(
                opt.samples,
                [&](std::size_t i) {
                    double W = 0, xw = 0, yw = 0, loglr = 0;
                    for (long m = 0; m < J; ++m) {
                        const auto blk = uniform_pair({opt.seed, stream, i, static_cast<std::uint32_t>(m)});
                        const double r = tilt.rate[static_cast<std::size_t>(m)];
                        const double xm = -std::log(blk[0]) / r;
                        W += xm;
                        xw += w[static_cast<std::size_t>(m)] * xm;
                        yw += v[static_cast<std::size_t>(m)] * xm;
                        loglr += -std::log(2 * r) + (r - 0.5) * xm;
                    }
                    if (W < R2) {
                        val[i] = 0;
                        return;
                    }
                    double f = std::exp(loglr);
                    if (cond)
                        f *= B(xw, yw) / box0;
                    val[i] = f;
                },
                64);
            const auto m = stats::mean(val);
            LargeDeviationPoint pt;
            pt.R = R;
            pt.epsilon = eps;
            pt.survival = m.value;
            pt.se = m.se;
            pt.ess = stats::effective_sample_size(val);
            if (!cond)
                pt.oracle = stats::chi_square_survival(2.0 * static_cast<double>(J), R2);
            rep.points.push_back(pt);
        }
    }

    // Envelope C exp(-R^2/8): C from the smallest R, per run.
    const double rmin = *std::min_element(R_list.begin(), R_list.end());
    std::vector<double> Cs;
    for (std::size_t ri = 0; ri < runs.size(); ++ri)
        for (const auto& pt : rep.points)
            if (pt.epsilon == runs[ri] && pt.R == rmin) {
                const double C = pt.survival * std::exp(rmin * rmin / 8);
                if (runs[ri] > 0)
                    Cs.push_back(C);
                else if (eps_list.empty())
                    Cs.push_back(C);
            }
    rep.fitted_C = Cs;
    if (!Cs.empty()) {
        rep.shared_C = *std::max_element(Cs.begin(), Cs.end());
        const double cmin = *std::min_element(Cs.begin(), Cs.end());
        rep.C_spread = cmin > 0 ? rep.shared_C / cmin : std::numeric_limits<double>::infinity();
    }
    bool below = true;
    for (auto& pt : rep.points) {
        if (pt.epsilon == 0) {
            const double Cu = [&] {
                for (const auto& q : rep.points)
                    if (q.epsilon == 0 && q.R == rmin)
                        return q.survival * std::exp(rmin * rmin / 8);
                return 0.0;
            }();
            pt.envelope = Cu * std::exp(-pt.R * pt.R / 8);
            rep.oracle_match = rep.oracle_match && std::abs(pt.survival - pt.oracle) <= 3 * pt.se;
        } else {
            pt.envelope = rep.shared_C * std::exp(-pt.R * pt.R / 8);
        }
        pt.below_envelope = pt.survival <= pt.envelope * (1 + 1e-12) + 3 * pt.se;
        below = below && pt.below_envelope;
    }
    rep.verdict = below && rep.oracle_match && (eps_list.empty() || rep.C_spread <= 2.0);
    return rep;
}

} // namespace levygibbs
