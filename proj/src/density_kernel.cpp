#include "levygibbs/density_kernel.hpp"

#include "levygibbs/error.hpp"
#include "levygibbs/fft.hpp"
#include "levygibbs/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace levygibbs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kTerms = 12;       // log-series order
constexpr double kSeriesRadius = 0.05; // max |2 i w (s +- t n~)| handed to the series
constexpr long kDirectTail = 16;  // explicit terms before the closed-form integral

inline std::size_t slot(int k, int j) { return static_cast<std::size_t>(k * (kTerms + 1) + j); }

double binom(int n, int k)
{
    double r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace

bool CharFnSpec::includes(long n) const
{
    if (weights == WeightMode::BrownianLoop && n == 0)
        return false;
    return std::abs(n - center()) >= tail_start;
}

double CharFnSpec::weight(long n) const
{
    const double k = freq(n);
    if (weights == WeightMode::BrownianLoop)
        return n == 0 ? 0.0 : 1.0 / (k * k);
    return 1.0 / (1.0 + k * k);
}

void CharFnSpec::validate() const
{
    if (tail_start < 0)
        throw ConfigError("CharFnSpec: tail_start must be >= 0");
    const long need = std::abs(center()) + tail_start + 4;
    if (product_cutoff < need)
        throw ConfigError("CharFnSpec: product_cutoff must be >= |window_M| + tail_start + 4 (= " +
                          std::to_string(need) + ")");
}

std::string describe(const CharFnSpec& spec)
{
    std::ostringstream os;
    os << "tail_start=" << spec.tail_start << " product_cutoff=" << spec.product_cutoff;
    if (spec.window_M)
        os << " window_M=" << *spec.window_M;
    os << " weights=" << (spec.weights == WeightMode::Wiener ? "wiener" : "bm_loop");
    return os.str();
}

CharFn::CharFn(const CharFnSpec& spec)
  : spec_(spec)
{
    spec_.validate();
    base_ = std::abs(spec_.center()) + spec_.tail_start;
    const long cutoff = spec_.product_cutoff;

    suffix_.assign(slot(kTerms, kTerms) + 1, {});
    beyond_.assign(slot(kTerms, kTerms) + 1, 0.0);
    for (int k = 1; k <= kTerms; ++k) {
        for (int j = 0; j <= k; j += 2) {
            auto& v = suffix_[slot(k, j)];
            v.assign(static_cast<std::size_t>(cutoff) + 2, 0.0);
            for (long n = cutoff; n >= 1; --n)
                v[static_cast<std::size_t>(n)] =
                    v[static_cast<std::size_t>(n) + 1] + std::pow(spec_.weight(n), k) * std::pow(freq(n), j);
            beyond_[slot(k, j)] = em_tail(k, j, cutoff + 1);
        }
    }

    for (long n = -base_; n <= base_; ++n) {
        if (!spec_.includes(n))
            continue;
        const double w = spec_.weight(n), wk = w * freq(n);
        mean_x_ += 2 * w;
        var_x_ += 4 * w * w;
        mean_y_ += 2 * wk;
        var_y_ += 4 * wk * wk;
        max_w_ = std::max(max_w_, w);
        max_wk_ = std::max(max_wk_, std::abs(wk));
    }
    const long next = base_ + 1;
    mean_x_ += 2 * 2 * power_sum(1, 0, next);
    var_x_ += 2 * 4 * power_sum(2, 0, next);
    var_y_ += 2 * 4 * power_sum(2, 2, next);
    max_w_ = std::max(max_w_, spec_.weight(next));
    max_wk_ = std::max(max_wk_, spec_.weight(next) * freq(next));
}

double CharFn::power_sum(int k, int j, long from) const
{
    from = std::max<long>(from, 1);
    if (from <= spec_.product_cutoff)
        return suffix_[slot(k, j)][static_cast<std::size_t>(from)] + beyond_[slot(k, j)];
    return em_tail(k, j, from);
}

double CharFn::em_tail(int k, int j, long from) const
{
    // Direct terms, then midpoint Euler-Maclaurin: sum_{n>=a} f(n) ~ int_{a-1/2}^inf f + f'(a-1/2)/24.
    double s = 0;
    for (long n = from; n < from + kDirectTail; ++n)
        s += std::pow(spec_.weight(n), k) * std::pow(freq(n), j);
    const double x0 = static_cast<double>(from + kDirectTail) - 0.5;
    const double y0 = 2 * kPi * x0;
    double integral = 0, deriv = 0;
    if (spec_.weights == WeightMode::BrownianLoop) {
        const int e = j - 2 * k;
        integral = std::pow(y0, e + 1) / static_cast<double>(-(e + 1));
        deriv = e * std::pow(y0, e - 1);
    } else {
        // (1 + y^2)^-k = y^-2k sum_m (-1)^m C(k+m-1, m) y^-2m
        for (int m = 0; m < 200; ++m) {
            const int e = j - 2 * k - 2 * m;
            const double term = (m % 2 ? -1.0 : 1.0) * binom(k + m - 1, m) * std::pow(y0, e + 1) / (-(e + 1));
            integral += term;
            if (std::abs(term) < 1e-18 * std::abs(integral))
                break;
        }
        const double q = 1 + y0 * y0;
        deriv = j * std::pow(y0, j - 1) * std::pow(q, -k) - 2.0 * k * std::pow(y0, j + 1) * std::pow(q, -k - 1);
        if (j == 0)
            deriv = -2.0 * k * y0 * std::pow(q, -k - 1);
    }
    // integral is in y = 2 pi x; convert back to x
    return s + integral / (2 * kPi) + 2 * kPi * deriv / 24.0;
}

long CharFn::explicit_limit(double s, double t) const
{
    const double as = std::abs(s), at = std::abs(t);
    long n_thr = 0;
    if (as > 0 || at > 0) {
        // r(n) <= 2 (|s| y^2 + |t| y) with y = 1/(2 pi n); r <= kSeriesRadius for y <= y*
        const double ystar = 2 * kSeriesRadius / (2 * at + std::sqrt(4 * at * at + 8 * as * kSeriesRadius));
        const double n = 1.0 / (2 * kPi * ystar);
        n_thr = n > 1e15 ? static_cast<long>(1e15) : static_cast<long>(std::ceil(n)) + 1;
    }
    return std::max(base_, n_thr);
}

std::complex<double> CharFn::operator()(double s, double t) const
{
    using C = std::complex<double>;
    const long nx = explicit_limit(s, t);

    C prod{1.0, 0.0};
    int scaled = 0;
    constexpr double kBig = 1e150;
    auto renorm = [&] {
        if (std::abs(prod.real()) + std::abs(prod.imag()) > kBig) {
            prod /= kBig;
            ++scaled;
        }
    };

    if (spec_.includes(0))
        prod *= C{1.0, -2.0 * spec_.weight(0) * s};
    for (long n = 1; n <= nx; ++n) {
        const bool plus = spec_.includes(n), minus = spec_.includes(-n);
        if (!plus && !minus)
            continue;
        const double w = spec_.weight(n), k = freq(n);
        if (plus && minus) {
            const double alpha = 2 * w * s, beta = 2 * w * k * t;
            prod *= C{1.0 - alpha * alpha + beta * beta, -2.0 * alpha};
        } else {
            prod *= C{1.0, -2.0 * w * (s + (plus ? k : -k) * t)};
        }
        renorm();
        if (scaled >= 2)
            return {0.0, 0.0}; // |f^| < 1e-300: every remaining factor has modulus >= 1
    }

    // log of the remaining pairs: sum_k (2i)^k / k * sum_n w^k [(s + t n~)^k + (s - t n~)^k]
    C logv{0.0, 0.0};
    C twoi_k{1.0, 0.0};
    double sp[kTerms + 1], tp[kTerms + 1];
    sp[0] = tp[0] = 1;
    for (int i = 1; i <= kTerms; ++i) {
        sp[i] = sp[i - 1] * s;
        tp[i] = tp[i - 1] * t;
    }
    for (int k = 1; k <= kTerms; ++k) {
        twoi_k *= C{0.0, 2.0};
        double acc = 0;
        for (int j = 0; j <= k; j += 2)
            acc += binom(k, j) * sp[k - j] * tp[j] * power_sum(k, j, nx + 1);
        logv += twoi_k * (2.0 * acc / k);
    }

    C result = std::exp(logv) / prod;
    for (int i = 0; i < scaled; ++i)
        result /= kBig;
    return result;
}

double CharFn::residual_bound(double s, double t) const
{
    const long nx = explicit_limit(s, t);
    const long n = nx + 1;
    const double w = spec_.weight(n);
    const double r = 2 * w * (std::abs(s) + std::abs(t) * freq(n));
    return 2 * std::pow(r, kTerms + 1) * (1.0 + static_cast<double>(n) / kTerms) / ((kTerms + 1) * (1 - r));
}

std::shared_ptr<const CharFn> char_fn_evaluator(const CharFnSpec& spec)
{
    static std::mutex mutex;
    static std::vector<std::shared_ptr<const CharFn>> cache;
    std::lock_guard lock(mutex);
    for (const auto& c : cache)
        if (c->spec() == spec)
            return c;
    auto c = std::make_shared<const CharFn>(spec);
    if (cache.size() > 32)
        cache.erase(cache.begin());
    cache.push_back(c);
    return c;
}

std::complex<double> char_fn(const CharFnSpec& spec, double s, double t) { return (*char_fn_evaluator(spec))(s, t); }

EnvelopeFit envelope_fit(const CharFnSpec& spec, int points_per_axis, double safety)
{
    const auto cf = char_fn_evaluator(spec);
    std::vector<double> nodes{0.0};
    for (int i = 0; i < points_per_axis; ++i) {
        const double v = std::pow(10.0, -2.0 + 6.0 * i / std::max(1, points_per_axis - 1));
        nodes.push_back(v);
        nodes.push_back(-v);
    }
    EnvelopeFit fit;
    for (double s : nodes)
        for (double t : nodes) {
            const double r = std::abs((*cf)(s, t)) * (1 + s * s) * (1 + t * t);
            fit.max_ratio = std::max(fit.max_ratio, r);
            ++fit.lattice_points;
        }
    fit.C = safety * fit.max_ratio;
    return fit;
}

// ---------------------------------------------------------------------------

DensityGrid::DensityGrid(Axis a, Axis b, std::vector<double> values, CharFnSpec spec, InversionMeta meta)
  : a_(a)
  , b_(b)
  , values_(std::move(values))
  , spec_(std::move(spec))
  , meta_(meta)
{
    if (a_.n < 2 || b_.n < 2 || values_.size() != a_.n * b_.n)
        throw ConfigError("DensityGrid: values do not match axes");
    for (double v : values_)
        if (!std::isfinite(v))
            throw Error("DensityGrid: non-finite value");
}

double DensityGrid::operator()(double a, double b) const
{
    if (a < 0 || a < a_.min || a > a_.max || b < b_.min || b > b_.max)
        return 0.0;
    const double x = (a - a_.min) / a_.step(), y = (b - b_.min) / b_.step();
    const auto i = std::min(static_cast<std::size_t>(x), a_.n - 2);
    const auto j = std::min(static_cast<std::size_t>(y), b_.n - 2);
    const double fx = x - static_cast<double>(i), fy = y - static_cast<double>(j);
    return (1 - fx) * ((1 - fy) * at(i, j) + fy * at(i, j + 1)) + fx * ((1 - fy) * at(i + 1, j) + fy * at(i + 1, j + 1));
}

namespace {

// Integrals over [lo, hi] of the piecewise-linear hat functions of an axis.
std::vector<std::pair<std::size_t, double>> hat_integrals(const Axis& ax, double lo, double hi)
{
    std::vector<std::pair<std::size_t, double>> out;
    lo = std::max(lo, ax.min);
    hi = std::min(hi, ax.max);
    if (!(hi > lo))
        return out;
    const double h = ax.step();
    const auto first = static_cast<std::size_t>(std::floor((lo - ax.min) / h));
    const auto last = std::min(ax.n - 1, static_cast<std::size_t>(std::ceil((hi - ax.min) / h)));
    for (std::size_t i = first; i <= last; ++i) {
        const double xi = ax.at(i);
        double total = 0;
        // left piece on [xi - h, xi]: (x - xi + h)/h ; right piece on [xi, xi + h]: (xi + h - x)/h
        if (i > 0) {
            const double l = std::max(lo, xi - h), r = std::min(hi, xi);
            if (r > l)
                total += ((r - xi + h) * (r - xi + h) - (l - xi + h) * (l - xi + h)) / (2 * h);
        }
        if (i + 1 < ax.n) {
            const double l = std::max(lo, xi), r = std::min(hi, xi + h);
            if (r > l)
                total += ((xi + h - l) * (xi + h - l) - (xi + h - r) * (xi + h - r)) / (2 * h);
        }
        if (total != 0)
            out.emplace_back(i, total);
    }
    return out;
}

} // namespace

double DensityGrid::box_integral(double a0, double a1, double b0, double b1) const
{
    const auto A = hat_integrals(a_, std::max(a0, 0.0), a1);
    const auto B = hat_integrals(b_, b0, b1);
    double s = 0;
    for (const auto& [i, wa] : A) {
        double row = 0;
        for (const auto& [j, wb] : B)
            row += wb * at(i, j);
        s += wa * row;
    }
    return s;
}

double DensityGrid::integral() const
{
    double s = 0;
    for (std::size_t i = 0; i < a_.n; ++i) {
        const double wa = (i == 0 || i + 1 == a_.n) ? 0.5 : 1.0;
        double row = 0;
        for (std::size_t j = 0; j < b_.n; ++j)
            row += ((j == 0 || j + 1 == b_.n) ? 0.5 : 1.0) * at(i, j);
        s += wa * row;
    }
    return s * a_.step() * b_.step();
}

double DensityGrid::symmetry_defect() const
{
    double d = 0;
    for (std::size_t i = 0; i < a_.n; ++i)
        for (std::size_t j = 0; j < b_.n; ++j)
            d = std::max(d, std::abs(at(i, j) - (*this)(a_.at(i), -b_.at(j))));
    return d;
}

double DensityGrid::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

Axis default_a_axis() { return {0.0, 20.0, 512}; }
Axis default_b_axis() { return {-6.0, 6.0, 512}; }

namespace {

// Pointwise error bound (1/4 pi^2) * integral of |f^| over |s| > S (all t).
double tail_outside_s(const CharFn& cf, double S)
{
    constexpr int nu = 32, nv = 65;
    const double umax = std::log(64.0), du = umax / (nu - 1);
    const double vmax = 9.0, dv = 2 * vmax / (nv - 1);
    double total = 0;
    for (int iu = 0; iu < nu; ++iu) {
        const double s = S * std::exp(iu * du);
        const double ws = ((iu == 0 || iu == nu - 1) ? 0.5 : 1.0) * du * s;
        for (int iv = 0; iv < nv; ++iv) {
            const double v = -vmax + iv * dv;
            const double t = std::sinh(v);
            const double wt = ((iv == 0 || iv == nv - 1) ? 0.5 : 1.0) * dv * std::cosh(v);
            total += ws * wt * std::abs(cf(s, t));
        }
    }
    return 2 * total / (4 * kPi * kPi);
}

// Same over |s| <= S, |t| > T.
double tail_outside_t(const CharFn& cf, double S, double T)
{
    constexpr int nu = 32, nv = 65;
    const double umax = std::log(64.0), du = umax / (nu - 1);
    const double vmax = std::asinh(S), dv = 2 * vmax / (nv - 1);
    double total = 0;
    for (int iu = 0; iu < nu; ++iu) {
        const double t = T * std::exp(iu * du);
        const double wt = ((iu == 0 || iu == nu - 1) ? 0.5 : 1.0) * du * t;
        for (int iv = 0; iv < nv; ++iv) {
            const double v = -vmax + iv * dv;
            const double s = std::sinh(v);
            const double ws = ((iv == 0 || iv == nv - 1) ? 0.5 : 1.0) * dv * std::cosh(v);
            total += ws * wt * std::abs(cf(s, t));
        }
    }
    return 2 * total / (4 * kPi * kPi);
}

// Smallest s on a geometric scan with |f(s)| below thr.
template <class F>
double first_below(F&& f, double thr, double start = 0.5)
{
    double x = start;
    for (int i = 0; i < 400; ++i, x *= 1.1)
        if (std::abs(f(x)) < thr)
            return x;
    return x;
}

} // namespace

DensityGrid invert_density(const CharFnSpec& spec, const Axis& a, const Axis& b, const InversionOptions& opt)
{
    if (a.n < 2 || b.n < 2 || !(a.max > a.min) || !(b.max > b.min))
        throw ConfigError("invert_density: axes need at least two points and positive extent");
    const auto cfp = char_fn_evaluator(spec);
    const CharFn& cf = *cfp;
    const double da = a.step(), db = b.step();
    const double neg = std::max(opt.negative_extent, 2 * da);

    // Periods: images of the density at distance period - range must be negligible.
    const double range_a = a.max - a.min, range_b = b.max - b.min;
    double La = opt.period_a;
    if (La <= 0)
        La = std::max(2 * range_a + neg, range_a + neg + cf.mean_mass() + 60 * cf.max_weight());
    double Lb = opt.period_b;
    if (Lb <= 0)
        Lb = std::max(2 * range_b, range_b + std::abs(cf.mean_momentum()) + 60 * cf.max_momentum_weight());
    if (La < range_a + neg)
        throw ConfigError("invert_density: period_a must exceed the a range plus the negative strip");
    const std::size_t Pa = fft::good_size(static_cast<std::size_t>(std::ceil(La / da)) + 1);
    const std::size_t Pb = fft::good_size(static_cast<std::size_t>(std::ceil(Lb / db)) + 1);
    const double ds = 2 * kPi / (static_cast<double>(Pa) * da);
    const double dt = 2 * kPi / (static_cast<double>(Pb) * db);

    InversionMeta meta;
    meta.ds = ds;
    meta.dt = dt;
    meta.period_a = static_cast<double>(Pa) * da;
    meta.period_b = static_cast<double>(Pb) * db;

    // Cutoffs.
    const double half_tol = 0.5 * opt.tolerance;
    double S = opt.s_cutoff, T = opt.t_cutoff;
    const bool auto_s = S <= 0, auto_t = T <= 0;
    if (auto_s)
        S = first_below([&](double x) { return cf(x, 0.0); }, 1e-3 * opt.tolerance);
    if (auto_t)
        T = first_below([&](double x) { return cf(0.0, x); }, 1e-3 * opt.tolerance);
    double err_s = tail_outside_s(cf, S);
    while (auto_s && err_s > half_tol && S < 1e9) {
        S *= 1.25;
        err_s = tail_outside_s(cf, S);
    }
    double err_t = tail_outside_t(cf, S, T);
    while (auto_t && err_t > half_tol && T < 1e9) {
        T *= 1.25;
        err_t = tail_outside_t(cf, S, T);
    }
    meta.s_cutoff = S;
    meta.t_cutoff = T;
    meta.truncation_error = err_s + err_t;
    if (meta.truncation_error > opt.tolerance) {
        std::ostringstream os;
        os << "invert_density: |f^| mass outside cutoffs (s=" << S << ", t=" << T << ") gives error "
           << meta.truncation_error << " > tolerance " << opt.tolerance;
        throw CutoffTooSmall(os.str());
    }

    const long Ks = static_cast<long>(std::floor(S / ds));
    const long Kt = static_cast<long>(std::floor(T / dt));
    const double evals = static_cast<double>(2 * Ks + 1) * static_cast<double>(Kt + 1);
    if (evals > static_cast<double>(opt.max_evaluations)) {
        std::ostringstream os;
        os << "invert_density: cutoffs s=" << S << ", t=" << T << " need " << evals
           << " characteristic-function evaluations, above the budget " << opt.max_evaluations;
        throw CutoffTooSmall(os.str());
    }
    meta.envelope_C = envelope_fit(spec, 17).C;

    // f^ on k in [-Ks, Ks], l in [0, Kt]; negative l by conjugate symmetry.
    const std::size_t ns = static_cast<std::size_t>(2 * Ks + 1);
    std::vector<std::complex<double>> F(ns * static_cast<std::size_t>(Kt + 1));
    parallel_for(
        static_cast<std::size_t>(Kt + 1),
        [&](std::size_t l) {
            const double t = static_cast<double>(l) * dt;
            for (long k = -Ks; k <= Ks; ++k)
                F[l * ns + static_cast<std::size_t>(k + Ks)] = cf(static_cast<double>(k) * ds, t);
        },
        1);

    // Rows kept after the a-transform: the output grid and the a < 0 strip.
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < a.n; ++i)
        rows.push_back(i);
    const double period = static_cast<double>(Pa) * da;
    std::vector<std::size_t> ring_rows;
    for (std::size_t i = a.n; i < Pa; ++i) {
        const double av = a.min + static_cast<double>(i) * da - period;
        if (av >= -neg && av < -0.5 * da) {
            ring_rows.push_back(rows.size());
            rows.push_back(i);
        }
    }

    // Stage 1: transform along s for every t column.
    const std::size_t nt = static_cast<std::size_t>(2 * Kt + 1);
    std::vector<std::complex<double>> G(rows.size() * nt);
    parallel_for(nt, [&](std::size_t col) {
        const long l = static_cast<long>(col) - Kt;
        std::vector<std::complex<double>> buf(Pa);
        const long P = static_cast<long>(Pa);
        for (long k = -Ks; k <= Ks; ++k) {
            std::complex<double> v = l >= 0 ? F[static_cast<std::size_t>(l) * ns + static_cast<std::size_t>(k + Ks)]
                                            : std::conj(F[static_cast<std::size_t>(-l) * ns +
                                                          static_cast<std::size_t>(-k + Ks)]);
            v *= std::polar(1.0, -static_cast<double>(k) * ds * a.min);
            buf[static_cast<std::size_t>(((k % P) + P) % P)] += v;
        }
        fft::forward(buf);
        for (std::size_t r = 0; r < rows.size(); ++r)
            G[r * nt + col] = buf[rows[r]];
    });
    F.clear();
    F.shrink_to_fit();

    // Stage 2: transform along t for every kept row.
    const double scale = ds * dt / (4 * kPi * kPi);
    std::vector<double> out(rows.size() * b.n);
    parallel_for(rows.size(), [&](std::size_t r) {
        std::vector<std::complex<double>> buf(Pb);
        const long P = static_cast<long>(Pb);
        for (long l = -Kt; l <= Kt; ++l) {
            auto v = G[r * nt + static_cast<std::size_t>(l + Kt)] * std::polar(1.0, -static_cast<double>(l) * dt * b.min);
            buf[static_cast<std::size_t>(((l % P) + P) % P)] += v;
        }
        fft::forward(buf);
        for (std::size_t j = 0; j < b.n; ++j)
            out[r * b.n + j] = buf[j].real() * scale;
    });

    double ring = 0;
    for (std::size_t r : ring_rows)
        for (std::size_t j = 0; j < b.n; ++j)
            ring = std::max(ring, std::abs(out[r * b.n + j]));
    meta.ringing = ring;

    out.resize(a.n * b.n);
    return DensityGrid(a, b, std::move(out), spec, meta);
}

PositivityReport positivity_report(const DensityGrid& grid, double a_min, double a_max, double b_lo, double b_hi,
                                   double ringing_multiple)
{
    PositivityReport rep;
    rep.ringing_tolerance = ringing_multiple * grid.meta().ringing;
    if (a_max < 0) {
        rep.expected_zero_region = true;
        rep.pass = false;
        return rep;
    }
    const auto& A = grid.a_axis();
    const auto& B = grid.b_axis();
    rep.minimum = std::numeric_limits<double>::infinity();
    const double eps = 1e-9;
    for (std::size_t i = 0; i < A.n; ++i) {
        const double a = A.at(i);
        if (a < a_min - eps || a > a_max + eps)
            continue;
        for (std::size_t j = 0; j < B.n; ++j) {
            const double b = B.at(j);
            if (b < b_lo - eps || b > b_hi + eps)
                continue;
            const double v = grid.at(i, j);
            ++rep.probed;
            if (v < rep.minimum) {
                rep.minimum = v;
                rep.min_a = a;
                rep.min_b = b;
            }
            if (v <= rep.ringing_tolerance)
                rep.failing_nodes.emplace_back(a, b);
        }
    }
    if (rep.probed == 0)
        throw ConfigError("positivity_report: probed region contains no grid nodes");
    rep.mirror_value = grid(rep.min_a, -rep.min_b);
    rep.pass = rep.failing_nodes.empty() && a_min > 0;
    if (a_min <= 0)
        rep.expected_zero_region = a_max <= 0;
    return rep;
}

double MarginalDensity::integral() const
{
    double s = 0;
    for (std::size_t j = 0; j < values.size(); ++j)
        s += ((j == 0 || j + 1 == values.size()) ? 0.5 : 1.0) * values[j];
    return s * b.step();
}

MarginalDensity marginal_momentum_density(const CharFnSpec& spec, const Axis& b, double t_cutoff, double tolerance)
{
    const auto cfp = char_fn_evaluator(spec);
    const CharFn& cf = *cfp;
    const double range = b.max - b.min;
    const double L = std::max(2 * range, range + std::abs(cf.mean_momentum()) + 60 * cf.max_momentum_weight());
    const double dt = 2 * kPi / L;

    auto tail = [&](double T) {
        // (1/pi) int_T^inf |f^(0,t)| dt on a log scale out to 64 T
        constexpr int n = 64;
        const double du = std::log(64.0) / (n - 1);
        double s = 0;
        for (int i = 0; i < n; ++i) {
            const double t = T * std::exp(i * du);
            s += ((i == 0 || i == n - 1) ? 0.5 : 1.0) * du * t * std::abs(cf(0.0, t));
        }
        return s / kPi;
    };
    MarginalDensity md;
    md.b = b;
    double T = t_cutoff;
    if (T <= 0) {
        T = first_below([&](double x) { return cf(0.0, x); }, 1e-3 * tolerance);
        while (tail(T) > tolerance && T < 1e9)
            T *= 1.25;
    }
    md.t_cutoff = T;
    md.truncation_error = tail(T);
    if (md.truncation_error > tolerance)
        throw CutoffTooSmall("marginal_momentum_density: t cutoff leaves error " +
                             std::to_string(md.truncation_error));

    const long K = static_cast<long>(std::floor(T / dt));
    std::vector<std::complex<double>> phi(static_cast<std::size_t>(K + 1));
    parallel_for(phi.size(), [&](std::size_t l) { phi[l] = cf(0.0, static_cast<double>(l) * dt); });
    md.values.resize(b.n);
    parallel_for(b.n, [&](std::size_t j) {
        const double y = b.at(j);
        double s = phi[0].real();
        for (long l = 1; l <= K; ++l)
            s += 2 * (std::polar(1.0, -static_cast<double>(l) * dt * y) * phi[static_cast<std::size_t>(l)]).real();
        md.values[j] = s * dt / (2 * kPi);
    });
    return md;
}

double sech2_density(double b, double k)
{
    const double c = std::cosh(0.5 * k * b);
    return 0.25 * k / (c * c);
}

double sech2_cdf(double b, double k) { return 0.5 * (1.0 + std::tanh(0.5 * k * b)); }

double fit_sech2_scale(const Axis& b, const std::vector<double>& density)
{
    auto loss = [&](double logk) {
        const double k = std::exp(logk);
        double s = 0;
        for (std::size_t j = 0; j < density.size(); ++j) {
            const double r = density[j] - sech2_density(b.at(j), k);
            s += r * r;
        }
        return s;
    };
    const auto res = boost::math::tools::brent_find_minima(loss, std::log(0.01), std::log(1000.0), 52);
    return std::exp(res.first);
}

double convolution_consistency(const DensityGrid& f0, const DensityGrid& f1)
{
    const auto& A0 = f0.a_axis();
    const auto& A1 = f1.a_axis();
    const auto& B = f0.b_axis();
    if (f1.b_axis().n != B.n || f1.b_axis().min != B.min || f1.b_axis().max != B.max)
        throw MismatchedSpec("convolution_consistency: b axes differ");
    if (A1.min != 0.0)
        throw MismatchedSpec("convolution_consistency: f1 a axis must start at 0");
    const double h = A1.step();
    double worst = 0;
    for (std::size_t i = 0; i < A0.n; ++i) {
        const double a = A0.at(i);
        for (std::size_t j = 0; j < B.n; ++j) {
            // g(x) = f1(x, b) e^{-(a-x)/2} / 2 on [0, a]: Simpson over whole intervals
            // (3/8 rule on the last three when their count is odd), trapezoid on a partial tail
            auto g = [&](std::size_t m) { return f1.at(m, j) * 0.5 * std::exp(-0.5 * (a - A1.at(m))); };
            std::size_t m = 0;
            while (m + 1 < A1.n && A1.at(m + 1) <= a + 1e-12 * h)
                ++m;
            double s = 0;
            std::size_t k = 0;
            if (m == 1)
                s = 0.5 * h * (g(0) + g(1));
            const std::size_t simpson_end = m >= 3 && m % 2 == 1 ? m - 3 : (m >= 2 ? m : 0);
            for (; k + 2 <= simpson_end; k += 2)
                s += h / 3 * (g(k) + 4 * g(k + 1) + g(k + 2));
            if (simpson_end != m && m >= 3)
                s += 3 * h / 8 * (g(k) + 3 * g(k + 1) + 3 * g(k + 2) + g(k + 3));
            if (m + 1 < A1.n && a > A1.at(m) + 1e-12 * h) {
                const double ga = 0.5 * f1(a, B.at(j));
                s += 0.5 * (g(m) + ga) * (a - A1.at(m));
            }
            worst = std::max(worst, std::abs(f0.at(i, j) - s));
        }
    }
    return worst;
}

} // namespace levygibbs
