#include "levygibbs/spectral_field.hpp"

#include "levygibbs/error.hpp"
#include "levygibbs/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace levygibbs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(std::size_t g) { return g >= 2 && std::has_single_bit(g); }

// x^p for x = |u|^2 >= 0, p/2 an exponent; exact repeated products for small even p.
inline double abs_pow_from_sq(double x2, double p)
{
    if (p == 2.0)
        return x2;
    if (p == 4.0)
        return x2 * x2;
    if (p == 6.0)
        return x2 * x2 * x2;
    return std::pow(x2, 0.5 * p);
}

struct Neumaier
{
    double sum = 0, c = 0;
    void add(double x)
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            c += (sum - t) + x;
        else
            c += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

} // namespace

const char* to_string(Sign s) { return s == Sign::Focusing ? "focusing" : "defocusing"; }

const char* to_string(AreaRule r)
{
    switch (r) {
    case AreaRule::LeftEndpoint: return "left";
    case AreaRule::Midpoint: return "midpoint";
    case AreaRule::Trapezoid: return "trapezoid";
    }
    return "?";
}

double freq(long n) { return kTwoPi * static_cast<double>(n); }
double bracket_sq(long n)
{
    const double k = freq(n);
    return 1.0 + k * k;
}

std::size_t default_grid_size(int cutoff)
{
    return std::bit_ceil(static_cast<std::size_t>(4 * static_cast<std::size_t>(cutoff) + 2));
}

FourierField::FourierField(int cutoff, std::size_t grid_size)
  : FourierField(cutoff, std::vector<cplx>(2 * static_cast<std::size_t>(std::max(cutoff, 0)) + 1), grid_size)
{}

FourierField::FourierField(int cutoff, std::vector<cplx> coeffs, std::size_t grid_size)
  : cutoff_(cutoff)
  , grid_size_(grid_size == 0 ? default_grid_size(std::max(cutoff, 0)) : grid_size)
  , coeffs_(std::move(coeffs))
{
    if (cutoff_ < 0)
        throw ConfigError("FourierField: cutoff must be >= 0");
    if (coeffs_.size() != 2 * static_cast<std::size_t>(cutoff_) + 1)
        throw ConfigError("FourierField: expected 2N+1 = " + std::to_string(2 * cutoff_ + 1) +
                          " coefficients, got " + std::to_string(coeffs_.size()));
    if (!is_pow2(grid_size_) || grid_size_ < 2 * static_cast<std::size_t>(cutoff_) + 2)
        throw ConfigError("FourierField: grid_size must be a power of two >= 2N+2");
    for (const auto& c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw ConfigError("FourierField: non-finite coefficient");
}

std::vector<cplx> FourierField::sample(std::size_t K, double offset) const
{
    std::vector<cplx> buf(K);
    const long k = static_cast<long>(K);
    for (long n = -cutoff_; n <= cutoff_; ++n) {
        cplx c = (*this)[n];
        if (offset != 0.0)
            c *= std::polar(1.0, kTwoPi * static_cast<double>(n) * offset / static_cast<double>(K));
        buf[static_cast<std::size_t>(((n % k) + k) % k)] += c;
    }
    fft::backward(buf);
    return buf;
}

std::vector<cplx> FourierField::physical() const { return sample(grid_size_); }

FourierField FourierField::from_physical(int cutoff, std::span<const cplx> values)
{
    std::vector<cplx> buf(values.begin(), values.end());
    const std::size_t G = buf.size();
    if (G < 2 * static_cast<std::size_t>(cutoff) + 1)
        throw ConfigError("from_physical: grid too small for cutoff");
    fft::forward(buf);
    std::vector<cplx> c(2 * static_cast<std::size_t>(cutoff) + 1);
    const double inv = 1.0 / static_cast<double>(G);
    const long g = static_cast<long>(G);
    for (long n = -cutoff; n <= cutoff; ++n)
        c[static_cast<std::size_t>(n + cutoff)] = buf[static_cast<std::size_t>((n + g) % g)] * inv;
    return FourierField(cutoff, std::move(c), G);
}

FourierField FourierField::with_grid(std::size_t grid_size) const { return FourierField(cutoff_, coeffs_, grid_size); }

FourierField FourierField::with_cutoff(int cutoff) const
{
    std::vector<cplx> c(2 * static_cast<std::size_t>(cutoff) + 1);
    for (long n = -cutoff; n <= cutoff; ++n)
        c[static_cast<std::size_t>(n + cutoff)] = (*this)[n];
    const std::size_t G = std::max(grid_size_, default_grid_size(cutoff));
    return FourierField(cutoff, std::move(c), G);
}

FourierField FourierField::scaled(cplx alpha) const
{
    auto c = coeffs_;
    for (auto& x : c)
        x *= alpha;
    return FourierField(cutoff_, std::move(c), grid_size_);
}

FourierField FourierField::reversed() const
{
    std::vector<cplx> c(coeffs_.rbegin(), coeffs_.rend());
    return FourierField(cutoff_, std::move(c), grid_size_);
}

double mass(const FourierField& u)
{
    double s = 0;
    for (const auto& c : u.coeffs())
        s += std::norm(c);
    return s;
}

double momentum(const FourierField& u)
{
    // Pair n with -n so that conjugate-symmetric moduli cancel exactly.
    double s = 0;
    for (long n = 1; n <= u.cutoff(); ++n)
        s += freq(n) * (std::norm(u[n]) - std::norm(u[-n]));
    return s;
}

double lp_integral(const FourierField& u, double p)
{
    if (!(p > 0))
        throw ConfigError("lp_integral: p must be > 0");
    const auto v = u.physical();
    double s = 0;
    for (const auto& x : v)
        s += abs_pow_from_sq(std::norm(x), p);
    return s / static_cast<double>(v.size());
}

double quadrature_mass(const FourierField& u) { return lp_integral(u, 2.0); }

double hamiltonian(const FourierField& u, double p, Sign sign)
{
    if (!(p > 2))
        throw ConfigError("hamiltonian: p must be > 2");
    double kinetic = 0;
    for (long n = -u.cutoff(); n <= u.cutoff(); ++n) {
        const double k = freq(n);
        kinetic += k * k * std::norm(u[n]);
    }
    const double lp = lp_integral(u, p);
    if (!std::isfinite(lp))
        throw QuadratureOverflow("hamiltonian: integral of |u|^p is not finite");
    const double potential = lp / p;
    return 0.5 * kinetic + (sign == Sign::Defocusing ? potential : -potential);
}

double hs_norm(const FourierField& u, double s)
{
    double acc = 0;
    for (long n = -u.cutoff(); n <= u.cutoff(); ++n)
        acc += std::pow(bracket_sq(n), s) * std::norm(u[n]);
    return std::sqrt(acc);
}

double levy_area_discrete(const FourierField& u, std::size_t K, AreaRule rule)
{
    if (K < 4)
        throw ConfigError("levy_area_discrete: need K >= 4");
    const auto v = u.sample(K);
    Neumaier acc;
    switch (rule) {
    case AreaRule::LeftEndpoint:
        for (std::size_t j = 0; j < K; ++j) {
            const cplx d = v[(j + 1) % K] - v[j];
            acc.add(std::imag(std::conj(v[j]) * d));
        }
        break;
    case AreaRule::Trapezoid:
        for (std::size_t j = 0; j < K; ++j) {
            const cplx d = v[(j + 1) % K] - v[j];
            acc.add(std::imag(std::conj(0.5 * (v[j] + v[(j + 1) % K])) * d));
        }
        break;
    case AreaRule::Midpoint: {
        const auto m = u.sample(K, 0.5);
        for (std::size_t j = 0; j < K; ++j) {
            const cplx d = v[(j + 1) % K] - v[j];
            acc.add(std::imag(std::conj(m[j]) * d));
        }
        break;
    }
    }
    return acc.value();
}

double levy_area_extrapolated(const FourierField& u, std::size_t K, AreaRule rule)
{
    const double a1 = levy_area_discrete(u, K, rule);
    const double a2 = levy_area_discrete(u, 2 * K, rule);
    const double a4 = levy_area_discrete(u, 4 * K, rule);
    const double b1 = (4.0 * a2 - a1) / 3.0;
    const double b2 = (4.0 * a4 - a2) / 3.0;
    return (16.0 * b2 - b1) / 15.0;
}

ObservableRecord observe(const FourierField& u, double p, Sign sign, double s)
{
    ObservableRecord r;
    r.mass = mass(u);
    r.momentum = momentum(u);
    r.hamiltonian = hamiltonian(u, p, sign);
    r.lp_norm_p = std::pow(lp_integral(u, p), 1.0 / p);
    r.hs_norm = hs_norm(u, s);
    return r;
}

} // namespace levygibbs
