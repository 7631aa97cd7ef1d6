#include "levygibbs/wiener_sampler.hpp"

#include "levygibbs/error.hpp"

#include <cmath>
#include <numbers>

namespace levygibbs {

namespace {

RngAddress address(const SamplerConfig& cfg, std::uint64_t draw, long n)
{
    return {cfg.seed, cfg.stream_id, draw, mode_block(n)};
}

} // namespace

std::complex<double> wiener_gaussian(const SamplerConfig& cfg, std::uint64_t draw, long n)
{
    return complex_gaussian(address(cfg, draw, n));
}

FourierField sample_wiener(const SamplerConfig& cfg, std::uint64_t draw)
{
    if (cfg.cutoff < 0)
        throw ConfigError("SamplerConfig: cutoff must be >= 0");
    const int N = cfg.cutoff;
    std::vector<cplx> c(2 * static_cast<std::size_t>(N) + 1);
    for (long n = -N; n <= N; ++n)
        c[static_cast<std::size_t>(n + N)] = complex_gaussian(address(cfg, draw, n)) / std::sqrt(bracket_sq(n));
    return FourierField(N, std::move(c), cfg.grid_size);
}

FourierField sample_standard_bm_loop(int cutoff, std::uint64_t seed, std::uint64_t stream_id, std::uint64_t draw,
                                     std::size_t grid_size)
{
    if (cutoff < 1)
        throw ConfigError("sample_standard_bm_loop: cutoff must be >= 1");
    const SamplerConfig cfg{cutoff, seed, stream_id, grid_size};
    std::vector<cplx> c(2 * static_cast<std::size_t>(cutoff) + 1);
    for (long n = -cutoff; n <= cutoff; ++n)
        if (n != 0)
            c[static_cast<std::size_t>(n + cutoff)] = complex_gaussian(address(cfg, draw, n)) / freq(n);
    return FourierField(cutoff, std::move(c), grid_size);
}

MassMomentum wiener_mass_momentum(const SamplerConfig& cfg, std::uint64_t draw)
{
    MassMomentum r;
    r.mass = complex_gaussian_modulus_sq(address(cfg, draw, 0));
    for (long n = 1; n <= cfg.cutoff; ++n) {
        const double w = 1.0 / bracket_sq(n);
        const double gp = complex_gaussian_modulus_sq(address(cfg, draw, n));
        const double gm = complex_gaussian_modulus_sq(address(cfg, draw, -n));
        r.mass += w * (gp + gm);
        r.momentum += freq(n) * w * (gp - gm);
    }
    return r;
}

MassMomentum bm_loop_mass_momentum(int cutoff, std::uint64_t seed, std::uint64_t stream_id, std::uint64_t draw)
{
    const SamplerConfig cfg{cutoff, seed, stream_id, 0};
    MassMomentum r;
    for (long n = 1; n <= cutoff; ++n) {
        const double k = freq(n);
        const double gp = complex_gaussian_modulus_sq(address(cfg, draw, n));
        const double gm = complex_gaussian_modulus_sq(address(cfg, draw, -n));
        r.mass += (gp + gm) / (k * k);
        r.momentum += (gp - gm) / k;
    }
    return r;
}

TailMoments series_tail_moments(int cutoff, bool bm_loop)
{
    // Direct sums to L, then the integral of the leading power beyond L + 1/2.
    constexpr long L = 1 << 20;
    TailMoments tm;
    for (long n = cutoff + 1; n <= L; ++n) {
        const double k = freq(n);
        const double w = bm_loop ? 1.0 / (k * k) : 1.0 / (1.0 + k * k);
        // both signs of n; E|g|^2 = 2, Var|g|^2 = 4
        tm.mean_mass += 2.0 * 2.0 * w;
        tm.var_mass += 2.0 * 4.0 * w * w;
        tm.var_momentum += 2.0 * 4.0 * w * w * k * k;
    }
    const double lh = static_cast<double>(std::max<long>(L, cutoff)) + 0.5;
    const double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
    tm.mean_mass += 4.0 / (four_pi_sq * lh);
    tm.var_momentum += 8.0 / (four_pi_sq * lh);
    return tm;
}

MassMomentum gaussian_tail_correction(const SamplerConfig& cfg, std::uint64_t draw, const TailMoments& tm)
{
    const auto g = complex_gaussian({cfg.seed, cfg.stream_id, draw, kAuxBlock});
    return {tm.mean_mass + std::sqrt(tm.var_mass) * g.real(), std::sqrt(tm.var_momentum) * g.imag()};
}

} // namespace levygibbs
