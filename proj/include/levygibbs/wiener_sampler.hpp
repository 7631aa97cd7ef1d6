#pragma once

#include "levygibbs/rng.hpp"
#include "levygibbs/spectral_field.hpp"

#include <cstdint>

namespace levygibbs {

struct SamplerConfig
{
    int cutoff = 512;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::size_t grid_size = 0; // 0: default_grid_size(cutoff)
};

// Philox block index of mode n: 0, 1, -1, 2, -2, ... -> 0, 1, 2, 3, 4, ...
// Low modes therefore coincide between cutoffs for the same (seed, stream, draw).
inline std::uint32_t mode_block(long n)
{
    return n > 0 ? static_cast<std::uint32_t>(2 * n - 1) : static_cast<std::uint32_t>(-2 * n);
}

// Blocks reserved for auxiliary per-draw randomness, far above any mode block.
inline constexpr std::uint32_t kAuxBlock = 0xF0000000u;

// The standard complex Gaussian g_n of draw `draw` under `cfg`.
std::complex<double> wiener_gaussian(const SamplerConfig& cfg, std::uint64_t draw, long n);

// c_n = g_n / sqrt(1 + 4 pi^2 n^2), |n| <= N.
FourierField sample_wiener(const SamplerConfig& cfg, std::uint64_t draw = 0);

// c_n = g_n / (2 pi n), c_0 = 0.
FourierField sample_standard_bm_loop(int cutoff, std::uint64_t seed, std::uint64_t stream_id,
                                     std::uint64_t draw = 0, std::size_t grid_size = 0);

struct MassMomentum
{
    double mass = 0;
    double momentum = 0;
};

// Mass and momentum of sample_wiener(cfg, draw) computed from |g_n|^2 alone
// (no trigonometry). Agrees with mass()/momentum() of the full field up to
// rounding, so it is a prefilter, not a substitute for exact evaluation.
MassMomentum wiener_mass_momentum(const SamplerConfig& cfg, std::uint64_t draw);
MassMomentum bm_loop_mass_momentum(int cutoff, std::uint64_t seed, std::uint64_t stream_id, std::uint64_t draw);

// Moments of the discarded modes |n| > N of (mass, momentum) under the Wiener
// series (or the Brownian loop series when bm_loop is set).
struct TailMoments
{
    double mean_mass = 0;
    double var_mass = 0;
    double var_momentum = 0;
};
TailMoments series_tail_moments(int cutoff, bool bm_loop = false);

// Gaussian stand-in for the discarded modes of draw `draw`, drawn from the
// auxiliary block. Used only by Monte Carlo oracles, never inside a field.
MassMomentum gaussian_tail_correction(const SamplerConfig& cfg, std::uint64_t draw, const TailMoments& tm);

} // namespace levygibbs
