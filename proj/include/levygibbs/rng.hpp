#pragma once

#include <array>
#include <atomic>
#include <complex>
#include <cstdint>

namespace levygibbs {

//! Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//!
//! Stateless: every output block is a pure function of (key, counter), so any
//! draw can be regenerated without replaying a sequence.
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key);
};

/// Uniform double in the open interval (0, 1) built from two 32-bit words.
double uniform_open(std::uint32_t hi, std::uint32_t lo);

/// Address of one random block: root seed, substream, draw index within the
/// stream, and block index within the draw.
struct RngAddress
{
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t draw = 0;
    std::uint32_t block = 0;
};

Philox4x32::Counter random_block(const RngAddress& addr);

/// Standard complex Gaussian (real and imaginary parts independent N(0,1))
/// from one Philox block via Box-Muller.
std::complex<double> complex_gaussian(const RngAddress& addr);

/// |g|^2 of the same complex Gaussian `complex_gaussian(addr)` would return,
/// without the trigonometric half of Box-Muller.
double complex_gaussian_modulus_sq(const RngAddress& addr);

/// Two independent uniforms on (0, 1) from one block.
std::array<double, 2> uniform_pair(const RngAddress& addr);

/// Small sequential engine over a fixed (seed, stream), for resampling and
/// permutation loops where a stateful interface is convenient. Satisfies
/// UniformRandomBitGenerator.
class StreamEngine
{
public:
    using result_type = std::uint32_t;

    StreamEngine(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed)
      , stream_(stream)
    {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }

    result_type operator()();
    double uniform();
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t draw_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

/// Hands out substream ids under one root seed; a (seed, stream) pair is never
/// returned twice by the same allocator.
class StreamAllocator
{
public:
    explicit StreamAllocator(std::uint64_t seed, std::uint64_t first_stream = 0)
      : seed_(seed)
      , next_(first_stream)
    {}

    StreamAllocator(const StreamAllocator&) = delete;
    StreamAllocator& operator=(const StreamAllocator&) = delete;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t allocate() { return next_.fetch_add(1, std::memory_order_relaxed); }
    std::uint64_t allocated() const { return next_.load(std::memory_order_relaxed); }

private:
    std::uint64_t seed_;
    std::atomic<std::uint64_t> next_;
};

} // namespace levygibbs
