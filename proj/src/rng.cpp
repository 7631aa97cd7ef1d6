#include "levygibbs/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace levygibbs {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& ctr, const Philox4x32::Key& key)
{
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

} // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key)
{
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        ctr = round(ctr, key);
    }
    return ctr;
}

double uniform_open(std::uint32_t hi, std::uint32_t lo)
{
    // 52 bits so that the largest value, 1 - 2^-53, is still below 1
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

Philox4x32::Counter random_block(const RngAddress& addr)
{
    if (addr.draw >> 32)
        throw std::out_of_range("draw index exceeds 2^32 within one stream");
    const Philox4x32::Counter ctr{addr.block,
                                  static_cast<std::uint32_t>(addr.draw),
                                  static_cast<std::uint32_t>(addr.stream),
                                  static_cast<std::uint32_t>(addr.stream >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(addr.seed),
                              static_cast<std::uint32_t>(addr.seed >> 32)};
    return Philox4x32::generate(ctr, key);
}

std::complex<double> complex_gaussian(const RngAddress& addr)
{
    const auto b = random_block(addr);
    const double u1 = uniform_open(b[0], b[1]);
    const double u2 = uniform_open(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

double complex_gaussian_modulus_sq(const RngAddress& addr)
{
    const auto b = random_block(addr);
    return -2.0 * std::log(uniform_open(b[0], b[1]));
}

std::array<double, 2> uniform_pair(const RngAddress& addr)
{
    const auto b = random_block(addr);
    return {uniform_open(b[0], b[1]), uniform_open(b[2], b[3])};
}

StreamEngine::result_type StreamEngine::operator()()
{
    if (used_ == 4) {
        buffer_ = random_block({seed_, stream_, draw_++, 0});
        used_ = 0;
    }
    return buffer_[used_++];
}

double StreamEngine::uniform()
{
    const std::uint32_t hi = (*this)();
    const std::uint32_t lo = (*this)();
    return uniform_open(hi, lo);
}

double StreamEngine::normal()
{
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace levygibbs
