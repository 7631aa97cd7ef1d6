#include "levygibbs/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

using namespace levygibbs;

TEST_SUITE("rng")
{
    TEST_CASE("Philox4x32-10 known-answer vectors")
    {
        // Random123 kat_vectors
        auto o = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
        CHECK(o == Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
        o = Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
        CHECK(o == Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
        o = Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
        CHECK(o == Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    }

    TEST_CASE("uniforms stay inside (0, 1)")
    {
        CHECK(uniform_open(0, 0) > 0);
        CHECK(uniform_open(0xffffffff, 0xffffffff) < 1);
    }

    TEST_CASE("addresses are independent coordinates")
    {
        const RngAddress a{7, 1, 2, 3};
        CHECK(random_block(a) == random_block(a));
        std::set<Philox4x32::Counter> seen;
        for (std::uint64_t seed : {0ull, 1ull})
            for (std::uint64_t stream : {0ull, 1ull, 1ull << 40})
                for (std::uint64_t draw : {0ull, 1ull})
                    for (std::uint32_t block : {0u, 1u})
                        seen.insert(random_block({seed, stream, draw, block}));
        CHECK(seen.size() == 24);
        CHECK_THROWS_AS(random_block({0, 0, 1ull << 32, 0}), std::out_of_range);
    }

    TEST_CASE("modulus shortcut matches the full Box-Muller draw")
    {
        for (std::uint64_t d = 0; d < 100; ++d) {
            const RngAddress a{3, 4, d, 5};
            CHECK(std::norm(complex_gaussian(a)) == doctest::Approx(complex_gaussian_modulus_sq(a)).epsilon(1e-13));
        }
    }

    TEST_CASE("stream engine moments and allocator uniqueness")
    {
        StreamEngine e(9, 2);
        double s = 0, s2 = 0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double x = e.normal();
            s += x;
            s2 += x * x;
        }
        CHECK(std::abs(s / n) < 5 / std::sqrt(double(n)));
        CHECK(std::abs(s2 / n - 1) < 5 * std::sqrt(2.0 / n));
        StreamAllocator alloc(5);
        std::set<std::uint64_t> ids;
        for (int i = 0; i < 100; ++i)
            ids.insert(alloc.allocate());
        CHECK(ids.size() == 100);
    }
}
