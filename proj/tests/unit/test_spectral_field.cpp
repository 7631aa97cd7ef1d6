#include "levygibbs/error.hpp"
#include "levygibbs/spectral_field.hpp"
#include "levygibbs/wiener_sampler.hpp"

#include "../oracles.hpp"

#include <doctest.h>

using namespace levygibbs;
using doctest::Approx;

namespace {

FourierField single(int N, long n, cplx c)
{
    std::vector<cplx> v(2 * N + 1);
    v[n + N] = c;
    return FourierField(N, v);
}

} // namespace

TEST_SUITE("spectral_field")
{
    TEST_CASE("construction invariants")
    {
        CHECK_THROWS_AS(FourierField(2, std::vector<cplx>(4)), ConfigError);
        CHECK_THROWS_AS(FourierField(2, std::vector<cplx>(5), 12), ConfigError);
        CHECK_THROWS_AS(FourierField(2, std::vector<cplx>(5), 4), ConfigError);
        std::vector<cplx> bad(5);
        bad[1] = cplx(std::nan(""), 0);
        CHECK_THROWS_AS(FourierField(2, bad), ConfigError);
        const FourierField u(3);
        CHECK(u.size() == 7);
        CHECK(u.grid_size() == 16);
        CHECK(default_grid_size(512) == 4096);
    }

    TEST_CASE("zero field")
    {
        const FourierField u(8);
        CHECK(mass(u) == 0);
        CHECK(momentum(u) == 0);
        CHECK(hamiltonian(u, 4, Sign::Defocusing) == 0);
        CHECK(lp_integral(u, 3.5) == 0);
        CHECK(hs_norm(u, 0.3) == 0);
        CHECK(levy_area_discrete(u, 64, AreaRule::Midpoint) == 0);
    }

    TEST_CASE("single modes")
    {
        CHECK(mass(single(4, 0, 3.0)) == Approx(9.0));
        CHECK(lp_integral(single(4, 0, 2.0), 6) == Approx(64.0));
        const auto e1 = single(4, 1, 1.0);
        const double two_pi2 = 2 * oracle::pi * oracle::pi;
        CHECK(hamiltonian(e1, 4, Sign::Defocusing) == Approx(two_pi2 + 0.25).epsilon(1e-13));
        CHECK(hamiltonian(e1, 4, Sign::Focusing) == Approx(two_pi2 - 0.25).epsilon(1e-13));
        CHECK(hs_norm(e1, 0.5) == Approx(std::pow(1 + 4 * oracle::pi * oracle::pi, 0.25)).epsilon(1e-14));
        std::vector<cplx> v(9);
        v[3] = v[5] = 1.0;
        const FourierField pm(4, v);
        CHECK(lp_integral(pm, 2) == Approx(2.0).epsilon(1e-14));
        CHECK(mass(pm) == Approx(2.0));
        CHECK(momentum(pm) == 0);
    }

    TEST_CASE("circle area tends to 2 pi")
    {
        const auto e1 = single(4, 1, 1.0);
        double prev = HUGE_VAL;
        for (std::size_t K = 16; K <= 4096; K *= 2) {
            const double err = std::abs(levy_area_discrete(e1, K, AreaRule::LeftEndpoint) - 2 * oracle::pi);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 1e-5);
        CHECK(levy_area_extrapolated(e1, 64, AreaRule::Midpoint) == Approx(2 * oracle::pi).epsilon(1e-12));
        CHECK(momentum(e1) == Approx(2 * oracle::pi));
    }

    TEST_CASE("Parseval, reversal and scaling on sampled fields")
    {
        for (std::uint64_t d = 0; d < 20; ++d) {
            SamplerConfig cfg{64, 11, 3, 0};
            const auto u = sample_wiener(cfg, d);
            CHECK(std::abs(mass(u) - quadrature_mass(u)) <= 1e-10 * std::max(1.0, mass(u)));
            CHECK(momentum(u.reversed()) == -momentum(u));
            const cplx alpha(0.3, -1.7);
            CHECK(mass(u.scaled(alpha)) == Approx(std::norm(alpha) * mass(u)).epsilon(1e-14));
            CHECK(momentum(u.scaled(alpha)) == Approx(std::norm(alpha) * momentum(u)).epsilon(1e-13));
            // grid change and projection round trip
            const auto v = FourierField::from_physical(64, u.with_grid(512).physical());
            for (long n = -64; n <= 64; ++n)
                CHECK(std::abs(v[n] - u[n]) < 1e-14);
        }
    }

    TEST_CASE("even-p quadrature is exact: |u|^4 against the convolution sum")
    {
        SamplerConfig cfg{6, 2, 0, 0};
        const auto u = sample_wiener(cfg, 5);
        // int |u|^4 = sum_k |sum_n c_n conj(c_{n-k})|^2
        double direct = 0;
        for (long k = -12; k <= 12; ++k) {
            cplx a = 0;
            for (long n = -6; n <= 6; ++n)
                a += u[n] * std::conj(u[n - k]);
            direct += std::norm(a);
        }
        CHECK(lp_integral(u, 4) == Approx(direct).epsilon(1e-13));
    }

    TEST_CASE("path area approaches momentum under K-doubling for every rule")
    {
        SamplerConfig cfg{32, 4, 0, 0};
        for (std::uint64_t d = 0; d < 5; ++d) {
            const auto u = sample_wiener(cfg, d);
            for (auto r : {AreaRule::LeftEndpoint, AreaRule::Midpoint, AreaRule::Trapezoid}) {
                double prev = HUGE_VAL;
                for (std::size_t K = 128; K <= 8192; K *= 2) {
                    const double err = std::abs(levy_area_discrete(u, K, r) - momentum(u));
                    CHECK(err < prev);
                    prev = err;
                }
                CHECK(std::abs(levy_area_extrapolated(u, 1024, r) - momentum(u)) < 1e-10);
            }
        }
    }

    TEST_CASE("observe bundles the scalar observables")
    {
        SamplerConfig cfg{16, 1, 0, 0};
        const auto u = sample_wiener(cfg, 0);
        const auto r = observe(u, 4, Sign::Defocusing, 0.25);
        CHECK(r.mass == mass(u));
        CHECK(r.hs_norm == hs_norm(u, 0.25));
        CHECK(r.lp_norm_p == Approx(std::pow(lp_integral(u, 4), 0.25)));
        CHECK(hs_norm(u, 0) == Approx(std::sqrt(mass(u))));
    }
}
