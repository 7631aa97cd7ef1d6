#include "levygibbs/parallel.hpp"
#include "levygibbs/stats.hpp"
#include "levygibbs/wiener_sampler.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <vector>

using namespace levygibbs;

TEST_SUITE("wiener_sampler")
{
    TEST_CASE("determinism and cutoff nesting")
    {
        SamplerConfig cfg{64, 7, 2, 0};
        CHECK(sample_wiener(cfg, 3) == sample_wiener(cfg, 3));
        CHECK(!(sample_wiener(cfg, 3) == sample_wiener(cfg, 4)));
        SamplerConfig big = cfg;
        big.cutoff = 256;
        const auto u = sample_wiener(cfg, 3), v = sample_wiener(big, 3);
        for (long n = -64; n <= 64; ++n)
            CHECK(u[n] == v[n]);
        for (long n = -3; n <= 3; ++n)
            CHECK(u[n] == wiener_gaussian(cfg, 3, n) / std::sqrt(1 + 4 * oracle::pi * oracle::pi * n * n));
    }

    TEST_CASE("mode moments at N = 256")
    {
        SamplerConfig cfg{256, 1, 0, 0};
        const std::size_t n = 100000;
        const std::vector<long> modes{0, 1, -1, 5, 100, -256};
        std::vector<std::vector<cplx>> c(modes.size(), std::vector<cplx>(n));
        parallel_for(n, [&](std::size_t i) {
            for (std::size_t k = 0; k < modes.size(); ++k)
                c[k][i] = wiener_gaussian(cfg, i, modes[k]);
        }, 1024);
        for (std::size_t k = 0; k < modes.size(); ++k) {
            cplx m = 0;
            double m2 = 0, m4 = 0;
            for (const auto& g : c[k]) {
                m += g;
                m2 += std::norm(g);
                m4 += std::norm(g) * std::norm(g);
            }
            m /= double(n);
            m2 /= double(n);
            m4 /= double(n);
            CHECK(std::abs(m) < 5 * std::sqrt(2.0 / n));
            CHECK(std::abs(m2 - 2) < 5 * std::sqrt((m4 - m2 * m2) / n));
        }
        // cross correlation between modes
        for (std::size_t k = 1; k < modes.size(); ++k) {
            double r = 0;
            for (std::size_t i = 0; i < n; ++i)
                r += std::real(c[0][i] * std::conj(c[k][i]));
            CHECK(std::abs(r / n / 2) <= 5 / std::sqrt(double(n)));
        }
    }

    TEST_CASE("mass and momentum moments against truncated series")
    {
        SamplerConfig cfg{512, 3, 1, 0};
        const std::size_t n = 100000;
        std::vector<double> m(n), p(n);
        parallel_for(n, [&](std::size_t i) {
            const auto r = wiener_mass_momentum(cfg, i);
            m[i] = r.mass;
            p[i] = r.momentum;
        }, 1024);
        const auto em = stats::mean(m), ep = stats::mean(p);
        CHECK(std::abs(em.value - oracle::wiener_mass_mean(512)) < 4 * em.se);
        CHECK(std::abs(ep.value) < 4 * ep.se);
        const double vp = stats::variance(p), target = oracle::wiener_momentum_var(512);
        CHECK(std::abs(vp - target) < 0.03 * target);
        // the truncated mean differs from coth(1/2) by the tail sum
        const auto tm = series_tail_moments(512);
        CHECK(oracle::wiener_mass_mean(512) + tm.mean_mass == doctest::Approx(oracle::wiener_mass_mean_full()).epsilon(1e-9));
    }

    TEST_CASE("prefilter agrees with exact evaluation")
    {
        SamplerConfig cfg{128, 5, 0, 0};
        for (std::uint64_t d = 0; d < 50; ++d) {
            const auto u = sample_wiener(cfg, d);
            const auto r = wiener_mass_momentum(cfg, d);
            CHECK(std::abs(r.mass - mass(u)) < 1e-12);
            CHECK(std::abs(r.momentum - momentum(u)) < 1e-11);
        }
    }

    TEST_CASE("Brownian loop: zero mode and mean mass 1/6")
    {
        const std::size_t n = 40000;
        std::vector<double> m(n);
        double tail = 0;
        for (long k = 257; k < 2000000; ++k)
            tail += 2 * 2.0 / (4 * oracle::pi * oracle::pi * double(k) * double(k));
        for (std::size_t i = 0; i < n; ++i) {
            if (i < 100) {
                const auto u = sample_standard_bm_loop(256, 2, 0, i);
                CHECK(u[0] == cplx{});
            }
            m[i] = bm_loop_mass_momentum(256, 2, 0, i).mass;
        }
        const auto e = stats::mean(m);
        CHECK(std::abs(e.value + tail - 1.0 / 6.0) < 4 * e.se + 1e-6);
    }

    TEST_CASE("window mass is chi-square with 2(2N+1) degrees of freedom")
    {
        SamplerConfig cfg{64, 9, 0, 0};
        const long M = 16, N = 8;
        const std::size_t n = 20000;
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i)
            for (long k = M - N; k <= M + N; ++k)
                w[i] += std::norm(wiener_gaussian(cfg, i, k));
        const double D = stats::ks_one_sample(w, [&](double x) { return 1 - oracle::chi2_even_survival(2 * N + 1, x); });
        CHECK(D < stats::kolmogorov_critical(double(n), 0.99));
    }
}
