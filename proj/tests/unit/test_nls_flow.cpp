#include "levygibbs/error.hpp"
#include "levygibbs/nls_flow.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace levygibbs;
using doctest::Approx;

namespace {

FlowSpec flow(int N, double dt, double T)
{
    FlowSpec f;
    f.galerkin_cutoff = N;
    f.dt = dt;
    f.T = T;
    return f;
}

double max_diff(const FourierField& x, const FourierField& y)
{
    double d = 0;
    for (long n = -x.cutoff(); n <= x.cutoff(); ++n)
        d = std::max(d, std::abs(x[n] - y[n]));
    return d;
}

FourierField smooth_field(int N)
{
    std::vector<cplx> v(2 * N + 1);
    v[N] = 1.0;
    v[N + 1] = 0.5;
    v[N - 2] = cplx(0, 0.3);
    return FourierField(N, v);
}

} // namespace

TEST_SUITE("nls_flow")
{
    TEST_CASE("spec validation and the stability bound")
    {
        auto f = flow(16, 1e-3, 1.0);
        CHECK(f.dt_max() == Approx(200.0 / std::pow(2 * oracle::pi * 16, 2)));
        CHECK(f.steps() == 1000);
        CHECK(f.work_grid() == 128);
        f.dt = 2 * f.dt_max();
        f.T = 100 * f.dt;
        CHECK_THROWS_AS(f.validate(), Instability);
        f = flow(16, 3e-3, 0.01);
        CHECK_THROWS_AS(f.validate(), ConfigError);
        f = flow(16, 1e-3, 0.01);
        f.grid_size = 24;
        CHECK_THROWS_AS(f.validate(), ConfigError);
        CHECK_THROWS_AS(step(FourierField(32), flow(16, 1e-3, 1)), ConfigError);
        CHECK(flow(16, 1e-3, 0).steps() == 0);
    }

    TEST_CASE("zero field and linear flow")
    {
        const auto f = flow(8, 1e-2, 0.5);
        CHECK(max_diff(evolve(FourierField(8), f).field, FourierField(8)) == 0);
        auto lin = f;
        lin.linear_only = true;
        const auto u = sample_wiener({8, 3, 0, 0}, 0);
        const auto uT = evolve(u, lin).field;
        for (long n = -8; n <= 8; ++n)
            CHECK(std::abs(uT[n] - oracle::plane_wave(u[n], n, 4, 0, 0.5)) < 1e-13);
    }

    TEST_CASE("plane wave: exact modulus, second-order phase")
    {
        const int N = 4;
        const cplx A(1.2, 1.6); // |A| = 2
        for (auto sign : {Sign::Defocusing, Sign::Focusing}) {
            const double sigma = sign == Sign::Defocusing ? 1.0 : -1.0;
            std::vector<cplx> v(2 * N + 1);
            v[N + 1] = A;
            const FourierField u(N, v);
            double err[2];
            int i = 0;
            for (double dt : {1e-2, 5e-3}) {
                auto f = flow(N, dt, 1.0);
                f.sign = sign;
                const auto uT = evolve(u, f).field;
                CHECK(std::abs(uT[1]) == Approx(2.0).epsilon(1e-13));
                err[i++] = std::abs(uT[1] - oracle::plane_wave(A, 1, 4, sigma, 1.0));
            }
            CHECK(err[0] / err[1] == Approx(4.0).epsilon(0.02));
        }
    }

    TEST_CASE("mass and momentum conserved on rough data")
    {
        const auto u = sample_wiener({32, 4, 0, 0}, 1);
        const auto r = evolve(u, flow(32, 1e-3, 0.2), 10);
        CHECK(r.trace.t.size() == 21);
        CHECK(r.trace.mass_max_rel() <= 1e-12);
        CHECK(r.trace.momentum_max_abs() <= 1e-11 * (1 + mass(u)));
        CHECK(r.trace.energy_max_rel() < 1e-2);
    }

    TEST_CASE("Hamiltonian error is second order on smooth data")
    {
        const auto u = smooth_field(16);
        double e[3];
        int i = 0;
        for (double dt : {2e-3, 1e-3, 5e-4}) {
            const auto r = evolve(u, flow(16, dt, 1.0));
            e[i++] = r.trace.hamiltonian.back() - r.trace.hamiltonian.front();
        }
        MESSAGE("dH " << e[0] << " " << e[1] << " " << e[2]);
        CHECK(e[0] / e[1] == Approx(4.0).epsilon(0.1));
        CHECK(e[1] / e[2] == Approx(4.0).epsilon(0.1));
    }

    TEST_CASE("reversibility and gauge covariance")
    {
        const auto u = sample_wiener({32, 5, 0, 0}, 2);
        const auto f = flow(32, 1e-3, 0.1);
        const auto fw = evolve(u, f).field;
        const auto back = evolve(fw, f, 0, -1).field;
        double scale = 0;
        for (long n = -32; n <= 32; ++n)
            scale = std::max(scale, std::abs(u[n]));
        CHECK(max_diff(back, u) <= 1e-8 * scale);
        const cplx g = std::polar(1.0, 0.7);
        CHECK(max_diff(evolve(u.scaled(g), f).field, fw.scaled(g)) <= 1e-12 * scale);
        // reversal symmetry: u(-x) evolves into uT(-x)
        CHECK(max_diff(evolve(u.reversed(), f).field, fw.reversed()) <= 1e-12 * scale);
    }

    TEST_CASE("pointwise and Galerkin substeps converge to the same flow")
    {
        const auto u = smooth_field(16);
        double d[2];
        int i = 0;
        for (double dt : {2e-3, 1e-3}) {
            auto g = flow(16, dt, 0.5);
            auto p = g;
            p.nonlinear = NonlinearStep::Pointwise;
            d[i++] = max_diff(evolve(u, g).field, evolve(u, p).field);
        }
        MESSAGE("scheme gap " << d[0] << " " << d[1]);
        CHECK(d[1] < d[0]);
        CHECK(d[1] < 1e-3);
    }

    TEST_CASE("invariance test: T = 0 is exact, short flow passes")
    {
        GibbsSpec g;
        g.mass_a = 1.0;
        g.epsilon = 0.2;
        const auto ens = sample_conditioned(g.conditioning(), 300, {16, 12, 0, 0});
        InvarianceOptions o;
        o.permutations = 200;
        const auto r0 = invariance_test(ens, g, flow(16, 1e-3, 0), o);
        CHECK(r0.verdict);
        for (const auto& ob : r0.observables)
            CHECK(ob.ks == 0);
        const auto r = invariance_test(ens, g, flow(16, 1e-3, 0.05), o);
        CHECK(r.verdict);
        CHECK(r.mass_max_rel <= 1e-12);
        auto bad = flow(16, 1e-3, 0.05);
        bad.p = 6;
        CHECK_THROWS_AS(invariance_test(ens, g, bad, o), ConfigError);
        CHECK_THROWS_AS(invariance_test(ens, g, flow(8, 1e-3, 0.05), o), ConfigError);
    }

    TEST_CASE("Levy-area probe tracks the momentum drift")
    {
        const auto ens = sample_conditioned({1.0, 0.3, 0.2}, 20, {16, 13, 0, 0});
        const auto r = levy_area_conservation_probe(ens, flow(16, 1e-3, 0.1), 1024);
        CHECK(r.max_mismatch <= 1e-10);
        CHECK(r.max_drift <= r.tolerance);
        CHECK(r.verdict);
        REQUIRE(r.area_drift.size() == 3);
        CHECK(r.area_drift[0].size() == 20);
        auto lin = flow(16, 1e-3, 0.1);
        lin.linear_only = true;
        CHECK(levy_area_conservation_probe(ens, lin, 1024).max_drift <= 1e-12);
    }
}
