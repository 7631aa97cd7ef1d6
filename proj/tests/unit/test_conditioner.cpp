#include "levygibbs/conditioner.hpp"
#include "levygibbs/error.hpp"
#include "levygibbs/parallel.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace levygibbs;
using doctest::Approx;

namespace {

bool same_fields(const Ensemble& x, const Ensemble& y)
{
    if (x.size() != y.size())
        return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (long n = -x.fields[i].cutoff(); n <= x.fields[i].cutoff(); ++n)
            if (x.fields[i][n] != y.fields[i][n])
                return false;
    return true;
}

} // namespace

TEST_SUITE("conditioner")
{
    TEST_CASE("spec validation")
    {
        CHECK_THROWS_AS((ConditioningSpec{0.0, 0.0, 0.1}.validate()), ConfigError);
        CHECK_THROWS_AS((ConditioningSpec{1.0, 0.0, 0.0}.validate()), ConfigError);
        CHECK_THROWS_AS((ConditioningSpec{1.0, 0.0, 1.5}.validate()), ConfigError);
        CHECK_THROWS_AS((ConditioningSpec{1.0, HUGE_VAL, 0.1}.validate()), ConfigError);
        CHECK_NOTHROW((ConditioningSpec{1.0, -2.0, 1.0}.validate()));
        const ConditioningSpec s{1.0, 0.5, 0.1};
        CHECK(s.accepts(1.05, 0.45));
        CHECK(!s.accepts(1.1, 0.5)); // open window
    }

    TEST_CASE("accepted fields lie in the window and do not depend on the worker count")
    {
        const ConditioningSpec spec{1.2, 0.3, 0.15};
        const SamplerConfig cfg{32, 5, 2, 0};
        RejectionOptions opt;
        opt.batch = 256;
        set_worker_count(1);
        const auto e1 = sample_conditioned(spec, 150, cfg, opt);
        set_worker_count(4);
        const auto e4 = sample_conditioned(spec, 150, cfg, opt);
        set_worker_count(0);
        CHECK(e1.conditioning_holds());
        CHECK(e1.size() == 150);
        CHECK(same_fields(e1, e4));
        CHECK(e1.provenance.attempts == e4.provenance.attempts);
        CHECK(e1.provenance.method == "rejection");
        for (const auto& u : e1.fields) {
            CHECK(std::abs(mass(u) - spec.a) < spec.epsilon);
            CHECK(std::abs(momentum(u) - spec.b) < spec.epsilon);
        }
        double tot = 0;
        for (double w : e1.weights)
            tot += w;
        CHECK(tot == Approx(1.0));
    }

    TEST_CASE("acceptance rate scales with the window area")
    {
        const SamplerConfig cfg{32, 8, 0, 0};
        const auto r2 = acceptance_rate({1.0, 0.0, 0.2}, 400000, cfg);
        const auto r1 = acceptance_rate({1.0, 0.0, 0.1}, 400000, {32, 8, 1, 0});
        const double ratio = r2.value / r1.value;
        const double se = ratio * std::hypot(r2.se / r2.value, r1.se / r1.value);
        MESSAGE("ratio " << ratio << " +- " << se);
        // smooth density: P(eps) = 4 eps^2 f (1 + O(eps^2))
        CHECK(std::abs(ratio - 4.0) < 4 * se + 0.1);
    }

    TEST_CASE("budget exhaustion and reweighting fallback")
    {
        const ConditioningSpec spec{1.0, 0.0, 0.01};
        const SamplerConfig cfg{16, 3, 0, 0};
        RejectionOptions opt;
        opt.max_attempts = 2000;
        opt.batch = 500;
        try {
            (void)sample_conditioned(spec, 50, cfg, opt);
            FAIL("expected BudgetExhausted");
        } catch (const BudgetExhausted& e) {
            CHECK(e.attempts() == 2000);
            CHECK(e.accepted() < 50);
        }
        opt.fallback = true;
        opt.fallback_cell = 0.3;
        const auto e = sample_conditioned(spec, 20, cfg, opt);
        CHECK(e.provenance.method == "reweighted-fallback");
        CHECK(e.size() == 20);
        double tot = 0;
        for (double w : e.weights) {
            CHECK(w > 0);
            tot += w;
        }
        CHECK(tot == Approx(1.0));
    }

    TEST_CASE("merge and subset")
    {
        const ConditioningSpec spec{1.0, 0.0, 0.3};
        const auto x = sample_conditioned(spec, 30, {16, 1, 0, 0});
        const auto y = sample_conditioned(spec, 10, {16, 1, 1, 0});
        const auto m = Ensemble::merge(x, y);
        CHECK(m.size() == 40);
        double tot = 0;
        for (double w : m.weights) {
            CHECK(w == Approx(1.0 / 40));
            tot += w;
        }
        CHECK(tot == Approx(1.0));
        CHECK(m.provenance.attempts == x.provenance.attempts + y.provenance.attempts);
        const auto s = m.subset(30, 40);
        CHECK(same_fields(s, y));
        const auto z = sample_conditioned({1.0, 0.0, 0.25}, 5, {16, 1, 0, 0});
        CHECK_THROWS_AS(Ensemble::merge(x, z), MismatchedSpec);
        const auto u = sample_unconditioned(12, {16, 1, 0, 0});
        CHECK(u.conditioning_holds());
        CHECK(u.weights[3] == Approx(1.0 / 12));
    }

    TEST_CASE("named observables")
    {
        const auto u = sample_wiener({16, 2, 0, 0}, 1);
        for (const auto& name : observable_names())
            CHECK(std::isfinite(named_observable(name)(u)));
        CHECK(named_observable("mass")(u) == mass(u));
        CHECK(named_observable("abs_c0_sq")(u) == std::norm(u[0]));
        CHECK(named_observable("re_c1")(u) == u[1].real());
        CHECK_THROWS_AS(named_observable("nope"), ConfigError);
    }

    TEST_CASE("extrapolation recovers an exact power law")
    {
        std::vector<SweepRow> rows;
        for (double e : {0.4, 0.2, 0.1, 0.05})
            rows.push_back({e, 2.0 + 3.0 * e * e, 1e-3, 0, 100});
        const auto t = fit_extrapolation(rows);
        CHECK(t.extrapolated == Approx(2.0).epsilon(1e-9));
        CHECK(t.q == Approx(2.0));
        CHECK(t.c == Approx(3.0).epsilon(1e-9));
    }

    TEST_CASE("epsilon sweep of the mass converges to the target")
    {
        const ConditioningSpec tmpl{1.5, 0.0, 0.4};
        const auto t = epsilon_sweep(named_observable("mass"), tmpl, {0.4, 0.2, 0.1}, 300, {32, 9, 0, 0});
        REQUIRE(t.rows.size() == 3);
        for (const auto& r : t.rows)
            CHECK(std::abs(r.mean - 1.5) < r.epsilon);
        CHECK(std::abs(t.rows[2].mean - 1.5) < 5 * t.rows[2].se + 1e-3);
        CHECK_THROWS_AS(epsilon_sweep(named_observable("mass"), tmpl, {0.1, 0.2}, 10, {32, 9, 0, 0}), ConfigError);
    }

    TEST_CASE("low-mode marginal: total mass one, agreement with rejection")
    {
        const int N = 2;
        const ConditioningSpec spec{1.5, 0.0, 0.1};
        CharFnSpec ft;
        ft.tail_start = N + 1;
        const auto f_tail = invert_density(ft, {0, 4, 257}, {-3, 3, 241});
        const auto f0 = invert_density(CharFnSpec{}, {0, 4, 257}, {-3, 3, 241});
        auto all = [](std::span<const cplx>) { return true; };
        const auto tot = low_mode_marginal(spec, N, all, &f_tail, &f0, 200000, 1, 0, true);
        CHECK(std::abs(tot.probability - 1) < 4 * tot.se + 5e-3);

        // P(|c_0|^2 > 1.3 | window): ratio formula against rejection sampling
        auto big0 = [&](std::span<const cplx> xi) { return std::norm(xi[N]) > 1.3; };
        const auto lm = low_mode_marginal(spec, N, big0, &f_tail, &f0, 200000, 2, 0, true);
        const auto ens = sample_conditioned(spec, 3000, {128, 4, 0, 0});
        std::uint64_t k = 0;
        for (const auto& u : ens.fields)
            k += std::norm(u[0]) > 1.3;
        const auto p = stats::proportion(k, ens.size());
        MESSAGE("ratio formula " << lm.probability << " +- " << lm.se << ", rejection " << p.value << " +- " << p.se);
        CHECK(std::abs(lm.probability - p.value) < 4 * std::hypot(lm.se, p.se) + 0.01);

        CHECK_THROWS_AS(low_mode_marginal(spec, N, all, nullptr, &f0, 10, 1, 0), MissingDensity);
        CHECK_THROWS_AS(low_mode_marginal(spec, N, all, &f0, &f0, 10, 1, 0), MismatchedSpec);
    }
}
