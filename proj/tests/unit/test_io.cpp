#include "levygibbs/error.hpp"
#include "levygibbs/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace levygibbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "levygibbs-unit-io";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_SUITE("io")
{
    TEST_CASE("FNV-1a reference values")
    {
        const auto p = scratch("fnv.txt");
        std::ofstream(p, std::ios::binary) << "";
        CHECK(io::fnv1a_file(p) == "cbf29ce484222325");
        std::ofstream(p, std::ios::binary) << "a";
        CHECK(io::fnv1a_file(p) == "af63dc4c8601ec8c");
        std::ofstream(p, std::ios::binary) << "foobar";
        CHECK(io::fnv1a_file(p) == "85944171f73967e8");
    }

    TEST_CASE("density grid round trip is bit exact")
    {
        CharFnSpec s;
        s.tail_start = 3;
        s.window_M = 5;
        s.weights = WeightMode::BrownianLoop;
        std::vector<double> v(4 * 3);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = 0.1 * static_cast<double>(i) - 1e-300;
        InversionMeta m{1, 2, 3, 4, 5, 6, 7e-9, 8e-12, 9};
        const DensityGrid g({0, 1, 4}, {-1, 1, 3}, v, s, m);
        const auto p = scratch("g.lgdg");
        io::write_density_grid(p, g);
        CHECK(slurp(p).substr(0, 4) == "LGDG");
        const auto r = io::read_density_grid(p);
        CHECK(r.spec() == s);
        CHECK(r.values() == v);
        CHECK(r.a_axis().n == 4);
        CHECK(r.b_axis().min == -1);
        CHECK(r.meta().ringing == 8e-12);
        CHECK(r.meta().envelope_C == 9);
        io::write_density_csv(scratch("g.csv"), g);
        const auto csv = slurp(scratch("g.csv"));
        CHECK(csv.rfind("a,b,f\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
    }

    TEST_CASE("ensemble round trip with spec, provenance and flow trailer")
    {
        auto e = sample_conditioned({1.0, 0.2, 0.3}, 7, {8, 2, 1, 0});
        const io::FlowMeta fm{6.0, Sign::Focusing, 8, 1e-3, 0.5, NonlinearStep::Pointwise};
        const auto p = scratch("e.lgen");
        io::write_ensemble(p, e, fm);
        std::optional<io::FlowMeta> back;
        const auto r = io::read_ensemble(p, &back);
        REQUIRE(r.size() == 7);
        CHECK(r.spec == e.spec);
        CHECK(r.weights == e.weights);
        CHECK(r.provenance.method == "rejection");
        CHECK(r.provenance.attempts == e.provenance.attempts);
        CHECK(r.provenance.acceptance_rate == e.provenance.acceptance_rate);
        for (std::size_t i = 0; i < 7; ++i) {
            CHECK(r.fields[i].grid_size() == e.fields[i].grid_size());
            for (long n = -8; n <= 8; ++n)
                CHECK(r.fields[i][n] == e.fields[i][n]);
        }
        REQUIRE(back);
        CHECK(back->p == 6.0);
        CHECK(back->sign == Sign::Focusing);
        CHECK(back->nonlinear == NonlinearStep::Pointwise);
        CHECK(back->T == 0.5);

        const auto u = sample_unconditioned(3, {4, 1, 0, 0});
        io::write_ensemble(p, u);
        back.reset();
        const auto ru = io::read_ensemble(p, &back);
        CHECK(!ru.spec);
        CHECK(!back);
        CHECK(ru.size() == 3);
    }

    TEST_CASE("corrupt files are rejected")
    {
        const auto p = scratch("bad.lgen");
        std::ofstream(p, std::ios::binary) << "LGDG\1\0\0\0";
        CHECK_THROWS_AS(io::read_ensemble(p), Error);
        io::write_ensemble(p, sample_unconditioned(2, {4, 1, 0, 0}));
        const auto full = slurp(p);
        std::ofstream(p, std::ios::binary) << full.substr(0, full.size() - 5);
        CHECK_THROWS_AS(io::read_ensemble(p), Error);
        CHECK_THROWS_AS(io::read_density_grid(scratch("does-not-exist")), Error);
    }

    TEST_CASE("observable and trace CSV columns")
    {
        const auto e = sample_unconditioned(4, {8, 1, 0, 0});
        io::write_observables_csv(scratch("o.csv"), e, {"mass", "momentum"});
        const auto o = slurp(scratch("o.csv"));
        CHECK(o.rfind("index,weight,mass,momentum\n", 0) == 0);
        CHECK(std::count(o.begin(), o.end(), '\n') == 5);
        ConservationTrace t{{0, 1}, {2, 2}, {0, 0}, {3, 3}};
        io::write_trace_csv(scratch("t.csv"), t);
        CHECK(slurp(scratch("t.csv")).rfind("t,mass,momentum,hamiltonian\n0,2,0,3\n", 0) == 0);
    }
}
