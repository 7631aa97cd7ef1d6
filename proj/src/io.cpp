#include "levygibbs/io.hpp"

#include "levygibbs/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace levygibbs::io {

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer
{
public:
    explicit Writer(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc)
    {
        if (!out_)
            throw Error("cannot open " + path.string() + " for writing");
    }

    void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

    void u64(std::uint64_t v)
    {
        char b[8];
        for (int i = 0; i < 8; ++i)
            b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        bytes(b, 8);
    }
    void u32(std::uint32_t v)
    {
        char b[4];
        for (int i = 0; i < 4; ++i)
            b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        bytes(b, 4);
    }
    void u8(std::uint8_t v) { bytes(reinterpret_cast<const char*>(&v), 1); }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    void finish()
    {
        out_.flush();
        if (!out_)
            throw Error("write failed");
    }

private:
    std::ofstream out_;
};

class Reader
{
public:
    explicit Reader(const std::filesystem::path& path)
      : in_(path, std::ios::binary)
      , name_(path.string())
    {
        if (!in_)
            throw Error("cannot open " + name_);
    }

    void bytes(char* p, std::size_t n)
    {
        in_.read(p, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw Error(name_ + ": truncated file");
    }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

    std::uint64_t u64()
    {
        unsigned char b[8];
        bytes(reinterpret_cast<char*>(b), 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i)
            v = (v << 8) | b[i];
        return v;
    }
    std::uint32_t u32()
    {
        unsigned char b[4];
        bytes(reinterpret_cast<char*>(b), 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | b[i];
        return v;
    }
    std::uint8_t u8()
    {
        char c;
        bytes(&c, 1);
        return static_cast<std::uint8_t>(c);
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str()
    {
        const auto n = u32();
        if (n > (1u << 20))
            throw Error(name_ + ": corrupt string length");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    void magic(const char* m)
    {
        char b[4];
        bytes(b, 4);
        if (std::memcmp(b, m, 4) != 0)
            throw Error(name_ + ": bad magic, expected " + std::string(m, 4));
        const auto v = u32();
        if (v != kVersion)
            throw Error(name_ + ": unsupported version " + std::to_string(v));
    }

private:
    std::ifstream in_;
    std::string name_;
};

void put_axis(Writer& w, const Axis& a)
{
    w.f64(a.min);
    w.f64(a.max);
    w.u64(a.n);
}

Axis get_axis(Reader& r)
{
    Axis a;
    a.min = r.f64();
    a.max = r.f64();
    a.n = r.u64();
    return a;
}

} // namespace

void write_density_grid(const std::filesystem::path& path, const DensityGrid& grid)
{
    Writer w(path);
    w.bytes("LGDG", 4);
    w.u32(kVersion);
    const auto& s = grid.spec();
    w.i32(s.tail_start);
    w.i32(s.product_cutoff);
    w.u8(s.window_M ? 1 : 0);
    w.i64(s.window_M.value_or(0));
    w.u8(s.weights == WeightMode::Wiener ? 0 : 1);
    put_axis(w, grid.a_axis());
    put_axis(w, grid.b_axis());
    const auto& m = grid.meta();
    for (double x : {m.s_cutoff, m.t_cutoff, m.ds, m.dt, m.period_a, m.period_b, m.truncation_error, m.ringing,
                     m.envelope_C})
        w.f64(x);
    for (double x : grid.values())
        w.f64(x);
    w.finish();
}

DensityGrid read_density_grid(const std::filesystem::path& path)
{
    Reader r(path);
    r.magic("LGDG");
    CharFnSpec s;
    s.tail_start = r.i32();
    s.product_cutoff = r.i32();
    const bool has_window = r.u8() != 0;
    const auto M = r.i64();
    if (has_window)
        s.window_M = M;
    s.weights = r.u8() == 0 ? WeightMode::Wiener : WeightMode::BrownianLoop;
    const Axis a = get_axis(r), b = get_axis(r);
    InversionMeta m;
    for (double* x : {&m.s_cutoff, &m.t_cutoff, &m.ds, &m.dt, &m.period_a, &m.period_b, &m.truncation_error,
                      &m.ringing, &m.envelope_C})
        *x = r.f64();
    if (a.n < 2 || b.n < 2 || a.n * b.n > (std::size_t{1} << 32))
        throw Error(path.string() + ": corrupt axis sizes");
    std::vector<double> v(a.n * b.n);
    for (auto& x : v)
        x = r.f64();
    return DensityGrid(a, b, std::move(v), s, m);
}

void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open " + path.string());
    out << std::setprecision(17) << "a,b,f\n";
    for (std::size_t i = 0; i < grid.a_axis().n; ++i)
        for (std::size_t j = 0; j < grid.b_axis().n; ++j)
            out << grid.a_axis().at(i) << ',' << grid.b_axis().at(j) << ',' << grid.at(i, j) << '\n';
}

void write_ensemble(const std::filesystem::path& path, const Ensemble& ens, const std::optional<FlowMeta>& flow)
{
    const int N = ens.size() ? ens.fields.front().cutoff() : 0;
    const std::size_t G = ens.size() ? ens.fields.front().grid_size() : 0;
    for (const auto& u : ens.fields)
        if (u.cutoff() != N)
            throw Error("write_ensemble: fields have different cutoffs");

    Writer w(path);
    w.bytes("LGEN", 4);
    w.u32(kVersion);
    w.u8(ens.spec ? 1 : 0);
    const ConditioningSpec c = ens.spec.value_or(ConditioningSpec{});
    w.f64(c.a);
    w.f64(c.b);
    w.f64(c.epsilon);
    const auto& p = ens.provenance;
    w.u64(p.seed);
    w.u64(p.stream);
    w.u64(p.attempts);
    w.u64(p.accepted);
    w.f64(p.acceptance_rate);
    w.str(p.method);
    w.i32(p.cutoff);
    w.u64(p.batch);
    w.u64(ens.size());
    w.i32(N);
    w.u64(G);
    for (std::size_t i = 0; i < ens.size(); ++i) {
        w.f64(ens.weights[i]);
        for (const auto& x : ens.fields[i].coeffs()) {
            w.f64(x.real());
            w.f64(x.imag());
        }
    }
    if (flow) {
        w.bytes("FLOW", 4);
        w.f64(flow->p);
        w.u8(flow->sign == Sign::Defocusing ? 0 : 1);
        w.i32(flow->galerkin_cutoff);
        w.f64(flow->dt);
        w.f64(flow->T);
        w.u8(flow->nonlinear == NonlinearStep::Galerkin ? 0 : 1);
    }
    w.finish();
}

Ensemble read_ensemble(const std::filesystem::path& path, std::optional<FlowMeta>* flow)
{
    Reader r(path);
    r.magic("LGEN");
    Ensemble e;
    const bool has_spec = r.u8() != 0;
    ConditioningSpec c;
    c.a = r.f64();
    c.b = r.f64();
    c.epsilon = r.f64();
    if (has_spec)
        e.spec = c;
    auto& p = e.provenance;
    p.seed = r.u64();
    p.stream = r.u64();
    p.attempts = r.u64();
    p.accepted = r.u64();
    p.acceptance_rate = r.f64();
    p.method = r.str();
    p.cutoff = r.i32();
    p.batch = r.u64();
    const auto count = r.u64();
    const int N = r.i32();
    const auto G = r.u64();
    if (N < 0 || count > (std::uint64_t{1} << 32))
        throw Error(path.string() + ": corrupt header");
    e.fields.reserve(count);
    e.weights.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        e.weights.push_back(r.f64());
        std::vector<cplx> coeffs(2 * static_cast<std::size_t>(N) + 1);
        for (auto& x : coeffs) {
            const double re = r.f64();
            x = {re, r.f64()};
        }
        e.fields.emplace_back(N, std::move(coeffs), G);
    }
    if (flow)
        flow->reset();
    if (!r.at_end()) {
        char tag[4];
        r.bytes(tag, 4);
        if (std::memcmp(tag, "FLOW", 4) != 0)
            throw Error(path.string() + ": unknown trailer");
        FlowMeta m;
        m.p = r.f64();
        m.sign = r.u8() == 0 ? Sign::Defocusing : Sign::Focusing;
        m.galerkin_cutoff = r.i32();
        m.dt = r.f64();
        m.T = r.f64();
        m.nonlinear = r.u8() == 0 ? NonlinearStep::Galerkin : NonlinearStep::Pointwise;
        if (flow)
            *flow = m;
    }
    return e;
}

void write_observables_csv(const std::filesystem::path& path, const Ensemble& ens,
                           const std::vector<std::string>& names)
{
    std::vector<Observable> obs;
    for (const auto& n : names)
        obs.push_back(named_observable(n));
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open " + path.string());
    out << std::setprecision(17) << "index,weight";
    for (const auto& n : names)
        out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < ens.size(); ++i) {
        out << i << ',' << ens.weights[i];
        for (const auto& o : obs)
            out << ',' << o(ens.fields[i]);
        out << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const ConservationTrace& trace)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open " + path.string());
    out << std::setprecision(17) << "t,mass,momentum,hamiltonian\n";
    for (std::size_t i = 0; i < trace.t.size(); ++i)
        out << trace.t[i] << ',' << trace.mass[i] << ',' << trace.momentum[i] << ',' << trace.hamiltonian[i] << '\n';
}

std::string fnv1a_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace levygibbs::io
