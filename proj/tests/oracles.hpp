#pragma once

// Closed forms and brute-force references used by the tests. Nothing here
// calls into the library.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// prod_n ((2 pi n + x)^2 + c^2) / ((2 pi n)^2 + 1) = (cosh c - cos x) / (cosh 1 - 1),
// so with x = -i t the full Wiener pair (X, Y) has
//   E e^{i(sX + tY)} = (cosh 1 - 1) / (cosh sqrt(1 + t^2 - 2is) - cosh t).
inline cplx wiener_charfn(double s, double t)
{
    const cplx c = std::sqrt(cplx(1 + t * t, -2 * s));
    return (std::cosh(1.0) - 1.0) / (std::cosh(c) - std::cosh(t));
}

// Brownian loop weights 1/(2 pi n)^2, n != 0: prod over n != 0 of
// ((2 pi n + x)^2 + c^2)/(2 pi n)^2 = 2 (cosh c - cos x)/(x^2 + c^2), hence
//   E e^{i(sX + tY)} = -is / (cosh sqrt(t^2 - 2is) - cosh t),
// which at s = 0 is Levy's t / sinh t.
inline cplx bm_loop_charfn(double s, double t)
{
    if (s == 0)
        return t == 0 ? cplx(1) : cplx(t / std::sinh(t));
    const cplx c = std::sqrt(cplx(t * t, -2 * s));
    return cplx(0, -s) / (std::cosh(c) - std::cosh(t));
}

inline double wiener_w(long n) { return 1.0 / (1.0 + 4 * pi * pi * double(n) * double(n)); }

// Wiener char. function with the modes |n| < k removed: divide out their factors.
inline cplx wiener_charfn_tail(int k, double s, double t)
{
    cplx f = wiener_charfn(s, t);
    for (long n = -(k - 1); n <= k - 1; ++n)
        f *= cplx(1, -2 * wiener_w(n) * (s + t * 2 * pi * double(n)));
    return f;
}

// Direct product over n in [-nmax, nmax] with include(n).
inline cplx brute_charfn(double s, double t, long nmax, const std::function<bool(long)>& include,
                         const std::function<double(long)>& w)
{
    cplx f = 1;
    for (long n = -nmax; n <= nmax; ++n)
        if (include(n))
            f /= cplx(1, -2 * w(n) * (s + t * 2 * pi * double(n)));
    return f;
}

// sum_{n in Z} 2/(1 + 4 pi^2 n^2) = coth(1/2)
inline double wiener_mass_mean_full() { return 1.0 / std::tanh(0.5); }
inline double wiener_mass_mean(int N)
{
    double s = 0;
    for (long n = -N; n <= N; ++n)
        s += 2 * wiener_w(n);
    return s;
}
// Var of sum w_n |g_n|^2 with Var|g|^2 = 4.
inline double wiener_momentum_var(int N)
{
    double s = 0;
    for (long n = 1; n <= N; ++n) {
        const double k = 2 * pi * double(n), w = wiener_w(n);
        s += 2 * k * k * 4 * w * w;
    }
    return s;
}

// P(chi^2_{2J} > x) = e^{-x/2} sum_{j<J} (x/2)^j / j!, summed in log space.
inline double chi2_even_survival(int J, double x)
{
    const double h = x / 2;
    double lmax = -HUGE_VAL;
    for (int j = 0; j < J; ++j)
        lmax = std::max(lmax, j * std::log(h) - std::lgamma(j + 1.0));
    double s = 0;
    for (int j = 0; j < J; ++j)
        s += std::exp(j * std::log(h) - std::lgamma(j + 1.0) - lmax);
    return std::exp(-h + lmax + std::log(s));
}

// u = A e^{2 pi i k x} solves i u_t + u_xx = sigma |u|^{p-2} u exactly with
// u(t) = A e^{2 pi i k x - i((2 pi k)^2 + sigma |A|^{p-2}) t}.
inline cplx plane_wave(cplx A, long k, double p, double sigma, double t)
{
    const double kk = 2 * pi * double(k);
    return A * std::polar(1.0, -(kk * kk + sigma * std::pow(std::abs(A), p - 2)) * t);
}

// Levy's area law in scale k: (k/4) sech^2(k x / 2).
inline double sech2(double x, double k)
{
    const double c = std::cosh(k * x / 2);
    return k / (4 * c * c);
}

} // namespace oracle
