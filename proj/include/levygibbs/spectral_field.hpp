#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace levygibbs {

using cplx = std::complex<double>;

enum class Sign { Focusing, Defocusing };
enum class AreaRule { LeftEndpoint, Midpoint, Trapezoid };

const char* to_string(Sign s);
const char* to_string(AreaRule r);

// 2 pi n and 1 + (2 pi n)^2.
double freq(long n);
double bracket_sq(long n);

// Smallest power of two >= 4N + 2: the collocation grid used when none is given.
// With G > 4N the quartic products |u|^4 and the cubic term u|u|^2 are resolved
// without aliasing back onto |n| <= N.
std::size_t default_grid_size(int cutoff);

// Truncated Fourier series u(x) = sum_{|n|<=N} c_n e^{2 pi i n x} on the unit circle.
// Immutable once constructed.
class FourierField
{
public:
    FourierField() : FourierField(0) {}
    explicit FourierField(int cutoff, std::size_t grid_size = 0);
    FourierField(int cutoff, std::vector<cplx> coeffs, std::size_t grid_size = 0);

    int cutoff() const { return cutoff_; }
    std::size_t grid_size() const { return grid_size_; }
    std::size_t size() const { return coeffs_.size(); }

    // c_n for |n| <= N; zero outside.
    cplx operator[](long n) const
    {
        return (n < -cutoff_ || n > cutoff_) ? cplx{} : coeffs_[static_cast<std::size_t>(n + cutoff_)];
    }
    std::span<const cplx> coeffs() const { return coeffs_; }

    // Values u(j/G), j = 0..G-1.
    std::vector<cplx> physical() const;
    // Values on another grid of K points, with an optional shift of the sample
    // points by `offset` grid cells (offset = 1/2 gives the cell midpoints).
    std::vector<cplx> sample(std::size_t K, double offset = 0.0) const;

    // Projection of grid values back to |n| <= N.
    static FourierField from_physical(int cutoff, std::span<const cplx> values);

    FourierField with_grid(std::size_t grid_size) const;
    FourierField with_cutoff(int cutoff) const;
    FourierField scaled(cplx alpha) const;
    FourierField reversed() const;

    bool operator==(const FourierField& o) const
    {
        return cutoff_ == o.cutoff_ && grid_size_ == o.grid_size_ && coeffs_ == o.coeffs_;
    }

private:
    int cutoff_;
    std::size_t grid_size_;
    std::vector<cplx> coeffs_;
};

double mass(const FourierField& u);
double momentum(const FourierField& u);
double hamiltonian(const FourierField& u, double p, Sign sign);
double lp_integral(const FourierField& u, double p);
double hs_norm(const FourierField& u, double s);
// Trapezoid quadrature of |u|^2 on the field's grid; equals mass() for G > 2N.
double quadrature_mass(const FourierField& u);

// Signed area  int Re(u) d Im(u) - Im(u) d Re(u)  of the closed polygon through K
// equispaced samples of the loop.
double levy_area_discrete(const FourierField& u, std::size_t K, AreaRule rule);

// Richardson extrapolation of levy_area_discrete over K, 2K, 4K; removes the
// K^-2 and K^-4 discretisation terms.
double levy_area_extrapolated(const FourierField& u, std::size_t K, AreaRule rule);

struct ObservableRecord
{
    double mass = 0;
    double momentum = 0;
    double hamiltonian = 0;
    double lp_norm_p = 0;
    double hs_norm = 0;
};

ObservableRecord observe(const FourierField& u, double p, Sign sign, double s);

} // namespace levygibbs
