#pragma once

#include "levygibbs/spectral_field.hpp"

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace levygibbs {

enum class WeightMode
{
    Wiener,      // w_n = 1 / (1 + 4 pi^2 n^2)
    BrownianLoop // w_n = 1 / (4 pi^2 n^2), n != 0
};

// Characteristic function of the pair
//   X = sum w_n |g_n|^2,  Y = sum w_n (2 pi n) |g_n|^2
// over the modes n with |n - M| >= tail_start (M = window_M, default 0).
struct CharFnSpec
{
    int tail_start = 0;
    int product_cutoff = 4096;
    std::optional<long> window_M;
    WeightMode weights = WeightMode::Wiener;

    long center() const { return window_M.value_or(0); }
    bool includes(long n) const;
    double weight(long n) const;
    void validate() const;
    bool operator==(const CharFnSpec&) const = default;
};

std::string describe(const CharFnSpec& spec);

// Precomputed evaluator. Explicit factors are multiplied out while any of them
// is far from 1; the remaining pairs +-n are summed through the log series with
// tabulated power sums up to product_cutoff and closed-form integrals beyond.
class CharFn
{
public:
    explicit CharFn(const CharFnSpec& spec);

    std::complex<double> operator()(double s, double t) const;
    // Bound on the neglected log-series remainder at (s, t).
    double residual_bound(double s, double t) const;

    const CharFnSpec& spec() const { return spec_; }

    // Exact first and second moments of (X, Y).
    double mean_mass() const { return mean_x_; }
    double var_mass() const { return var_x_; }
    double mean_momentum() const { return mean_y_; }
    double var_momentum() const { return var_y_; }
    double max_weight() const { return max_w_; }
    double max_momentum_weight() const { return max_wk_; }

private:
    long explicit_limit(double s, double t) const;
    double power_sum(int k, int j, long from) const; // sum_{n >= from} w^k (2 pi n)^j
    double em_tail(int k, int j, long from) const;

    CharFnSpec spec_;
    long base_ = 0;                          // every excluded index lies in [-base_, base_]
    std::vector<std::vector<double>> suffix_; // [k*(K+1)+j][n]: sum_{m=n}^{cutoff} w^k (2 pi m)^j
    std::vector<double> beyond_;             // same sums over m > cutoff
    double mean_x_ = 0, var_x_ = 0, mean_y_ = 0, var_y_ = 0, max_w_ = 0, max_wk_ = 0;
};

// Cached evaluator for spec (built once per distinct spec).
std::shared_ptr<const CharFn> char_fn_evaluator(const CharFnSpec& spec);
std::complex<double> char_fn(const CharFnSpec& spec, double s, double t);

struct EnvelopeFit
{
    double C = 0;        // fitted constant, |f^(s,t)| <= C <s>^-2 <t>^-2
    double max_ratio = 0; // max of |f^| <s>^2 <t>^2 on the fitting lattice
    std::size_t lattice_points = 0;
};
// Fit on a log-spaced lattice in both signs of s and t; C = safety * max ratio.
EnvelopeFit envelope_fit(const CharFnSpec& spec, int points_per_axis = 29, double safety = 1.25);

struct Axis
{
    double min = 0;
    double max = 1;
    std::size_t n = 2;

    double step() const { return (max - min) / static_cast<double>(n - 1); }
    double at(std::size_t i) const { return min + static_cast<double>(i) * step(); }
};

struct InversionMeta
{
    double s_cutoff = 0;
    double t_cutoff = 0;
    double ds = 0;
    double dt = 0;
    double period_a = 0;
    double period_b = 0;
    double truncation_error = 0; // pointwise bound from |f^| outside the cutoff rectangle
    double ringing = 0;          // max |f| measured on a < 0, where the density vanishes
    double envelope_C = 0;
};

class DensityGrid
{
public:
    DensityGrid() = default;
    DensityGrid(Axis a, Axis b, std::vector<double> values, CharFnSpec spec, InversionMeta meta);

    const Axis& a_axis() const { return a_; }
    const Axis& b_axis() const { return b_; }
    const std::vector<double>& values() const { return values_; }
    const CharFnSpec& spec() const { return spec_; }
    int tail_start() const { return spec_.tail_start; }
    const InversionMeta& meta() const { return meta_; }

    double at(std::size_t i, std::size_t j) const { return values_[i * b_.n + j]; }

    // Bilinear interpolation; zero for a < 0 and outside the tabulated rectangle.
    double operator()(double a, double b) const;
    // Integral of the bilinear interpolant over [a0,a1] x [b0,b1].
    double box_integral(double a0, double a1, double b0, double b1) const;

    double integral() const; // 2D trapezoid
    double symmetry_defect() const;
    double min_value() const;

private:
    Axis a_, b_;
    std::vector<double> values_;
    CharFnSpec spec_;
    InversionMeta meta_;
};

struct InversionOptions
{
    double s_cutoff = 0;   // 0: choose from the measured decay of |f^|
    double t_cutoff = 0;
    double period_a = 0;   // 0: 3 x (a range), at least a_max + 40 max_w
    double period_b = 0;   // 0: 4 b_max
    double tolerance = 1e-6; // allowed pointwise truncation error
    double negative_extent = 1.0; // width of the a < 0 strip used to measure ringing
    std::size_t max_evaluations = 80'000'000;
};

Axis default_a_axis();
Axis default_b_axis();

DensityGrid invert_density(const CharFnSpec& spec, const Axis& a, const Axis& b, const InversionOptions& opt = {});

struct PositivityReport
{
    bool pass = false;
    bool expected_zero_region = false;
    double minimum = 0;
    double min_a = 0;
    double min_b = 0;
    double mirror_value = 0; // f(min_a, -min_b)
    double ringing_tolerance = 0;
    std::size_t probed = 0;
    std::vector<std::pair<double, double>> failing_nodes;
};

// Minimum of the grid over a in [a_min, a_max], b in [b_lo, b_hi] against
// ringing_multiple x measured ringing.
PositivityReport positivity_report(const DensityGrid& grid, double a_min, double a_max, double b_lo, double b_hi,
                                   double ringing_multiple = 3.0);

struct MarginalDensity
{
    Axis b;
    std::vector<double> values;
    double t_cutoff = 0;
    double truncation_error = 0;

    double integral() const;
};

// Density of Y alone from t -> f^(0, t).
MarginalDensity marginal_momentum_density(const CharFnSpec& spec, const Axis& b, double t_cutoff = 0,
                                          double tolerance = 1e-9);

// (k/4) sech^2(k b / 2), the law of the Levy area in the scale k.
double sech2_density(double b, double k);
double sech2_cdf(double b, double k);
// Least-squares fit of k to a tabulated density.
double fit_sech2_scale(const Axis& b, const std::vector<double>& density);

// f_0(a, b) reconstructed from f_1 by convolution in a with the chi^2_2 density
// (1/2) e^{-x/2} of |g_0|^2 (composite Simpson in a); returns max |f_0 - conv|
// over the grid.
double convolution_consistency(const DensityGrid& f0, const DensityGrid& f1);

} // namespace levygibbs
