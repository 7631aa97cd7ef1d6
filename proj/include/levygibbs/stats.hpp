#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace levygibbs::stats {

struct Estimate
{
    double value = 0;
    double se = 0; // standard error
};

// Compensated (Neumaier) summation.
double neumaier_sum(std::span<const double> x);

Estimate mean(std::span<const double> x);
double variance(std::span<const double> x);
double quantile(std::vector<double> x, double q);

// Binomial proportion k/n with its standard error (Wilson-adjusted so that
// k = 0 still reports a nonzero error).
Estimate proportion(std::uint64_t k, std::uint64_t n);

struct LinearFit
{
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    double slope_se = 0;
};
// Ordinary (or weighted, if w non-empty) least squares y = intercept + slope x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

// (sum w)^2 / sum w^2
double effective_sample_size(std::span<const double> w);

// Percentile bootstrap standard error of the mean of x, deterministic in (seed, stream).
double bootstrap_se(std::span<const double> x, int resamples, std::uint64_t seed, std::uint64_t stream);

// sup |F1 - F2| between two weighted empirical CDFs. Weights need not be normalized.
double weighted_ks(std::span<const double> x1, std::span<const double> w1, std::span<const double> x2,
                   std::span<const double> w2);

// Upper `level` quantile of weighted_ks under random relabelling of the pooled
// sample into groups of the original sizes.
double permutation_ks_critical(std::span<const double> x1, std::span<const double> w1, std::span<const double> x2,
                               std::span<const double> w2, int permutations, double level, std::uint64_t seed,
                               std::uint64_t stream);

// One-sample KS distance of x against a continuous CDF.
double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
// Asymptotic Kolmogorov survival P(sqrt(n) D > lambda) with Stephens' small-n correction.
double kolmogorov_pvalue(double d, double n_eff);
// Critical value of D at the given upper-tail level for effective size n.
double kolmogorov_critical(double n_eff, double level);

// P(chi^2_k > x)
double chi_square_survival(double k, double x);

} // namespace levygibbs::stats
