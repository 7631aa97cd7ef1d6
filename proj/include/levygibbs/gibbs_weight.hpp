#pragma once

#include "levygibbs/conditioner.hpp"
#include "levygibbs/density_kernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levygibbs {

struct GibbsSpec
{
    double p = 4.0;
    Sign sign = Sign::Defocusing;
    double mass_a = 1.0;
    double momentum_b = 0.0;
    double epsilon = 0.1;
    double focusing_mass_guard = 0.5;

    void validate() const;
    ConditioningSpec conditioning() const { return {mass_a, momentum_b, epsilon}; }
};

// exp(-(1/p) int |u|^p) when defocusing, exp(+(1/p) int |u|^p) when focusing.
double gibbs_weight(const FourierField& u, const GibbsSpec& spec);

struct PartitionEstimate
{
    double Z = 0;
    double ci = 0; // 95% half width from the bootstrap standard error
    double se = 0;
    double ess = 0;
};

struct EstimatorOptions
{
    double ess_floor = 50;
    int bootstrap = 400;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0x5eed;
};

// Throws MismatchedSpec if the ensemble was conditioned on a different (a, b, eps).
void check_matching(const Ensemble& ens, const GibbsSpec& spec);

// Per-field products (ensemble weight) x (Gibbs weight), in ensemble order.
std::vector<double> combined_weights(const Ensemble& ens, const GibbsSpec& spec);

PartitionEstimate estimate_partition(const Ensemble& ens, const GibbsSpec& spec, const EstimatorOptions& opt = {});

struct WeightedEstimate
{
    double value = 0;
    double ci = 0;
    double se = 0;
    double ess = 0;
};
WeightedEstimate expectation_mu(const Observable& phi, const Ensemble& ens, const GibbsSpec& spec,
                                const EstimatorOptions& opt = {});

struct TailPoint
{
    double level = 0;     // lambda (or Lambda)
    double survival = 0;
    double se = 0;
    std::size_t exceedances = 0;
    double envelope = 0;
    bool below_envelope = false;
    double gibbs_survival = 0; // same event under the Gibbs-weighted ensemble
};

struct TailReport
{
    std::string quantity;   // "lp" or "hs"
    double exponent = 0;    // kappa in log S = log C - c x^kappa
    double C = 0;
    double c = 0;
    double r2 = 0;
    double slope = 0;       // slope of log S against x^kappa (= -c)
    double slope_se = 0;
    std::vector<TailPoint> points;
    bool monotone = true;
    bool verdict = false;
    std::size_t samples = 0;
    std::size_t low_mode_violations = 0; // fields whose |n| <= M0 part exceeds p lambda / 2
};

// lambda grid from quantiles of int|u|^p / p: survival levels from 1/4 down to 10/n,
// placed midway between order statistics.
std::vector<double> quantile_levels(std::vector<double> values, std::size_t points, std::size_t min_events = 10);

// P_eps( int|u|^p >= p lambda ) on a conditioned ensemble; envelope
// C exp(-c lambda^kappa) with kappa = 1 + (6-p)/(p-2) fitted by least squares
// on log S. Empty lambdas: quantile grid.
TailReport tail_check(const GibbsSpec& spec, const Ensemble& ens, std::vector<double> lambdas = {},
                      std::size_t grid_points = 12);

// P_eps( ||u||_{H^s} > Lambda ) with envelope C exp(-c Lambda^2).
TailReport hs_tail_check(double s, const Ensemble& ens, std::vector<double> Lambdas = {}, std::size_t grid_points = 12);

struct DyadicBlock
{
    int j = 0;
    long lo = 0; // |n| in (lo, hi]
    long hi = 0;
    double sigma = 0;
    double mass = 0; // sum |g_n|^2
    double threshold = 0; // R_j^2
    bool flagged = false;
};

struct DyadicDiagnostic
{
    long M0 = 0;
    bool sobolev_floor_active = false; // the M0 formula gave M0 >= 0
    double low_integral = 0;           // int |P_{<=M0} u|^p
    bool low_exceeds = false;          // low_integral > p lambda / 2
    double total_integral = 0;
    std::vector<DyadicBlock> blocks;
    bool any_flagged = false;
    double sigma_sum = 0; // sum over all j >= 1 of sigma_j (closed form check)
};

// K = 2a bounds the mass on the conditioned support.
long sobolev_M0(double p, double lambda, double K);
double dyadic_sigma(int j, double delta);
DyadicDiagnostic dyadic_decomposition(const FourierField& u, double p, double lambda, double a, double delta = 0.1);

struct LargeDeviationPoint
{
    double R = 0;
    double epsilon = 0; // 0 for unconditioned
    double survival = 0;
    double se = 0;
    double oracle = 0; // incomplete-gamma value (unconditioned only)
    double envelope = 0;
    bool below_envelope = false;
    double ess = 0;
};

struct LargeDeviationReport
{
    long window_M = 0;
    long window_N = 0;
    std::vector<LargeDeviationPoint> points;
    std::vector<double> fitted_C; // per epsilon, from the smallest R
    double shared_C = 0;          // max of fitted_C: the single envelope
    double C_spread = 0;          // max/min of fitted_C
    bool oracle_match = true;     // unconditioned within 3 sigma of the oracle
    bool verdict = false;
};

struct LargeDeviationOptions
{
    std::size_t samples = 40000;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0x1d;
    int product_cutoff = 4096;
    std::size_t grid_n = 384;
};

// P(sum_{|n-M|<=N} |g_n|^2 >= R^2), unconditioned (empty eps_list entries = 0)
// and conditioned on (a, b, eps) for each eps in eps_list, by exponential
// tilting of the window moduli. Conditioned weights use the exact ratio
// identity with the density of the modes outside the window.
LargeDeviationReport large_deviation_check(long window_M, long window_N, const std::vector<double>& R_list,
                                           const std::optional<ConditioningSpec>& spec,
                                           const std::vector<double>& eps_list, const LargeDeviationOptions& opt = {});

} // namespace levygibbs
