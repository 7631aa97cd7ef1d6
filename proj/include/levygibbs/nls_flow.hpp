#pragma once

#include "levygibbs/conditioner.hpp"
#include "levygibbs/gibbs_weight.hpp"
#include "levygibbs/spectral_field.hpp"

#include <string>
#include <vector>

namespace levygibbs {

enum class Splitting { Strang };

// Nonlinear substep of the splitting.
//   Galerkin:  implicit midpoint on  u' = -i sigma P_N(|u|^{p-2} u), solved by
//              fixed-point iteration; conserves mass and momentum exactly.
//   Pointwise: u <- P_N( u e^{-i sigma |u|^{p-2} dt} ) on the collocation grid.
enum class NonlinearStep { Galerkin, Pointwise };

const char* to_string(NonlinearStep s);

struct FlowSpec
{
    double p = 4.0;
    Sign sign = Sign::Defocusing;
    int galerkin_cutoff = 64;
    double dt = 1e-3;
    double T = 1.0;
    Splitting splitting = Splitting::Strang;
    NonlinearStep nonlinear = NonlinearStep::Galerkin;
    double stability_c = 200.0;
    bool linear_only = false;     // drop the nonlinear substep
    double overflow_guard = 1e8;  // max |c_n| before Instability
    int max_fixed_point = 100;
    std::size_t grid_size = 0;    // 0: smallest power of two > p N (alias-free for even p)

    double dt_max() const;
    long steps() const;           // T / dt, validated to be an integer
    std::size_t work_grid() const;
    void validate() const;
};

// Advances by one Strang step of size `dt` (may be negative for the reversed flow).
FourierField step(const FourierField& u, const FlowSpec& spec, double dt);
inline FourierField step(const FourierField& u, const FlowSpec& spec) { return step(u, spec, spec.dt); }

struct ConservationTrace
{
    std::vector<double> t, mass, momentum, hamiltonian;

    double mass_max_rel() const;
    double momentum_max_abs() const;
    double energy_max_rel() const;
};

struct EvolveResult
{
    FourierField field;
    ConservationTrace trace;
};

// stride = 0 records only t = 0 and t = T. direction = -1 runs dt -> -dt.
EvolveResult evolve(const FourierField& u0, const FlowSpec& spec, long stride = 0, int direction = 1);

struct InvarianceOptions
{
    std::vector<std::string> observables{"l4", "hs_quarter", "re_c1", "abs_c0_sq"};
    int permutations = 1000;
    double level = 0.99;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0x17;
};

struct ObservableKS
{
    std::string name;
    double ks = 0;
    double threshold = 0;
    bool pass = false;
};

struct InvarianceReport
{
    std::vector<ObservableKS> observables;
    double mass_max_rel = 0;
    double momentum_max_abs = 0;
    double energy_max_rel = 0;
    double ess = 0;
    std::size_t samples = 0;
    bool verdict = false;
};

InvarianceReport invariance_test(const Ensemble& ens, const GibbsSpec& gibbs, const FlowSpec& flow,
                                 const InvarianceOptions& opt = {});

struct LevyProbeReport
{
    std::size_t K = 0;
    std::vector<double> momentum_drift;          // P(u(T)) - P(u(0)) per sample
    std::vector<std::vector<double>> area_drift; // per AreaRule (Left, Midpoint, Trapezoid), per sample
    double max_drift = 0;
    double mean_drift = 0;
    double max_mismatch = 0;  // max |area drift - momentum drift| over rules and samples
    double rule_spread = 0;   // max over samples of the spread of area drift across rules
    double tolerance = 0;     // dt^2 T (1 + max |P(0)|)
    bool verdict = false;
};

// Area measured by levy_area_extrapolated at K samples per loop.
LevyProbeReport levy_area_conservation_probe(const Ensemble& ens, const FlowSpec& flow, std::size_t K = 4096);

} // namespace levygibbs
