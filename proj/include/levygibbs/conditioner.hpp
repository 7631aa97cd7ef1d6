#pragma once

#include "levygibbs/density_kernel.hpp"
#include "levygibbs/spectral_field.hpp"
#include "levygibbs/stats.hpp"
#include "levygibbs/wiener_sampler.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace levygibbs {

// Centered windows A = (a - eps, a + eps), B = (b - eps, b + eps).
struct ConditioningSpec
{
    double a = 1.0;
    double b = 0.0;
    double epsilon = 0.1;

    void validate() const;
    bool accepts(double mass_value, double momentum_value) const
    {
        return std::abs(mass_value - a) < epsilon && std::abs(momentum_value - b) < epsilon;
    }
    bool accepts(const FourierField& u) const { return accepts(mass(u), momentum(u)); }
    bool operator==(const ConditioningSpec&) const = default;
};

struct Provenance
{
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t attempts = 0;
    std::uint64_t accepted = 0;
    double acceptance_rate = 0;
    std::string method = "wiener"; // wiener | rejection | reweighted-fallback
    int cutoff = 0;
    std::size_t batch = 0;
};

struct Ensemble
{
    std::vector<FourierField> fields;
    std::vector<double> weights; // normalized to sum 1
    std::optional<ConditioningSpec> spec;
    Provenance provenance;

    std::size_t size() const { return fields.size(); }
    // Every field inside the conditioning windows (trivially true without a spec).
    bool conditioning_holds() const;
    // Concatenation of ensembles with the same spec; weights re-normalized by size.
    static Ensemble merge(const Ensemble& x, const Ensemble& y);
    Ensemble subset(std::size_t begin, std::size_t end) const;
};

struct RejectionOptions
{
    std::uint64_t max_attempts = 400'000'000;
    std::size_t batch = 4096;
    bool fallback = false; // reweighting fallback when the budget runs out
    double fallback_cell = 0.05;
};

Ensemble sample_unconditioned(std::size_t count, const SamplerConfig& cfg);

// Rejection from sample_wiener. Attempts are indexed by draw number within the
// stream and acceptances are kept in draw order, so the output does not depend
// on the worker count.
Ensemble sample_conditioned(const ConditioningSpec& spec, std::size_t count, const SamplerConfig& cfg,
                            const RejectionOptions& opt = {});

// Acceptance rate alone (no fields kept) over a fixed number of attempts.
stats::Estimate acceptance_rate(const ConditioningSpec& spec, std::uint64_t attempts, const SamplerConfig& cfg);

struct LowModeEstimate
{
    double probability = 0;
    double se = 0;
};

// P0 (or P_eps if epsilon > 0 is passed in spec and use_boxes is set) of a
// region of the low modes |n| <= N, by Monte Carlo over the Gaussian factor of
// the ratio formula. f_tail must have tail_start N + 1 and f0 tail_start 0.
LowModeEstimate low_mode_marginal(const ConditioningSpec& spec, int mode_cutoff,
                                  const std::function<bool(std::span<const cplx> xi)>& region,
                                  const DensityGrid* f_tail, const DensityGrid* f0, std::size_t samples,
                                  std::uint64_t seed, std::uint64_t stream, bool use_boxes = false);

using Observable = std::function<double(const FourierField&)>;
// mass, momentum, l4 (int |u|^4), l6, hamiltonian4 (defocusing p=4), hs_quarter,
// hs04, re_c1, abs_c0_sq
Observable named_observable(const std::string& name);
std::vector<std::string> observable_names();

struct SweepRow
{
    double epsilon = 0;
    double mean = 0;
    double se = 0;
    double acceptance_rate = 0;
    std::size_t count = 0;
};

struct SweepTable
{
    std::vector<SweepRow> rows;
    double extrapolated = 0; // E0 in E = E0 + c eps^q
    double extrapolated_se = 0;
    double c = 0;
    double q = 0;
};

// Fit E = E0 + c eps^q (q on a grid, weighted least squares for E0 and c).
SweepTable fit_extrapolation(std::vector<SweepRow> rows);

SweepTable epsilon_sweep(const Observable& observable, const ConditioningSpec& tmpl, const std::vector<double>& eps_list,
                         std::size_t count, const SamplerConfig& cfg, const RejectionOptions& opt = {});

} // namespace levygibbs
