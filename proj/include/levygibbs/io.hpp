#pragma once

#include "levygibbs/conditioner.hpp"
#include "levygibbs/density_kernel.hpp"
#include "levygibbs/nls_flow.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace levygibbs::io {

// Binary layouts are described in docs/FORMATS.md. All integers and doubles
// are little-endian regardless of the host.

void write_density_grid(const std::filesystem::path& path, const DensityGrid& grid);
DensityGrid read_density_grid(const std::filesystem::path& path);
void write_density_csv(const std::filesystem::path& path, const DensityGrid& grid);

// Flow parameters appended to an evolved ensemble.
struct FlowMeta
{
    double p = 4;
    Sign sign = Sign::Defocusing;
    int galerkin_cutoff = 0;
    double dt = 0;
    double T = 0;
    NonlinearStep nonlinear = NonlinearStep::Galerkin;
};

void write_ensemble(const std::filesystem::path& path, const Ensemble& ens,
                    const std::optional<FlowMeta>& flow = std::nullopt);
Ensemble read_ensemble(const std::filesystem::path& path, std::optional<FlowMeta>* flow = nullptr);

// One row per field: index, weight, then the named observables.
void write_observables_csv(const std::filesystem::path& path, const Ensemble& ens,
                           const std::vector<std::string>& names);
void write_trace_csv(const std::filesystem::path& path, const ConservationTrace& trace);

// 64-bit FNV-1a of the file contents, as 16 hex digits.
std::string fnv1a_file(const std::filesystem::path& path);

} // namespace levygibbs::io
