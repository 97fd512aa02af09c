#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evstab/config.hpp"
#include "evstab/mathur.hpp"
#include "evstab/potential_orbits.hpp"

namespace evstab {

enum ExitCode : int { exit_ok = 0, exit_gate = 2, exit_numerical = 3, exit_config = 4 };

enum class StageStatus { built, gated, failed, skipped };
std::string to_string(StageStatus s);

struct StageRecord {
    std::string name;
    StageStatus status = StageStatus::skipped;
    std::string message;
    nlohmann::ordered_json residuals = nlohmann::ordered_json::object();
    double seconds = 0;
};

struct PipelineReport {
    RunConfig config;
    std::vector<StageRecord> stages;
    std::optional<SteadyState> state;
    std::optional<StabilityReport> stability;
    std::optional<MathurKernel> kernel;  // base kernel
    std::string outcome;  // verdict name, or the reason the run stopped
    int exit_code = exit_ok;
};

// Stages: build, residuals, single_well, period_bounds, hlr, s4, kernel. A failed
// stage is recorded with its residuals and ends the run.
PipelineReport run_pipeline(const RunConfig& cfg);
// Same, starting from an existing state; physical parameters in the echo come from the state.
PipelineReport run_pipeline(const RunConfig& cfg, const SteadyState& ss);

// Main report: deterministic, no timings.
nlohmann::ordered_json to_json(const PipelineReport& r);
nlohmann::ordered_json timings_json(const PipelineReport& r);
nlohmann::ordered_json to_json(const StabilityReport& s);
nlohmann::ordered_json to_json(const SingleWellReport& s);

SteadyState build_state(const RunConfig& cfg);
// Physical parameters (mode, eos, shell or center data, solver) taken from ss.
RunConfig adopt_state_parameters(RunConfig cfg, const SteadyState& ss);

struct OrbitSample {
    double E, L, r_minus, r_plus, T;
};
// Deterministic Kronecker sequence over the (E, L) support.
std::vector<OrbitSample> sample_orbits(const SteadyState& ss, std::size_t n);
void write_orbits_csv(const std::vector<OrbitSample>& s, std::ostream& os);

void write_kernel_csv(const MathurKernel& k, std::ostream& os);

// Gram condition, dropped count and per-element kernel-B residuals.
nlohmann::ordered_json basis_report(const SteadyState& ss, const RunConfig& cfg);

struct PlotMarker {
    std::string name;
    double L, E, r;
    double psi;     // on its own curve
    double psi_L0;  // on the Psi_{L0} curve
};
struct PlotData {
    double M, L0, E0, L, E;
    std::vector<double> r, psi_L0, psi_L;  // vacuum curves
    std::vector<PlotMarker> markers;     // ascending r within each curve
};
// Vacuum potentials Psi_{L0} and Psi_L with the radii marked on each curve.
PlotData potential_plot_data(double M, double L0, double E0, double L, double E, std::size_t n = 600);
void write_potential_curves_csv(const PlotData& f, std::ostream& os);
void write_potential_markers_csv(const PlotData& f, std::ostream& os);

// Writes summary.json, timings.json, steady_state.csv, state.evs, potential_*.csv and
// kernel.csv according to the emit flags. Returns the written paths.
std::vector<std::filesystem::path> emit_artifacts(const PipelineReport& r, const RunConfig& cfg);

}  // namespace evstab
