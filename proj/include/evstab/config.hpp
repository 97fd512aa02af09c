#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evstab/equilibria.hpp"
#include "evstab/mathur.hpp"
#include "evstab/phase_space.hpp"

namespace evstab {

// Every problem found while parsing, in file order.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> errs);
    std::vector<std::string> errors;
};

struct RunConfig {
    std::optional<Mode> mode;

    double M = 1;
    std::optional<double> L0;              // shell: 15, singfree: 0
    double E_intermediate = 0.98;
    std::optional<double> eta0;            // midpoint of ]0, r_-(E, L0) - r0[ when unset
    double y0 = 0.1;
    std::optional<double> delta;           // shell: 1e-3, singfree: 1
    Family family = Family::polytrope;
    double k = 1, l = 0;

    SolverOptions solver;
    std::size_t single_well_n_L = 64, single_well_samples = 2048;
    std::size_t period_n_E = 24, period_n_L = 24;
    double residual_tol = 1e-6;
    double hlr_tol = 1e-6;
    PhaseGridOptions phase;
    KernelBasisOptions basis;              // used by basis-report
    KernelOptions kernel;
    double tol = 1e-3;
    bool refine = true;

    std::size_t orbit_samples = 100;
    double plot_L = 18, plot_E = 0.97;  // second Psi curve in the plot data

    std::string output_dir = "ev-stab-out";
    bool emit_json = true, emit_csv = true, emit_plot_data = true, emit_state = true, emit_kernel_dump = false;

    double resolved_L0() const;
    double resolved_delta() const;
    EquationOfState eos() const;
    ShellParameters shell_parameters() const;
    StabilityOptions stability_options() const;
};

// mode_required = false accepts a file without mode (physics then comes from a state file).
RunConfig parse_config_text(const std::string& text, bool mode_required = true);
RunConfig parse_config(const std::filesystem::path& path, bool mode_required = true);

// Fully resolved knobs, including defaults.
nlohmann::ordered_json to_json(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace evstab
