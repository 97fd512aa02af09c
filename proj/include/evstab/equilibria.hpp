#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evstab/eos.hpp"
#include "evstab/ode.hpp"

namespace evstab {

enum class Mode { singfree, shell };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct CriticalRadii {
    double s_L;  // local maximum of the vacuum potential
    double r_L;  // local minimum
};

// Vacuum Schwarzschild effective potential sqrt(1-2M/r) sqrt(1+L/r^2).
double schwarzschild_psi(double M, double L, double r);
double schwarzschild_psi_prime(double M, double L, double r);
CriticalRadii schwarzschild_critical_radii(double M, double L);

struct LevelRadii {
    double r0, r_minus, r_plus;
};
LevelRadii schwarzschild_level_radii(double M, double L, double E);

struct ShellParameters {
    double M = 1;
    double L0 = 15;
    double E_intermediate = 0.98;
    double r0 = 0;    // s_{L0}
    double eta0 = 0;  // r0 + eta0 < r_-(E, L0)
    double y_init = 0;

    // Derives r0, eta0 (midpoint choice unless given) and y_init, then validates.
    static ShellParameters make(double M, double L0, double E, std::optional<double> eta0 = {});
    void validate() const;
};

struct SolverOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    std::size_t slice_order = 16;
    std::size_t cheb_nodes = 512;
};

struct TableRow {
    double r, y, mu0, lambda0, rho0, p0, q0, m;
};

struct Diagnostics {
    double M_ADM = 0;
    double N_rest_mass = 0;
    std::optional<double> binding_energy;
    double max_2m_over_r = 0;
};

struct Residuals {
    double tov = 0;
    double field_rho = 0;  // e^{-2 lambda}(2 r lambda' - 1) + 1 = 8 pi r^2 rho
    double field_p = 0;    // e^{-2 lambda}(2 r mu' + 1) - 1 = 8 pi r^2 p
};

class SteadyState {
public:
    Mode mode = Mode::singfree;
    double M = 0;
    EquationOfState eos;  // cutoff_energy holds E0
    double y0 = 0;        // singularity-free central value
    std::optional<ShellParameters> shell;
    double R0min = 0, R0max = 0;  // vacuum support bounds (shell)
    double Rmin = 0, Rmax = 0;
    double M_vlasov = 0;
    bool vacuum = false;
    SolverOptions opts;

    double E0() const { return *eos.cutoff_energy; }
    double y(double r) const;
    double m(double r) const;  // quasi-local Vlasov mass
    double mu(double r) const { return std::log(E0()) - y(r); }
    double lambda(double r) const;
    double mu_prime(double r) const;
    double lambda_prime(double r) const;
    double rho(double r) const;
    double p(double r) const;
    double q(double r) const;
    double rho_plus_p(double r) const;
    // Slice extent e^{2y} - 1 - L0/r^2 inside the support, 0 outside.
    double slice_A(double r) const;
    bool in_support(double r) const { return !vacuum && r > Rmin && r < Rmax; }

    double psi(double L, double r) const;
    double psi_prime(double L, double r) const;
    double psi_second(double L, double r) const;

    // Horizon radius (2M) or 0.
    double r_inner() const { return 2 * M; }

    std::vector<double> grid() const;
    std::vector<TableRow> table() const;

    DenseSolution<2> sol;  // (y, m); shells store (y - y_vacuum, m)
    double y_inf = 0;
    double r_ode_end = 0;
};

SteadyState solve_singularity_free(const EquationOfState& eos, double y0, const SolverOptions& opts = {});
SteadyState build_shell(const ShellParameters& params, EquationOfState eos, double delta,
                        const SolverOptions& opts = {});

Diagnostics diagnostics(const SteadyState& ss);
Residuals residuals(const SteadyState& ss, std::size_t samples = 400);

}  // namespace evstab
