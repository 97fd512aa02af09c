#pragma once

#include <string>
#include <vector>

#include "evstab/equilibria.hpp"
#include "evstab/quadrature.hpp"

namespace evstab {

double effective_potential(const SteadyState& ss, double L, double r);

// Location and value of the minimum of Psi_L over the radial support.
struct PotentialMinimum {
    double r_L;
    double E_min;
};
PotentialMinimum potential_minimum(const SteadyState& ss, double L);

// Largest L with a nonempty I_L, i.e. E_min(L) = E0.
double max_angular_momentum(const SteadyState& ss);
// Smallest admissible L (L0, or a tiny positive value when L0 = 0).
double min_angular_momentum(const SteadyState& ss);

struct LCheck {
    double L = 0;
    double I_lo = 0, I_hi = 0;
    int sign_changes = 0;
    bool connected = true;
    std::vector<double> critical_radii;
    double r_L = 0;
    double E_min = 0;
};

struct SupportEL {
    double E0 = 0;
    double L_lo = 0, L_hi = 0;
    std::vector<double> L_grid, r_L, E_min;
    double T_inf = 0, T_sup = 0;
};

struct SingleWellReport {
    bool pass = false;
    std::vector<LCheck> per_L;
    std::vector<std::string> violations;
    double max_2m_over_r = 0;
    bool sufficient_condition = false;  // isotropic singularity-free with 2m/r <= 1/3
    SupportEL support;
};

SingleWellReport verify_single_well(const SteadyState& ss, std::size_t n_L = 64, std::size_t samples = 2048);

struct TurningPoints {
    double r_minus, r_plus;
};
TurningPoints turning_points(const SteadyState& ss, double E, double L, double r_L = 0);

struct PeriodResult {
    double T = 0;
    bool harmonic = false;
};
PeriodResult period(const SteadyState& ss, double E, double L, std::size_t order = 96);
double harmonic_period(const SteadyState& ss, double E, double L);

// Angle-parameterized orbit: theta(u) on r = mid + half sin(u), u in [-pi/2, pi/2].
class OrbitMap {
public:
    OrbitMap() = default;
    OrbitMap(const SteadyState& ss, double E, double L, std::size_t n_cheb = 64, double r_L = 0);

    double E() const { return E_; }
    double L() const { return L_; }
    double T() const { return T_; }
    double r_minus() const { return rm_; }
    double r_plus() const { return rp_; }
    bool harmonic() const { return harmonic_; }

    // theta in [0, 1/2] for r in [r_-, r_+].
    double theta_of_r(double r) const;
    // Orbit position for theta in [0, 1); W < 0 on ]1/2, 1[.
    double R(double theta) const;
    void RW(double theta, double& R, double& W) const;
    // dtheta/dr at fixed (E, L), positive branch.
    double dtheta_dr(double r) const;

private:
    double u_of_theta(double th) const;
    const SteadyState* ss_ = nullptr;
    double E_ = 0, L_ = 0, T_ = 0, rm_ = 0, rp_ = 0, mid_ = 0, half_ = 0;
    bool harmonic_ = false;
    double scale_ = 0;
    Chebyshev theta_u_;
};

struct OrbitTable {
    double E = 0, L = 0;
    double r_minus = 0, r_plus = 0, T = 0;
    std::vector<double> theta_nodes, R_nodes, W_nodes;
};
OrbitTable orbit_solution(const SteadyState& ss, double E, double L, std::size_t n_theta);

// Period from integrating the characteristic system from (r_-, w = 0) over one oscillation.
double characteristic_period(const SteadyState& ss, double E, double L, double rtol = 1e-12);

struct PeriodBounds {
    double T_inf = 0, T_sup = 0;
    std::size_t samples = 0;
};
PeriodBounds period_bounds(const SteadyState& ss, std::size_t nE = 24, std::size_t nL = 24);

}  // namespace evstab

namespace evstab {

// Chebyshev table of L -> E_min(L) = min Psi_L on [L_lo, L_hi]. Uses sqrt(L - L0) as
// variable when the lower end is a center (L0 = 0, singularity-free).
class MinimalEnergy {
public:
    MinimalEnergy() = default;
    MinimalEnergy(const SteadyState& ss, std::size_t n = 48);
    double operator()(double L) const;
    double L_lo() const { return lo_; }
    double L_hi() const { return hi_; }
    double E0() const { return E0_; }
    double max_error_estimate() const { return err_; }

private:
    double x_of(double L) const;
    double lo_ = 0, hi_ = 0, E0_ = 0, err_ = 0;
    bool sqrt_var_ = false;
    Chebyshev cheb_;
};

}  // namespace evstab
