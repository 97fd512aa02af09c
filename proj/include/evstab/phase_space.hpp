#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "evstab/equilibria.hpp"
#include "evstab/potential_orbits.hpp"
#include "evstab/quadrature.hpp"

namespace evstab {

struct PhaseGridOptions {
    std::size_t n_L = 24;
    std::size_t n_E = 24;
    std::size_t n_theta = 1024;
    std::size_t n_cheb = 64;
    std::size_t slice_order = 16;  // velocity-slice quadrature for moments
};

// Tensor grid in (theta, E, L) over the steady-state support.
// L = L0 + (Lmax - L0) x (x^2 when the support reaches the center),
// E = Emin(L) + (E0 - Emin(L)) tau^2, theta_a = a / n_theta.
class PhaseGrid {
public:
    PhaseGrid(const SteadyState& ss, PhaseGridOptions opt = {});

    const SteadyState& state() const { return *ss_; }
    const PhaseGridOptions& options() const { return opt_; }
    const MinimalEnergy& emin() const { return emin_; }
    std::size_t nL() const { return opt_.n_L; }
    std::size_t nE() const { return opt_.n_E; }
    std::size_t nth() const { return opt_.n_theta; }
    std::size_t size() const { return nL() * nE() * nth(); }
    std::size_t n_orbits() const { return nL() * nE(); }
    std::size_t index(std::size_t a, std::size_t b, std::size_t c) const { return (c * nE() + b) * nth() + a; }
    std::size_t orbit(std::size_t b, std::size_t c) const { return c * nE() + b; }
    double theta(std::size_t a) const { return double(a) / double(nth()); }
    std::size_t mirror(std::size_t a) const { return (nth() - a) % nth(); }

    // Per orbit (index orbit(b, c)).
    const std::vector<double>& E() const { return E_; }
    const std::vector<double>& L() const { return L_; }
    const std::vector<double>& T() const { return T_; }
    const std::vector<double>& abs_phi_prime() const { return phip_; }
    const std::vector<double>& EL_weight() const { return wEL_; }  // dE dL quadrature weight
    const std::vector<double>& L_nodes() const { return Lc_; }
    const OrbitMap& orbit_map(std::size_t o) const { return maps_[o]; }

    // Per grid point.
    const std::vector<double>& R() const { return R_; }
    const std::vector<double>& W() const { return W_; }
    const std::vector<double>& mu() const { return mu_; }
    const std::vector<double>& lambda() const { return lam_; }
    // Inner-product weight 4 pi^2 T / |phi'| dtheta dE dL at each grid point.
    const std::vector<double>& h_weight() const { return hw_; }

    // Curvilinear coordinates of an arbitrary (E, L) in the support.
    double x_of_L(double L) const;
    double tau_of(double E, double L) const;
    const std::vector<double>& x_nodes() const { return x_; }
    const std::vector<double>& tau_nodes() const { return tau_; }

private:
    const SteadyState* ss_;
    PhaseGridOptions opt_;
    MinimalEnergy emin_;
    bool sqrt_var_ = false;
    double Llo_ = 0, Lhi_ = 0;
    std::vector<double> x_, tau_, Lc_;
    std::vector<double> E_, L_, T_, phip_, wEL_;
    std::vector<OrbitMap> maps_;
    std::vector<double> R_, W_, mu_, lam_, hw_;
};

enum class Parity { even, odd, none };

using Evaluator = std::function<double(double r, double w, double L)>;

struct PhaseFunction {
    const PhaseGrid* grid = nullptr;
    std::vector<double> v;
    Parity parity = Parity::none;
    Evaluator eval;  // optional pointwise representation in (r, w, L)

    PhaseFunction operator+(const PhaseFunction& o) const;
    PhaseFunction operator-(const PhaseFunction& o) const;
    PhaseFunction operator*(double s) const;
};

PhaseFunction sample(const PhaseGrid& g, Evaluator f, Parity parity = Parity::none);
// Function of (E, L) only, constant along orbits.
PhaseFunction sample_EL(const PhaseGrid& g, const std::function<double(double E, double L)>& f);
PhaseFunction zero_function(const PhaseGrid& g, Parity parity = Parity::even);

// Parity split by pairing theta with 1 - theta.
std::pair<PhaseFunction, PhaseFunction> parity_split(const PhaseFunction& f);
double inner_product(const PhaseFunction& f, const PhaseFunction& g);
double norm(const PhaseFunction& f);

struct Moments {
    double rho = 0, p = 0, j = 0, q = 0;
};

// Moments of a pointwise function at radius r by velocity-slice quadrature.
Moments slice_moments(const SteadyState& ss, const Evaluator& f, double r, std::size_t order, Parity parity);

// Moments at each radius. Uses the evaluator when present, otherwise resamples
// the grid values through the angle map theta(r, E, L).
std::vector<Moments> source_terms(const PhaseFunction& f, const std::vector<double>& r);
std::vector<Moments> source_terms_grid_route(const PhaseFunction& f, const std::vector<double>& r);

// Radial panel grid on [Rmin, Rmax] with optional interior break points.
PanelGrid support_panels(const SteadyState& ss, std::size_t panels, std::size_t order,
                         const std::vector<double>& interior_breaks = {});

// lambda_f on the nodes of pg, from rho_f at those nodes.
std::vector<double> lambda_field(const SteadyState& ss, const PanelGrid& pg, const std::vector<double>& rho_f);
std::vector<double> lambda_field(const PhaseFunction& f, const PanelGrid& pg);

// (pi/r^2) int int w^2 |phi'| dw dL at radius r.
double hlr_lhs(const SteadyState& ss, double r, std::size_t order);
double hlr_identity_residual(const SteadyState& ss, std::size_t n_r = 200, std::size_t order = 16);
double s4_bound(const SteadyState& ss, std::size_t n_r = 200, std::size_t order = 16);

// Relative gap between the grid sum of e^{-lambda} T h dtheta dE dL and the radial
// integral of h dr dw dL; h must carry an evaluator.
double volume_element_defect(const PhaseFunction& h, std::size_t panels = 48, std::size_t order = 16);

}  // namespace evstab
