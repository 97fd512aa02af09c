#pragma once

#include <optional>
#include <string>

namespace evstab {

enum class Family { polytrope, king };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

struct EquationOfState {
    Family family = Family::polytrope;
    double k = 1.0;
    double l = 0.0;
    double L0 = 0.0;
    double delta = 1.0;
    std::optional<double> cutoff_energy;

    // Throws std::invalid_argument on parameter violations.
    void validate() const;
    // Profile Phi(alpha) and its derivative; zero for alpha <= 0.
    double Phi(double alpha) const;
    double Phi_prime(double alpha) const;
    double E0() const;
};

double phi(const EquationOfState& eos, double E, double L);

// dphi/dE. At a point where phi' jumps (k == 1 polytrope at E == E0) the
// one-sided interior limit is returned and `boundary_flag` is set if given.
double phi_prime(const EquationOfState& eos, double E, double L, bool* boundary_flag = nullptr);

// Reduced density and pressure profiles (without the amplitude delta).
double profile_G(const EquationOfState& eos, double r, double y);
double profile_H(const EquationOfState& eos, double r, double y);

// Both at once, sharing the quadrature; order is the Gauss-Legendre order.
struct GH {
    double G = 0, H = 0;
};
GH profile_GH(const EquationOfState& eos, double r, double y, int order = 64);

double beta_c(double l);  // int_0^1 s^l (1-s)^{-1/2} ds
double beta_d(double l);  // int_0^1 s^l (1-s)^{1/2} ds

}  // namespace evstab
