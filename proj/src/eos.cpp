#include "evstab/eos.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evstab/quadrature.hpp"

namespace evstab {

std::string to_string(Family f) { return f == Family::polytrope ? "polytrope" : "king"; }

Family family_from_string(const std::string& s) {
    if (s == "polytrope") return Family::polytrope;
    if (s == "king") return Family::king;
    throw std::invalid_argument("unknown eos family '" + s + "' (expected polytrope|king)");
}

void EquationOfState::validate() const {
    if (!(l > -0.5)) throw std::invalid_argument("eos: l must exceed -1/2");
    if (family == Family::polytrope && !(k >= 0 && k < l + 1.5))
        throw std::invalid_argument("eos: polytrope requires 0 <= k < l + 3/2");
    if (!(L0 >= 0)) throw std::invalid_argument("eos: L0 must be >= 0");
    if (!(delta >= 0)) throw std::invalid_argument("eos: delta must be >= 0");
    if (cutoff_energy && !(*cutoff_energy > 0 && *cutoff_energy < 1))
        throw std::invalid_argument("eos: cutoff energy must lie in ]0,1[");
}

double EquationOfState::Phi(double alpha) const {
    if (alpha <= 0) return 0;
    if (family == Family::king) return std::expm1(alpha);
    return k == 0 ? 1.0 : std::pow(alpha, k);
}

double EquationOfState::Phi_prime(double alpha) const {
    if (alpha <= 0) return 0;
    if (family == Family::king) return std::exp(alpha);
    if (k == 0) return 0;
    return k * std::pow(alpha, k - 1);
}

double EquationOfState::E0() const {
    if (!cutoff_energy) throw std::invalid_argument("eos: cutoff energy is not set");
    return *cutoff_energy;
}

static double l_factor(const EquationOfState& eos, double L) {
    double d = L - eos.L0;
    if (d <= 0) return eos.l == 0 ? (d == 0 ? 1.0 : 0.0) : 0.0;
    return eos.l == 0 ? 1.0 : std::pow(d, eos.l);
}

double phi(const EquationOfState& eos, double E, double L) {
    const double E0 = eos.E0();
    const double alpha = 1 - E / E0;
    if (alpha <= 0 || L < eos.L0) return 0;
    return eos.delta * eos.Phi(alpha) * l_factor(eos, L);
}

double phi_prime(const EquationOfState& eos, double E, double L, bool* boundary_flag) {
    const double E0 = eos.E0();
    const double alpha = 1 - E / E0;
    if (L < eos.L0 || alpha < 0) return 0;
    if (alpha == 0) {
        // Jump of phi' at the energy cut when Phi'(0+) != 0.
        double lim = eos.family == Family::king ? 1.0 : (eos.k == 1 ? 1.0 : 0.0);
        if (lim == 0) return 0;
        if (boundary_flag) *boundary_flag = true;
        return -eos.delta * lim * l_factor(eos, L) / E0;
    }
    return -eos.delta * eos.Phi_prime(alpha) * l_factor(eos, L) / E0;
}

double beta_c(double l) { return std::beta(l + 1, 0.5); }
double beta_d(double l) { return std::beta(l + 1, 1.5); }

GH profile_GH(const EquationOfState& eos, double r, double y, int order) {
    if (!std::isfinite(y) || !std::isfinite(r)) throw std::invalid_argument("profile_G/H: non-finite input");
    if (!(r > 0)) throw std::invalid_argument("profile_G/H: r must be positive");
    const double s0 = std::sqrt(1 + eos.L0 / (r * r));
    const double a = 1 - std::exp(-y) * s0;
    GH out;
    if (a <= 0) return out;
    // alpha = a (1 - t^2); e^{2y}(1-alpha)^2 - 1 - L0/r^2 = e^{2y}(1-alpha-c)(1-alpha+c), c = e^{-y}s0.
    const double e2y = std::exp(2 * y);
    const double c = 1 - a;
    const auto& rule = gauss_legendre(static_cast<std::size_t>(order));
    double sG = 0, sH = 0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double t = 0.5 * (rule.x[i] + 1);
        const double wt = 0.5 * rule.w[i];
        const double alpha = a * (1 - t * t);
        const double one_m = 1 - alpha;
        const double X = e2y * (a * t * t) * (one_m + c);  // >= 0
        const double Ph = eos.Phi(alpha);
        const double jac = 2 * a * t;
        const double Xl = std::pow(X, eos.l + 0.5);
        sG += wt * jac * Ph * one_m * one_m * Xl;
        sH += wt * jac * Ph * Xl * X;
    }
    const double r2l = eos.l == 0 ? 1.0 : std::pow(r, 2 * eos.l);
    out.G = 2 * std::numbers::pi * beta_c(eos.l) * r2l * std::exp(3 * y) * sG;
    out.H = 2 * std::numbers::pi * beta_d(eos.l) * r2l * std::exp(y) * sH;
    return out;
}

double profile_G(const EquationOfState& eos, double r, double y) { return profile_GH(eos, r, y).G; }
double profile_H(const EquationOfState& eos, double r, double y) { return profile_GH(eos, r, y).H; }

}  // namespace evstab
