#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "evstab/quadrature.hpp"

namespace evstab {

// Quadrature over the velocity slice {w^2 + (L - L0)/r^2 < A} at fixed r,
// returning (pi/r^2) * integral of F(w, L) dw dL. F returns N values.
// Coordinates: L = L0 + r^2 A (1 - s^2), w = s sqrt(A) v with s, v in [0,1] x [-1,1].
template <std::size_t N, class F>
std::array<double, N> slice_integrate(double r, double A, double L0, std::size_t ns, std::size_t nv, F&& f,
                                      bool even_in_w = false) {
    std::array<double, N> acc{};
    if (!(A > 0)) return acc;
    const auto& gs = gauss_legendre(ns);
    const auto& gv = gauss_legendre(nv);
    const double sqA = std::sqrt(A);
    const double r2 = r * r;
    for (std::size_t i = 0; i < ns; ++i) {
        const double s = 0.5 * (gs.x[i] + 1);
        const double L = L0 + r2 * A * (1 - s * s);
        const double js = 0.5 * gs.w[i] * 2 * r2 * A * sqA * s * s;
        for (std::size_t j = 0; j < nv; ++j) {
            double v, wv;
            if (even_in_w) {
                v = 0.5 * (gv.x[j] + 1);
                wv = gv.w[j];  // doubled half-interval
            } else {
                v = gv.x[j];
                wv = gv.w[j];
            }
            const auto val = f(s * sqA * v, L);
            for (std::size_t k = 0; k < N; ++k) acc[k] += js * wv * val[k];
        }
    }
    const double pre = std::numbers::pi / r2;
    for (auto& a : acc) a *= pre;
    return acc;
}

}  // namespace evstab
