#pragma once

#include <cmath>
#include <random>

#include "evstab/phase_space.hpp"

namespace evstab::test_support {

// Smooth function of (r, w, L) with seeded random coefficients, sampled on the grid.
inline PhaseFunction random_smooth(const PhaseGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    double c[8];
    for (double& x : c) x = U(rng);
    const auto& ss = g.state();
    const double a = ss.Rmin, b = ss.Rmax;
    const double L0 = g.L_nodes().front(), L1 = g.L_nodes().back();
    auto fn = [=](double r, double w, double L) {
        const double x = (r - a) / (b - a), l = (L - L0) / (L1 - L0 + 1e-300);
        return 1 + c[0] * x + c[1] * w + c[2] * l + c[3] * x * w + c[4] * w * w +
               c[5] * std::sin(3 * x + 2 * c[6] * w) + c[7] * x * l;
    };
    return sample(g, fn, Parity::none);
}

inline PhaseFunction remove_orbit_mean(const PhaseFunction& f) {
    const auto& g = *f.grid;
    PhaseFunction out = f;
    out.eval = nullptr;
    for (std::size_t c = 0; c < g.nL(); ++c)
        for (std::size_t b = 0; b < g.nE(); ++b) {
            double m = 0;
            for (std::size_t a = 0; a < g.nth(); ++a) m += f.v[g.index(a, b, c)];
            m /= double(g.nth());
            for (std::size_t a = 0; a < g.nth(); ++a) out.v[g.index(a, b, c)] -= m;
        }
    return out;
}

}  // namespace evstab::test_support
