#pragma once

#include "evstab/equilibria.hpp"

namespace fixtures {

inline evstab::EquationOfState polytrope(double k = 1, double l = 0, double L0 = 0) {
    evstab::EquationOfState e;
    e.family = evstab::Family::polytrope;
    e.k = k;
    e.l = l;
    e.L0 = L0;
    return e;
}

inline evstab::EquationOfState king(double l = 0) {
    evstab::EquationOfState e;
    e.family = evstab::Family::king;
    e.l = l;
    return e;
}

// M = 1, L0 = 15, E = 0.98, delta = 1e-3.
inline const evstab::SteadyState& shell() {
    static const evstab::SteadyState s =
        evstab::build_shell(evstab::ShellParameters::make(1, 15, 0.98), polytrope(), 1e-3);
    return s;
}

inline const evstab::SteadyState& singfree_polytrope() {
    static const evstab::SteadyState s = evstab::solve_singularity_free(polytrope(), 0.1);
    return s;
}

}  // namespace fixtures

#include "evstab/phase_space.hpp"

namespace fixtures {

inline const evstab::PhaseGrid& shell_grid() {
    static const evstab::PhaseGrid g(shell(), {.n_L = 12, .n_E = 12, .n_theta = 256});
    return g;
}

inline const evstab::PhaseGrid& singfree_grid() {
    static const evstab::PhaseGrid g(singfree_polytrope(), {.n_L = 12, .n_E = 12, .n_theta = 256});
    return g;
}

}  // namespace fixtures
