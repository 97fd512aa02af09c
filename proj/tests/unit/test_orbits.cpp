#include <doctest.h>

#include <cmath>

#include "evstab/potential_orbits.hpp"
#include "fixtures.hpp"

using namespace evstab;
using doctest::Approx;

namespace {

struct Sample {
    double E, L;
};

// Interior (E, L) points at fractions of the L range and of the energy gap.
std::vector<Sample> interior(const SteadyState& ss) {
    std::vector<Sample> out;
    const double lo = min_angular_momentum(ss), hi = max_angular_momentum(ss);
    for (double fl : {0.1, 0.5, 0.9}) {
        const double L = lo + fl * (hi - lo);
        const double Emin = potential_minimum(ss, L).E_min;
        for (double fe : {0.05, 0.5, 0.95}) out.push_back({Emin + fe * (ss.E0() - Emin), L});
    }
    return out;
}

}  // namespace

TEST_SUITE("potential_orbits") {
    TEST_CASE("single-well gate passes on both reference states") {
        for (const SteadyState* ss : {&fixtures::singfree_polytrope(), &fixtures::shell()}) {
            const auto rep = verify_single_well(*ss, 24, 512);
            CHECK(rep.pass);
            CHECK(rep.violations.empty());
            CHECK(rep.per_L.size() == 24);
            for (const auto& c : rep.per_L) CHECK(c.connected);
        }
    }

    TEST_CASE("sufficient condition flag for the dilute isotropic state") {
        const auto rep = verify_single_well(fixtures::singfree_polytrope(), 8, 256);
        CHECK(rep.sufficient_condition == (rep.max_2m_over_r <= 1.0 / 3.0));
    }

    TEST_CASE("turning points solve Psi_L = E") {
        for (const SteadyState* ss : {&fixtures::singfree_polytrope(), &fixtures::shell()})
            for (const auto& s : interior(*ss)) {
                const auto tp = turning_points(*ss, s.E, s.L);
                CHECK(tp.r_minus < tp.r_plus);
                CHECK(ss->psi(s.L, tp.r_minus) == Approx(s.E).epsilon(1e-10));
                CHECK(ss->psi(s.L, tp.r_plus) == Approx(s.E).epsilon(1e-10));
            }
    }

    TEST_CASE("quadrature period agrees with the characteristic flow") {
        for (const SteadyState* ss : {&fixtures::singfree_polytrope(), &fixtures::shell()})
            for (const auto& s : interior(*ss)) {
                const double T = period(*ss, s.E, s.L).T;
                CHECK(T > 0);
                CHECK(characteristic_period(*ss, s.E, s.L) == Approx(T).epsilon(1e-6));
            }
    }

    TEST_CASE("period tends to the harmonic value at the well bottom") {
        const auto& ss = fixtures::shell();
        const double L = 16;
        const double Emin = potential_minimum(ss, L).E_min;
        const double E = Emin + 2e-4 * (ss.E0() - Emin);
        CHECK(period(ss, E, L).T == Approx(harmonic_period(ss, E, L)).epsilon(1e-2));
    }

    TEST_CASE("angle map inverts the orbit") {
        const auto& ss = fixtures::singfree_polytrope();
        for (const auto& s : interior(ss)) {
            const OrbitMap om(ss, s.E, s.L);
            CHECK(om.theta_of_r(om.r_minus()) == Approx(0).scale(1));
            CHECK(om.theta_of_r(om.r_plus()) == Approx(0.5));
            for (double th : {0.05, 0.2, 0.37, 0.49}) {
                CHECK(om.theta_of_r(om.R(th)) == Approx(th).epsilon(1e-9));
                CHECK(om.R(1 - th) == Approx(om.R(th)).epsilon(1e-12));
                double R, W;
                om.RW(th, R, W);
                CHECK(W > 0);
                om.RW(1 - th, R, W);
                CHECK(W < 0);
            }
        }
    }

    TEST_CASE("period bounds are positive and finite") {
        const auto pb = period_bounds(fixtures::shell(), 8, 8);
        CHECK(pb.T_inf > 0);
        CHECK(std::isfinite(pb.T_sup));
        CHECK(pb.T_inf <= pb.T_sup);
        CHECK(pb.samples > 0);
    }
}
