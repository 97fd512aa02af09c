#include <doctest.h>

#include <cmath>

#include "evstab/equilibria.hpp"
#include "fixtures.hpp"

using namespace evstab;
using doctest::Approx;

TEST_SUITE("equilibria") {
    TEST_CASE("vacuum critical radii") {
        const auto c = schwarzschild_critical_radii(1, 15);
        CHECK(c.s_L == Approx(4.145898033750315).epsilon(1e-14));
        CHECK(c.r_L == Approx(10.854101966249685).epsilon(1e-14));
        CHECK(schwarzschild_psi_prime(1, 15, c.s_L) == Approx(0).scale(1));
        CHECK(schwarzschild_psi(1, 16, 4) == Approx(1).epsilon(1e-15));
        CHECK_THROWS_AS(schwarzschild_critical_radii(1, 12), std::invalid_argument);
    }

    TEST_CASE("level radii bracket the potential minimum") {
        const auto c = schwarzschild_critical_radii(1, 15);
        const auto lv = schwarzschild_level_radii(1, 15, 0.98);
        CHECK(lv.r0 < c.s_L);
        CHECK(c.s_L < lv.r_minus);
        CHECK(lv.r_minus < c.r_L);
        CHECK(c.r_L < lv.r_plus);
        for (double r : {lv.r0, lv.r_minus, lv.r_plus}) CHECK(schwarzschild_psi(1, 15, r) == Approx(0.98).epsilon(1e-12));
    }

    TEST_CASE("shell parameters") {
        const auto p = ShellParameters::make(1, 15, 0.98);
        CHECK(p.r0 == Approx(4.145898033750315));
        CHECK(p.eta0 > 0);
        CHECK(p.r0 + p.eta0 < schwarzschild_level_radii(1, 15, 0.98).r_minus);
        CHECK_THROWS(ShellParameters::make(1, 15, 0.98, 100.0));
    }

    TEST_CASE("singularity-free polytrope against an independent integration") {
        // Eighth-order Dormand-Prince with step halving, rtol 1e-13.
        const auto& ss = fixtures::singfree_polytrope();
        CHECK(ss.E0() == Approx(0.965314635326).epsilon(1e-8));
        CHECK(ss.Rmax == Approx(3.6318590307).epsilon(1e-8));
        CHECK(ss.M_vlasov == Approx(0.12378765639).epsilon(1e-8));
        CHECK(ss.Rmin == 0);
        CHECK(ss.y(ss.Rmax) == Approx(0).scale(1));
    }

    TEST_CASE("field equation residuals are small") {
        for (const SteadyState* ss : {&fixtures::singfree_polytrope(), &fixtures::shell()}) {
            const auto r = residuals(*ss, 200);
            CHECK(r.tov < 1e-6);
            CHECK(r.field_rho < 1e-6);
            CHECK(r.field_p < 1e-6);
            const auto d = diagnostics(*ss);
            CHECK(d.max_2m_over_r < 8.0 / 9.0);
            CHECK(d.M_ADM == Approx(ss->M + ss->M_vlasov));
        }
    }

    TEST_CASE("shell support lies between the vacuum bounds") {
        const auto& ss = fixtures::shell();
        CHECK(ss.Rmin > ss.shell->r0);
        CHECK(ss.Rmin == Approx(ss.R0min).epsilon(1e-2));
        CHECK(ss.Rmin < ss.Rmax);
        CHECK(ss.rho(0.5 * (ss.Rmin + ss.Rmax)) > 0);
        CHECK(ss.rho(ss.Rmin - 0.1) == 0);
        CHECK(ss.rho(ss.Rmax + 0.1) == 0);
        CHECK(ss.m(ss.Rmin) == Approx(0).scale(1));
        CHECK(ss.M_vlasov > 0);
        // Exterior metric is Schwarzschild with mass M + M_vlasov.
        const double r = ss.Rmax + 5;
        CHECK(std::exp(-2 * ss.lambda(r)) == Approx(1 - 2 * (ss.M + ss.M_vlasov) / r).epsilon(1e-9));
    }

    TEST_CASE("zero amplitude shell is vacuum") {
        const auto ss = build_shell(ShellParameters::make(1, 15, 0.98), fixtures::polytrope(), 0);
        CHECK(ss.vacuum);
        CHECK(ss.M_vlasov == 0);
    }

    TEST_CASE("mu is nondecreasing and the table is consistent") {
        const auto& ss = fixtures::singfree_polytrope();
        const auto t = ss.table();
        REQUIRE(t.size() > 10);
        for (std::size_t i = 1; i < t.size(); ++i) {
            CHECK(t[i].r > t[i - 1].r);
            CHECK(t[i].mu0 >= t[i - 1].mu0 - 1e-15);
        }
    }
}
