#include <doctest.h>

#include <cmath>

#include "evstab/eos.hpp"
#include "fixtures.hpp"

using namespace evstab;
using doctest::Approx;

TEST_SUITE("eos") {
    TEST_CASE("polytrope values at the documented point") {
        auto e = fixtures::polytrope();
        e.cutoff_energy = 0.9;
        CHECK(phi(e, 0.45, 3) == Approx(0.5).epsilon(1e-15));
        CHECK(phi_prime(e, 0.45, 3) == Approx(-1 / 0.9).epsilon(1e-15));
        CHECK(phi(e, 0.9, 3) == 0);
        CHECK(phi_prime(e, 0.95, 3) == 0);
    }

    TEST_CASE("king profile and derivative") {
        auto e = fixtures::king();
        e.cutoff_energy = 0.9;
        // exp(0.2) - 1 to double precision.
        CHECK(phi(e, 0.72, 1) == Approx(0.22140275816016985).epsilon(1e-14));
        // Centered difference of phi with step 1e-7.
        CHECK(phi_prime(e, 0.72, 1) == Approx(-1.3571141754820104).epsilon(1e-6));
    }

    TEST_CASE("phi' matches centered differences inside the support") {
        for (auto e : {fixtures::polytrope(1.2, 0.5, 0.3), fixtures::king(0.5), fixtures::polytrope(2, 1, 0)}) {
            e.cutoff_energy = 0.93;
            for (double E : {0.5, 0.7, 0.85, 0.92})
                for (double L : {0.4, 1.0, 2.5}) {
                    const double h = 1e-6;
                    const double fd = (phi(e, E + h, L) - phi(e, E - h, L)) / (2 * h);
                    CHECK(phi_prime(e, E, L) == Approx(fd).epsilon(1e-6));
                    CHECK(phi_prime(e, E, L) < 0);
                }
        }
    }

    TEST_CASE("k = 1 cut-off jump is flagged") {
        auto e = fixtures::polytrope();
        e.cutoff_energy = 0.9;
        bool flag = false;
        CHECK(phi_prime(e, 0.9, 1, &flag) == Approx(-1 / 0.9));
        CHECK(flag);
    }

    TEST_CASE("parameter validation") {
        auto e = fixtures::polytrope(2, 0);
        CHECK_THROWS_AS(e.validate(), std::invalid_argument);  // k >= l + 3/2
        e = fixtures::polytrope(1, -0.6);
        CHECK_THROWS_AS(e.validate(), std::invalid_argument);
        e = fixtures::polytrope();
        CHECK_THROWS_AS(phi(e, 0.5, 1), std::invalid_argument);  // cut-off unset
        CHECK_THROWS_AS(family_from_string("plummer"), std::invalid_argument);
    }

    TEST_CASE("G and H against independent alpha-integrals") {
        // 30-digit adaptive quadrature of the alpha-integrals.
        const GH p = profile_GH(fixtures::polytrope(), 1, 0.1);
        CHECK(p.G == Approx(0.017001614883970741).epsilon(1e-8));
        CHECK(p.H == Approx(0.00048262369421263186).epsilon(1e-8));
        const GH k = profile_GH(fixtures::king(), 1, 0.1);
        CHECK(k.G == Approx(0.017463451034078457).epsilon(1e-8));
        CHECK(k.H == Approx(0.00049292773625933435).epsilon(1e-8));
        // 10^6-point midpoint rule, l = 1/2 and L0 = 0.3.
        const GH q = profile_GH(fixtures::polytrope(1, 0.5, 0.3), 0.8, 0.3);
        CHECK(q.G == Approx(0.010476893246978449).epsilon(1e-8));
        CHECK(q.H == Approx(0.00027722364186991957).epsilon(1e-8));
    }

    TEST_CASE("G and H vanish outside the support and grow with y") {
        const auto e = fixtures::polytrope(1, 0.5, 0.3);
        CHECK(profile_G(e, 0.5, std::log(std::sqrt(1 + 0.3 / 0.25)) - 1e-3) == 0);
        CHECK(profile_H(e, 0.5, -0.2) == 0);
        for (double r : {0.3, 1.0, 3.0}) {
            double g = 0, h = 0;
            for (double y = 0.0; y < 0.6; y += 0.02) {
                const GH v = profile_GH(e, r, y);
                CHECK(v.G >= g);
                CHECK(v.H >= h);
                CHECK((v.G > 0) == (v.H > 0));
                g = v.G;
                h = v.H;
            }
        }
    }

    TEST_CASE("c_l and d_l") {
        CHECK(beta_c(0) == Approx(2.0).epsilon(1e-14));
        CHECK(beta_d(0) == Approx(2.0 / 3).epsilon(1e-14));
    }
}
