#include <doctest.h>

#include <cmath>

#include "evstab/mathur.hpp"
#include "fixtures.hpp"

using namespace evstab;
using doctest::Approx;

TEST_SUITE("mathur") {
    TEST_CASE("synthetic separable kernels recover their spectrum") {
        const auto k = synthetic_separable_kernel({0.9, 0.5, 0.1}, 1, 3);
        REQUIRE(k.eigenvalues.size() >= 3);
        CHECK(k.eigenvalues[0] == Approx(0.9).epsilon(1e-10));
        CHECK(k.eigenvalues[1] == Approx(0.5).epsilon(1e-10));
        CHECK(k.eigenvalues[2] == Approx(0.1).epsilon(1e-10));
        CHECK(k.hs_norm == Approx(std::sqrt(0.81 + 0.25 + 0.01)).epsilon(1e-10));
        CHECK(k.symmetry_defect < 1e-12);
    }

    TEST_CASE("three-way classification") {
        struct Case {
            std::vector<double> l;
            Verdict v;
            std::size_t above;
        };
        const Case cases[] = {
            {{0.5, 0.2}, Verdict::linearly_stable, 0},
            {{1.0, 0.2}, Verdict::zero_frequency_mode, 0},
            {{1.0005, 0.2}, Verdict::zero_frequency_mode, 0},
            {{1.002, 0.2}, Verdict::unstable, 1},
            {{2.0, 1.5, 0.3}, Verdict::unstable, 2},
        };
        for (const auto& c : cases) {
            const auto rep = classify(synthetic_separable_kernel(c.l), 1e-3);
            CHECK(rep.verdict == c.v);
            CHECK(rep.n_modes_above_one == c.above);
            CHECK(rep.lambda_1 == Approx(c.l[0]).epsilon(1e-10));
            CHECK(rep.mode_bound_holds);
        }
    }

    TEST_CASE("verdict names") {
        CHECK(to_string(Verdict::linearly_stable) == "linearly_stable");
        CHECK(to_string(Verdict::inconclusive) == "inconclusive");
    }

    TEST_CASE("I matrix: radial route against the phase-grid route") {
        const auto& ss = fixtures::shell();
        const double a = ss.Rmin, b = ss.Rmax;
        const std::vector<double> r = {a + 0.25 * (b - a), a + 0.5 * (b - a)};
        KernelOptions ko;
        ko.n_E = ko.n_L = 3;
        const auto I = I_matrix(ss, ko, r);
        CHECK(I.cauchy_schwarz_excess == Approx(0).scale(I.direct.maxCoeff() * 1e-10));

        const PhaseGrid g(ss, {.n_L = 24, .n_E = 48, .n_theta = 256});
        KernelBasisOptions bo;
        bo.n_E = bo.n_L = 3;
        const auto basis = build_kernel_basis(g, bo, false);
        std::vector<PhaseFunction> f, q;
        for (double ri : r) {
            f.push_back(indicator_profile(g, ri));
            q.push_back(f.back() - apply_projection(basis, f.back()));
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(inner_product(f[i], f[i]) == Approx(I.direct[i]).epsilon(2e-3));
            for (std::size_t j = 0; j < r.size(); ++j)
                CHECK(inner_product(q[i], q[j]) == Approx(I.I(i, j)).epsilon(2e-3));
        }
    }

    TEST_CASE("shell kernel: symmetric, positive, decays at the support ends") {
        KernelOptions ko;
        ko.n_nodes = 40;
        ko.n_E = ko.n_L = 4;
        const auto k = kernel_K(fixtures::shell(), ko);
        CHECK(k.symmetry_defect < 1e-8);
        CHECK(k.eigenvalues[k.eigenvalues.size() - 1] > -1e-8 * k.eigenvalues[0]);
        CHECK(k.boundary_max < 1e-3 * k.max_abs);
        CHECK(k.eigen_hs_norm == Approx(k.hs_norm).epsilon(1e-4));
        const auto rep = classify(k);
        CHECK(rep.verdict == Verdict::linearly_stable);
        CHECK(rep.lambda_1 < 0.05);
    }
}
