#include <doctest.h>

#include <cmath>

#include "evstab/operators.hpp"
#include "fixtures.hpp"
#include "test_support.hpp"

using namespace evstab;
using doctest::Approx;

TEST_SUITE("operators") {
    TEST_CASE("transport is skew and flips parity") {
        const auto& g = fixtures::shell_grid();
        const auto f = test_support::random_smooth(g, 11), h = test_support::random_smooth(g, 12);
        const auto Tf = transport_apply(f), Th = transport_apply(h);
        const double scale = norm(Tf) * norm(h) + norm(f) * norm(Th);
        CHECK(std::abs(inner_product(Tf, h) + inner_product(f, Th)) / scale < 1e-8);
        const auto [e, o] = parity_split(f);
        CHECK(transport_apply(e).parity == Parity::odd);
    }

    TEST_CASE("transport inverse") {
        const auto& g = fixtures::shell_grid();
        const auto f = test_support::remove_orbit_mean(test_support::random_smooth(g, 5));
        const auto back = transport_apply(transport_inverse(f));
        CHECK(norm(back - f) / norm(f) < 1e-8);
        const auto c = sample_EL(g, [](double, double) { return 1.0; });
        CHECK_THROWS_AS(transport_inverse(c), NotInImage);
    }

    TEST_CASE("pivoted Cholesky drops dependent columns") {
        Eigen::MatrixXd V(4, 3);
        V << 1, 0, 1, 0, 1, 1, 1, 1, 2, 0, 2, 2;  // third column = first + second
        const Eigen::MatrixXd G = V.transpose() * V;
        const auto pc = pivoted_cholesky(G, 1e-12);
        CHECK(pc.kept.size() == 2);
        CHECK(pc.dropped == 1);
        Eigen::MatrixXd sub(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) sub(i, j) = G(pc.kept[i], pc.kept[j]);
        CHECK((pc.L * pc.L.transpose() - sub).norm() < 1e-12 * G.norm());
    }

    TEST_CASE("lifted generators lie in the kernel of B") {
        const auto& g = fixtures::shell_grid();
        const auto& eos = g.state().eos;
        const auto k = lift_to_kernelB(g, [&](double E, double L) { return std::abs(phi_prime(eos, E, L)) * E * E; });
        CHECK(check_kernelB(k) < 1e-4);
        CHECK(check_kernelB(profile_element(g)) < 1e-4);
    }

    TEST_CASE("projection onto the kernel is idempotent and kills odd functions") {
        const auto& g = fixtures::shell_grid();
        KernelBasisOptions bo;
        bo.n_E = bo.n_L = 3;
        const auto basis = build_kernel_basis(g, bo, false);
        CHECK(basis.kept.size() + basis.dropped == basis.elements.size());
        CHECK(basis.condition >= 1);
        const auto f = test_support::random_smooth(g, 21);
        const auto [e, o] = parity_split(f);
        const auto p = apply_projection(basis, e);
        CHECK(norm(apply_projection(basis, p) - p) / norm(p) < 1e-8);
        CHECK(norm(apply_projection(basis, o)) / norm(o) < 1e-8);
        for (const auto& k : basis.elements) CHECK(norm(apply_projection(basis, k) - k) / norm(k) < 1e-8);
    }

    TEST_CASE("generator space") {
        const GeneratorSpace gs(fixtures::shell(), 3, 2, GeneratorKind::curvilinear);
        CHECK(gs.size() == 6);
        std::vector<double> v(6);
        const double L = 16, E = 0.975;
        gs.values(E, L, v.data());
        for (std::size_t i = 0; i < 6; ++i) CHECK(v[i] == Approx(gs.value(i, E, L)));
        CHECK(generator_kind_from_string(to_string(GeneratorKind::box)) == GeneratorKind::box);
        CHECK_THROWS(generator_kind_from_string("hermite"));
    }

    TEST_CASE("B is skew on odd test functions") {
        const auto& g = fixtures::shell_grid();
        const auto f = odd_test_function(g, 1), h = odd_test_function(g, 2);
        CHECK(f.parity == Parity::odd);
        CHECK(B_skew_defect(f, h) < 1e-6);
    }
}
