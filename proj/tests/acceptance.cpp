// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evstab/mathur.hpp"
#include "evstab/operators.hpp"
#include "evstab/pipeline.hpp"
#include "test_support.hpp"

using namespace evstab;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;
    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "ok   " : "FAIL ") + what);
    }
};

std::string f(const char* fmt, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

SteadyState shell(double delta) {
    EquationOfState e;
    e.family = Family::polytrope;
    e.k = 1;
    e.l = 0;
    return build_shell(ShellParameters::make(1, 15, 0.98), e, delta);
}

Outcome criterion1() {
    Outcome o;
    const double M = 1;
    double worst = 0;
    bool threshold = true;
    std::vector<double> Ls;
    for (int i = 1; i <= 50; ++i) Ls.push_back(12 + 28.0 * i / 50);
    for (double L : {12.5, 15.9, 15.999, 16.001, 16.1, 30.0}) Ls.push_back(L);
    for (double L : Ls) {
        const auto cr = schwarzschild_critical_radii(M, L);
        const long double disc = std::sqrt((long double)L * L - 12.0L * M * M * L);
        const double s = double(((long double)L - disc) / (2.0L * M));
        const double rL = double(((long double)L + disc) / (2.0L * M));
        worst = std::max({worst, rel(cr.s_L, s), rel(cr.r_L, rL)});
        threshold = threshold && ((schwarzschild_psi(M, L, cr.s_L) > 1) == (L > 16));
    }
    o.check(worst < 1e-10, f("critical radii vs quadratic roots: max rel %.2e (< 1e-10)", worst));
    o.check(threshold, "Psi_L(s_L) > 1 exactly when L > 16 on 56 values incl. 15.999 and 16.001");
    std::size_t ordered = 0;
    const double a1 = 0.7548776662466927, a2 = 0.5698402909980532;
    for (int i = 0; i < 100; ++i) {
        const double L = 12 + 28 * (0.005 + 0.99 * std::fmod(0.5 + a1 * (i + 1), 1.0));
        const auto cr = schwarzschild_critical_radii(M, L);
        const double lo = schwarzschild_psi(M, L, cr.r_L), hi = std::min(1.0, schwarzschild_psi(M, L, cr.s_L));
        const double E = lo + (hi - lo) * (0.005 + 0.99 * std::fmod(0.5 + a2 * (i + 1), 1.0));
        const auto lv = schwarzschild_level_radii(M, L, E);
        if (2 * M < lv.r0 && lv.r0 < cr.s_L && cr.s_L < lv.r_minus && lv.r_minus < cr.r_L && cr.r_L < lv.r_plus &&
            lv.r_minus > 4 * M)
            ++ordered;
    }
    o.check(ordered == 100, f("ordering 2M < r0 < s_L < r_- < r_L < r_+ and r_- > 4M on %.0f/100 samples", ordered));
    return o;
}

Outcome criterion2() {
    Outcome o;
    const auto fig = potential_plot_data(1, 15, 0.98, 18, 0.97);
    std::ostringstream curves, markers;
    write_potential_curves_csv(fig, curves);
    write_potential_markers_csv(fig, markers);
    auto m = [&](const std::string& name) {
        for (const auto& x : fig.markers)
            if (x.name == name) return x;
        throw std::runtime_error("missing marker " + name);
    };
    const std::vector<std::string> black = {"r0_0(E0,L0)", "r0", "r0+eta0", "R0min", "r_L0", "R0max"};
    const std::vector<std::string> grey = {"r0_0(E,L)", "s_L", "r_-(E,L)", "r_L", "r_+(E,L)"};
    auto increasing = [&](const std::vector<std::string>& names) {
        for (std::size_t i = 1; i < names.size(); ++i)
            if (!(m(names[i - 1]).r < m(names[i]).r)) return false;
        return true;
    };
    o.check(increasing(black), "Psi_L0 markers ordered r0_0(E0,L0) < r0 < r0+eta0 < R0min < r_L0 < R0max");
    o.check(increasing(grey), "Psi_18 markers ordered r0_0(E,L) < s_L < r_-(E,L) < r_L < r_+(E,L)");
    o.check(increasing({"s_L", "r0", "R0min", "r_-(E,L)", "r_L0", "r_L", "r_+(E,L)", "R0max"}),
            "cross-curve order s_L < r0 < R0min < r_-(E,L) < r_L0 < r_L < r_+(E,L) < R0max as drawn");
    double lo = 1e9, hi = -1e9;
    for (const auto& n : black) {
        lo = std::min(lo, m(n).psi_L0);
        hi = std::max(hi, m(n).psi_L0);
    }
    o.check(lo >= 0.95 && hi <= 1.03, f("Psi_L0 at the L0 markers within [%.4f, %.4f] inside [0.95, 1.03]", lo, hi));
    const auto ss = shell(1e-3);
    const auto lev = schwarzschild_level_radii(1, 15, 0.98);
    o.check(std::abs(m("R0min").r - lev.r_minus) < 1e-12 && std::abs(ss.R0min - lev.r_minus) < 1e-12,
            "R0min = r_-(E0, L0)");
    o.check(std::abs(m("R0max").r - lev.r_plus) < 1e-12 && std::abs(ss.R0max - lev.r_plus) < 1e-12,
            "R0max = r_+(E0, L0)");
    o.check(std::abs(m("r0").r - schwarzschild_critical_radii(1, 15).s_L) < 1e-12, "r0 = s_L0");
    o.check(m("s_L").psi > 1 && m("r0").psi < 1, f("Psi_18(s_18) = %.5f > 1 > Psi_15(s_15) = %.5f", m("s_L").psi, m("r0").psi));
    std::size_t rows = 0, bad_cols = 0;
    std::istringstream in(curves.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        ++rows;
        if (std::count(line.begin(), line.end(), ',') != 2) ++bad_cols;
    }
    o.check(rows == fig.r.size() && bad_cols == 0, f("curve CSV has %.0f rows with 3 columns each", rows));
    return o;
}

Outcome criterion3() {
    Outcome o;
    EquationOfState poly;
    poly.family = Family::polytrope;
    poly.k = 1;
    poly.l = 0;
    EquationOfState king;
    king.family = Family::king;
    king.l = 0;
    const std::vector<std::pair<std::string, SteadyState>> states = {
        {"polytrope k=1 l=0 y0=0.1", solve_singularity_free(poly, 0.1)},
        {"king l=0 y0=0.1", solve_singularity_free(king, 0.1)},
        {"shell delta=1e-3", shell(1e-3)},
    };
    for (const auto& [name, ss] : states) {
        const auto r = residuals(ss);
        const auto d = diagnostics(ss);
        const double hlr = hlr_identity_residual(ss);
        const double worst = std::max({r.tov, r.field_rho, r.field_p});
        o.check(worst < 1e-6, name + f(": TOV %.1e, field %.1e / %.1e (< 1e-6)", r.tov, r.field_rho, r.field_p));
        o.check(hlr < 1e-6, name + f(": HLR identity %.1e (< 1e-6)", hlr));
        o.check(d.max_2m_over_r < 8.0 / 9.0, name + f(": max 2m/r = %.4f (< 8/9)", d.max_2m_over_r));
    }
    return o;
}

Outcome criterion4() {
    Outcome o;
    const std::vector<double> deltas = {1e-3, 5e-4, 2.5e-4};
    std::vector<double> sup_mu, hs_over_delta;
    for (double d : deltas) {
        const auto ss = shell(d);
        const double a = ss.shell->r0, b = 4 * ss.R0max;
        double sup = 0;
        for (int i = 0; i <= 4000; ++i) {
            const double r = a + (b - a) * i / 4000.0;
            sup = std::max(sup, std::abs(ss.mu(r) - 0.5 * std::log(1 - 2 / r)));
        }
        sup_mu.push_back(sup);
        KernelOptions ko;
        hs_over_delta.push_back(kernel_K(ss, ko).hs_norm / d);
    }
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        const double ratio = sup_mu[i - 1] / sup_mu[i];
        o.check(std::abs(ratio - 2) <= 0.4, f("sup|mu^d - mu^0| ratio %.4f for delta %.2e -> %.2e (2 within 20%%)", ratio,
                                              deltas[i - 1], deltas[i]));
    }
    const auto [mn, mx] = std::minmax_element(hs_over_delta.begin(), hs_over_delta.end());
    o.check(*mx / *mn <= 1.1, f("||K||/delta in [%.4f, %.4f], spread %.3f (<= 10%%)", *mn, *mx, *mx / *mn - 1));
    return o;
}

Outcome criterion5(PipelineReport& keep) {
    Outcome o;
    RunConfig cfg = parse_config_text("mode = shell\nM = 1\nL0 = 15\nE_intermediate = 0.98\ndelta = 1e-3\n");
    keep = run_pipeline(cfg);
    auto status = [&](const std::string& n) {
        for (const auto& s : keep.stages)
            if (s.name == n) return s.status == StageStatus::built;
        return false;
    };
    o.check(status("single_well"), "single-well gate passed");
    o.check(status("period_bounds"), "period-bounds gate passed");
    o.check(keep.stability.has_value(), "stability report produced");
    if (!keep.stability) return o;
    const auto& s = *keep.stability;
    o.check(s.hs_norm < 1, f("||K||_L2 = %.6f < 1", s.hs_norm));
    o.check(s.lambda_1 < 1, f("lambda_1 = %.6f < 1", s.lambda_1));
    o.check(s.verdict == Verdict::linearly_stable, "verdict " + to_string(s.verdict));
    for (const auto& row : s.convergence) {
        if (row.knob == "base") continue;
        o.check(row.rel_change_lambda_1 < 1e-3 && row.rel_change_hs < 1e-3,
                row.knob + f(": relative change lambda_1 %.2e, ||K|| %.2e (< 1e-3)", row.rel_change_lambda_1,
                             row.rel_change_hs));
    }
    return o;
}

Outcome criterion6() {
    Outcome o;
    const auto ss = shell(1e-3);
    const auto samples = sample_orbits(ss, 100);
    double worst = 0;
    for (const auto& s : samples) worst = std::max(worst, rel(s.T, characteristic_period(ss, s.E, s.L)));
    o.check(worst < 1e-4, f("quadrature vs characteristic periods on 100 samples: max rel %.2e (< 1e-4)", worst));
    const auto pb = period_bounds(ss);
    o.check(pb.T_inf > 0 && std::isfinite(pb.T_sup), f("inf T = %.3f > 0, sup T = %.3f finite", pb.T_inf, pb.T_sup));
    return o;
}

Outcome criterion7() {
    Outcome o;
    const auto ss = shell(1e-3);
    PhaseGrid grid(ss);
    double skew = 0, trip = 0, trip_f = 0;
    for (unsigned s = 0; s < 5; ++s) {
        const auto f1 = test_support::random_smooth(grid, 2 * s + 1);
        const auto f2 = test_support::random_smooth(grid, 2 * s + 2);
        const auto t1 = transport_apply(f1), t2 = transport_apply(f2);
        skew = std::max(skew, std::abs(inner_product(t1, f2) + inner_product(f1, t2)) /
                                  (norm(t1) * norm(f2) + norm(f1) * norm(t2)));
        const auto u = transport_inverse(t1);
        trip = std::max(trip, norm(transport_apply(u) - t1) / norm(t1));
        const auto fm = test_support::remove_orbit_mean(f1);
        trip_f = std::max(trip_f, norm(u - fm) / norm(fm));
    }
    o.check(skew < 1e-8, f("T skew-symmetry defect %.2e on 5 random smooth pairs (< 1e-8)", skew));
    o.check(trip < 1e-8 && trip_f < 1e-8, f("T T^-1 g = g: %.2e, T^-1 T f = f - mean: %.2e (< 1e-8)", trip, trip_f));

    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-1, 1);
    GeneratorSpace gs(ss, 4, 4, GeneratorKind::curvilinear);
    double worst_random = 0;
    for (int t = 0; t < 10; ++t) {
        std::vector<double> c(gs.size());
        for (auto& x : c) x = U(rng);
        auto g = [&gs, c](double E, double L) {
            std::vector<double> v(gs.size());
            gs.values(E, L, v.data());
            double s = 0;
            for (std::size_t i = 0; i < v.size(); ++i) s += c[i] * v[i];
            return s;
        };
        worst_random = std::max(worst_random, check_kernelB(lift_to_kernelB(grid, g)));
    }
    o.check(worst_random < 1e-6, f("check_kernelB on 10 random polynomial generators: max %.2e (< 1e-6)", worst_random));

    const auto basis = build_kernel_basis(grid);
    const double worst_basis = *std::max_element(basis.residuals.begin(), basis.residuals.end());
    o.check(worst_basis < 1e-6,
            f("check_kernelB on all %.0f basis elements: max %.2e (< 1e-6)", basis.elements.size(), worst_basis));

    double idem = 0, odd = 0;
    for (unsigned s = 0; s < 5; ++s) {
        const auto fr = test_support::random_smooth(grid, 100 + s);
        const auto p1 = apply_projection(basis, fr);
        idem = std::max(idem, norm(apply_projection(basis, p1) - p1) / norm(p1));
        const auto fo = odd_test_function(grid, s);
        odd = std::max(odd, norm(apply_projection(basis, fo)) / norm(fo));
    }
    o.check(idem < 1e-8, f("projection idempotency %.2e (< 1e-8)", idem));
    o.check(odd < 1e-8, f("odd functions: |Pi f| / |f| = %.2e (< 1e-8)", odd));
    return o;
}

Outcome criterion8(const PipelineReport& rep) {
    Outcome o;
    if (!rep.kernel) {
        o.check(false, "no kernel from the shell pipeline run");
        return o;
    }
    const auto& k = *rep.kernel;
    o.check(k.symmetry_defect < 1e-8, f("max|K - K^T| / max|K| = %.2e (< 1e-8)", k.symmetry_defect));
    const double lmin = k.eigenvalues(k.eigenvalues.size() - 1);
    o.check(lmin >= -1e-8, f("Nystrom lambda_min = %.2e (>= -1e-8)", lmin));
    std::size_t above = 0;
    for (Eigen::Index i = 0; i < k.eigenvalues.size(); ++i) above += k.eigenvalues(i) > 1;
    const double hs2 = k.hs_norm * k.hs_norm;
    o.check(double(above) < hs2, f("#{lambda > 1} = %.0f < ||K||^2 = %.3e", above, hs2));
    const double cross = std::abs(hs2 - k.eigen_hs_norm * k.eigen_hs_norm) / hs2;
    o.check(cross < 1e-4, f("|int K^2 - sum lambda^2| / int K^2 = %.2e (< 1e-4)", cross));

    const auto ss = shell(1e-3);
    std::vector<double> bnd;
    std::string line = "boundary max|K| / max|K| at n =";
    for (std::size_t n : {40, 80, 160, 320}) {
        KernelOptions ko;
        ko.n_nodes = n;
        const auto kk = kernel_K(ss, ko);
        bnd.push_back(kk.boundary_max / kk.max_abs);
        line += f(" %.0f: %.2e", double(n), bnd.back());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < bnd.size(); ++i) decreasing = decreasing && bnd[i] < bnd[i - 1];
    o.check(decreasing, line);
    return o;
}

Outcome criterion9() {
    Outcome o;
    struct Case {
        std::vector<double> lambdas;
        Verdict verdict;
        std::size_t modes;
    };
    const std::vector<Case> cases = {{{0.5}, Verdict::linearly_stable, 0},
                                     {{1.0}, Verdict::zero_frequency_mode, 0},
                                     {{2.0}, Verdict::unstable, 1},
                                     {{2.0, 1.5}, Verdict::unstable, 2}};
    for (const auto& c : cases) {
        const auto k = synthetic_separable_kernel(c.lambdas);
        const auto r = classify(k);
        std::string name = "lambda = {";
        for (std::size_t i = 0; i < c.lambdas.size(); ++i) name += (i ? ", " : "") + f("%.1f", c.lambdas[i]);
        o.check(r.verdict == c.verdict && r.n_modes_above_one == c.modes && std::abs(r.lambda_1 - c.lambdas[0]) < 1e-10,
                name + "}: " + to_string(r.verdict) + f(", modes %.0f, lambda_1 = %.12f", r.n_modes_above_one, r.lambda_1));
    }
    return o;
}

}  // namespace

int main() {
    int failed = 0;
    PipelineReport shell_run;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 Schwarzschild closed forms", criterion1},
        {"2 potential plot data", criterion2},
        {"3 Equilibrium residuals", criterion3},
        {"4 Delta scaling", criterion4},
        {"5 Stability verdict (shell, delta=1e-3)", [&] { return criterion5(shell_run); }},
        {"6 Period-function oracle", criterion6},
        {"7 Operator property suite", criterion7},
        {"8 Kernel invariants", [&] { return criterion8(shell_run); }},
        {"9 Synthetic verdict triad", criterion9},
    };
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::printf("criterion %s: %s (%.1fs)\n", name.c_str(), o.pass ? "PASS" : "FAIL", sec);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
