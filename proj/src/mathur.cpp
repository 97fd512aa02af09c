#include "evstab/mathur.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evstab/parallel.hpp"

namespace evstab {

namespace {
constexpr double pi = std::numbers::pi;
}

double alpha0(const SteadyState& ss, double r) {
    const double s = ss.lambda_prime(r) + ss.mu_prime(r);
    if (!(s > 0)) throw std::out_of_range("alpha0: lambda' + mu' vanishes at r = " + std::to_string(r));
    return std::exp(0.5 * (ss.lambda(r) + ss.mu(r))) / std::sqrt(r * s);
}

double beta0(const SteadyState& ss, double r) {
    return std::exp(1.5 * ss.mu(r) - 0.5 * ss.lambda(r)) * std::sqrt(2 * r * ss.mu_prime(r) + 1) / r;
}

PhaseFunction indicator_profile(const PhaseGrid& grid, double r) {
    const auto& ss = grid.state();
    PhaseFunction out{&grid, std::vector<double>(grid.size(), 0.0), Parity::even, {}};
    const std::size_t n = grid.nth();
    for (std::size_t o = 0; o < grid.n_orbits(); ++o) {
        const double c = grid.abs_phi_prime()[o] * grid.E()[o];
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = o * n + a;
            if (grid.R()[i] <= r) out.v[i] = c * std::exp(-grid.lambda()[i] - grid.mu()[i]);
        }
    }
    const SteadyState* sp = &ss;
    out.eval = [sp, r](double x, double w, double L) {
        if (x > r) return 0.0;
        const double E = std::exp(sp->mu(x)) * std::sqrt(1 + w * w + L / (x * x));
        return std::abs(phi_prime(sp->eos, E, L)) * E * std::exp(-sp->lambda(x) - sp->mu(x));
    };
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct SliceNode {
    double w, L, weight;  // weight of the raw dw dL measure
};

std::vector<SliceNode> slice_nodes(double r, double A, double L0, std::size_t order) {
    std::vector<SliceNode> out;
    if (!(A > 0)) return out;
    const auto& g = gauss_legendre(order);
    const double sqA = std::sqrt(A), r2 = r * r;
    out.reserve(order * order);
    for (std::size_t i = 0; i < order; ++i) {
        const double s = 0.5 * (g.x[i] + 1);
        const double L = L0 + r2 * A * (1 - s * s);
        const double js = 0.5 * g.w[i] * 2 * r2 * A * sqA * s * s;
        for (std::size_t j = 0; j < order; ++j) {
            const double v = 0.5 * (g.x[j] + 1);
            out.push_back({s * sqA * v, L, js * g.w[j]});  // half interval in w, doubled
        }
    }
    return out;
}

}  // namespace

IMatrix I_matrix(const SteadyState& ss, const KernelOptions& opt, const std::vector<double>& r_nodes) {
    if (ss.vacuum) throw std::runtime_error("I_matrix: no matter support");
    const GeneratorSpace gs(ss, opt.n_E, opt.n_L, opt.kind);
    const std::size_t np = gs.size();
    const std::size_t dim = np + (opt.include_profile ? 1 : 0);
    const double a = ss.Rmin, b = ss.Rmax;

    std::vector<double> br{a, b};
    for (double x : r_nodes) br.push_back(x);
    const double h0 = r_nodes.front() - a, h1 = b - r_nodes.back();
    for (std::size_t k = 1; k <= opt.grading; ++k) {
        br.push_back(a + h0 * std::ldexp(1.0, -int(k)));
        br.push_back(b - h1 * std::ldexp(1.0, -int(k)));
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    const PanelGrid pg(br, opt.panel_order);
    const std::size_t ns = pg.size();
    const auto& sig = pg.nodes();

    // Pass 1: B, A_i and p_{g_i} at each radial quadrature node.
    std::vector<double> Bv(ns, 0.0);
    Eigen::MatrixXd Av = Eigen::MatrixXd::Zero(Eigen::Index(ns), Eigen::Index(np));
    Eigen::MatrixXd Pint = Eigen::MatrixXd::Zero(Eigen::Index(ns), Eigen::Index(np));
    parallel_for(ns, [&](std::size_t m) {
        const double s = sig[m];
        const auto nodes = slice_nodes(s, ss.slice_A(s), ss.eos.L0, opt.slice_order);
        const double emu = std::exp(ss.mu(s));
        std::vector<double> P(np);
        double Bs = 0;
        Eigen::VectorXd As = Eigen::VectorXd::Zero(Eigen::Index(np)), ps = Eigen::VectorXd::Zero(Eigen::Index(np));
        for (const auto& nd : nodes) {
            const double E = emu * std::sqrt(1 + nd.w * nd.w + nd.L / (s * s));
            const double ph = std::abs(phi_prime(ss.eos, E, nd.L));
            if (ph == 0) continue;
            gs.values(E, nd.L, P.data());
            Bs += nd.weight * ph * E * E;
            const double ca = nd.weight * ph * E;
            const double cp = nd.weight * nd.w * nd.w * emu / E * ph;
            for (std::size_t i = 0; i < np; ++i) {
                As(Eigen::Index(i)) += ca * P[i];
                ps(Eigen::Index(i)) += cp * P[i];
            }
        }
        Bv[m] = Bs;
        Av.row(Eigen::Index(m)) = As.transpose();
        // e^{3 lambda + mu} p_g s with p_g = (pi / s^2) * raw integral
        Pint.row(Eigen::Index(m)) = (std::exp(3 * ss.lambda(s) + ss.mu(s)) * pi / s) * ps.transpose();
    });

    // Q_i = 4 pi int_s^Rmax e^{3 lambda + mu} p_{g_i} s ds; the profile element has Q = 1, no generator part.
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(Eigen::Index(ns), Eigen::Index(dim));
    for (std::size_t i = 0; i < np; ++i) {
        std::vector<double> col(ns);
        for (std::size_t m = 0; m < ns; ++m) col[m] = Pint(Eigen::Index(m), Eigen::Index(i));
        const auto cum = pg.cumulative_from_right(col);
        for (std::size_t m = 0; m < ns; ++m) Q(Eigen::Index(m), Eigen::Index(i)) = 4 * pi * cum[m];
    }
    if (opt.include_profile) Q.col(Eigen::Index(np)).setOnes();

    // Pass 2: Gram matrix, b-integrands and the direct term. The block count is fixed so the
    // summation order does not depend on the thread count.
    const std::size_t nblk = std::max<std::size_t>(1, std::min<std::size_t>(32, ns));
    std::vector<Eigen::MatrixXd> Gpart(nblk, Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(dim)));
    parallel_for(nblk, [&](std::size_t blk) {
        const std::size_t lo = blk * ns / nblk, hi = (blk + 1) * ns / nblk;
        std::vector<double> P(np);
        for (std::size_t m = lo; m < hi; ++m) {
            const double s = sig[m];
            const auto nodes = slice_nodes(s, ss.slice_A(s), ss.eos.L0, opt.slice_order);
            if (nodes.empty()) continue;
            const double emu = std::exp(ss.mu(s)), lam = ss.lambda(s);
            const double decay = std::exp(-lam - ss.mu(s));
            Eigen::MatrixXd V(Eigen::Index(nodes.size()), Eigen::Index(dim));
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const auto& nd = nodes[q];
                const double E = emu * std::sqrt(1 + nd.w * nd.w + nd.L / (s * s));
                const double ph = std::abs(phi_prime(ss.eos, E, nd.L));
                if (ph == 0) {
                    V.row(Eigen::Index(q)).setZero();
                    continue;
                }
                gs.values(E, nd.L, P.data());
                const double sw = std::sqrt(4 * pi * pi * pg.weights()[m] * std::exp(lam) * nd.weight * ph);
                for (std::size_t i = 0; i < dim; ++i) {
                    const double pi_ = i < np ? P[i] : 0.0;
                    V(Eigen::Index(q), Eigen::Index(i)) = sw * (pi_ + E * decay * Q(Eigen::Index(m), Eigen::Index(i)));
                }
            }
            Gpart[blk].selfadjointView<Eigen::Lower>().rankUpdate(V.transpose());
        }
    });
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (auto& Gp : Gpart) G += Gp.selfadjointView<Eigen::Lower>().toDenseMatrix();

    std::vector<double> dint(ns);
    std::vector<std::vector<double>> bint(dim, std::vector<double>(ns));
    for (std::size_t m = 0; m < ns; ++m) {
        const double s = sig[m];
        const double emu_inv = std::exp(-ss.mu(s)), decay = std::exp(-ss.lambda(s) - ss.mu(s));
        dint[m] = 4 * pi * pi * emu_inv * decay * Bv[m];
        for (std::size_t i = 0; i < dim; ++i) {
            const double Ai = i < np ? Av(Eigen::Index(m), Eigen::Index(i)) : 0.0;
            bint[i][m] = 4 * pi * pi * emu_inv * (Ai + decay * Q(Eigen::Index(m), Eigen::Index(i)) * Bv[m]);
        }
    }
    // Break index of each Nystrom node.
    std::vector<std::size_t> at(r_nodes.size());
    for (std::size_t j = 0; j < r_nodes.size(); ++j)
        at[j] = std::size_t(std::lower_bound(br.begin(), br.end(), r_nodes[j]) - br.begin());
    const auto Dc = pg.cumulative_at_breaks(dint);
    const std::size_t nr = r_nodes.size();
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(nr));
    for (std::size_t i = 0; i < dim; ++i) {
        const auto c = pg.cumulative_at_breaks(bint[i]);
        for (std::size_t j = 0; j < nr; ++j) bmat(Eigen::Index(i), Eigen::Index(j)) = c[at[j]];
    }

    auto pc = pivoted_cholesky(G, opt.drop_tol);
    IMatrix out;
    out.r = r_nodes;
    out.basis_dim = dim;
    out.kept = pc.kept.size();
    out.dropped = pc.dropped;
    const Eigen::Index kk = Eigen::Index(pc.kept.size());
    Eigen::MatrixXd bk(kk, Eigen::Index(nr));
    for (Eigen::Index i = 0; i < kk; ++i) bk.row(i) = bmat.row(Eigen::Index(pc.kept[std::size_t(i)]));
    if (kk > 0) {
        Eigen::MatrixXd Gk(kk, kk);
        for (Eigen::Index i = 0; i < kk; ++i)
            for (Eigen::Index j = 0; j < kk; ++j) Gk(i, j) = G(Eigen::Index(pc.kept[std::size_t(i)]), Eigen::Index(pc.kept[std::size_t(j)]));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gk, Eigen::EigenvaluesOnly);
        out.gram_condition = es.eigenvalues()(kk - 1) / es.eigenvalues()(0);
    }
    const Eigen::MatrixXd Z = kk > 0 ? Eigen::MatrixXd(pc.L.triangularView<Eigen::Lower>().solve(bk))
                                     : Eigen::MatrixXd::Zero(1, Eigen::Index(nr));
    const Eigen::MatrixXd ZtZ = Z.transpose() * Z;
    out.I.resize(Eigen::Index(nr), Eigen::Index(nr));
    out.direct.resize(Eigen::Index(nr));
    for (std::size_t j = 0; j < nr; ++j) out.direct(Eigen::Index(j)) = Dc[at[j]];
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nr; ++j) {
            const double d = Dc[at[std::min(i, j)]];
            out.I(Eigen::Index(i), Eigen::Index(j)) = d - ZtZ(Eigen::Index(i), Eigen::Index(j));
        }
    out.I = 0.5 * (out.I + out.I.transpose()).eval();
    double excess = 0;
    for (Eigen::Index i = 0; i < out.I.rows(); ++i)
        for (Eigen::Index j = 0; j < out.I.cols(); ++j) {
            const double bound = std::sqrt(std::max(0.0, out.I(i, i)) * std::max(0.0, out.I(j, j)));
            excess = std::max(excess, std::abs(out.I(i, j)) - bound);
        }
    out.cauchy_schwarz_excess = std::max(0.0, excess);
    return out;
}

std::vector<double> kernel_prefactor(const SteadyState& ss, const std::vector<double>& r) {
    std::vector<double> c(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double x = r[i];
        c[i] = std::exp(0.5 * ss.mu(x) + 1.5 * ss.lambda(x)) * std::sqrt(2 * x * ss.mu_prime(x) + 1) / x;
    }
    return c;
}

MathurKernel finalize_kernel(std::vector<double> r, std::vector<double> w, Eigen::MatrixXd K) {
    MathurKernel mk;
    mk.r = std::move(r);
    mk.w = std::move(w);
    mk.K = std::move(K);
    const Eigen::Index n = mk.K.rows();
    mk.max_abs = mk.K.cwiseAbs().maxCoeff();
    mk.symmetry_defect = mk.max_abs > 0 ? (mk.K - mk.K.transpose()).cwiseAbs().maxCoeff() / mk.max_abs : 0.0;
    mk.boundary_max = std::max(mk.K.row(0).cwiseAbs().maxCoeff(), mk.K.row(n - 1).cwiseAbs().maxCoeff());
    mk.hs_norm = hs_norm(mk);
    mk.eigenvalues = eigensolve(mk);
    mk.eigen_hs_norm = std::sqrt(mk.eigenvalues.squaredNorm());
    return mk;
}

MathurKernel kernel_K(const SteadyState& ss, const KernelOptions& opt) {
    if (ss.vacuum) throw std::runtime_error("kernel_K: no matter support, kernel undefined");
    const auto rule = gauss_legendre(opt.n_nodes, ss.Rmin, ss.Rmax);
    const auto im = I_matrix(ss, opt, rule.x);
    const auto c = kernel_prefactor(ss, rule.x);
    const Eigen::Map<const Eigen::VectorXd> cv(c.data(), Eigen::Index(c.size()));
    Eigen::MatrixXd K = cv.asDiagonal() * im.I * cv.asDiagonal();
    auto mk = finalize_kernel(rule.x, rule.w, std::move(K));
    mk.basis_dim = im.basis_dim;
    mk.kept = im.kept;
    mk.dropped = im.dropped;
    mk.gram_condition = im.gram_condition;
    return mk;
}

double hs_norm(const MathurKernel& k) {
    double s = 0;
    for (std::size_t i = 0; i < k.r.size(); ++i)
        for (std::size_t j = 0; j < k.r.size(); ++j) {
            const double v = k.K(Eigen::Index(i), Eigen::Index(j));
            s += k.w[i] * k.w[j] * v * v;
        }
    return std::sqrt(s);
}

Eigen::VectorXd eigensolve(const MathurKernel& k) {
    const Eigen::Index n = Eigen::Index(k.r.size());
    Eigen::VectorXd sw(n);
    for (Eigen::Index i = 0; i < n; ++i) sw(i) = std::sqrt(k.w[std::size_t(i)]);
    Eigen::MatrixXd S = sw.asDiagonal() * k.K * sw.asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

MathurKernel synthetic_separable_kernel(const std::vector<double>& lambdas, double a, double b, std::size_t n_nodes) {
    if (lambdas.size() > n_nodes) throw std::invalid_argument("synthetic_separable_kernel: too many modes");
    const auto rule = gauss_legendre(n_nodes, a, b);
    const std::size_t m = lambdas.size();
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(Eigen::Index(n_nodes), Eigen::Index(m));
    std::vector<double> P(m);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double x = 2 * (rule.x[i] - a) / (b - a) - 1;
        legendre_values(x, m, P.data());
        for (std::size_t j = 0; j < m; ++j)
            U(Eigen::Index(i), Eigen::Index(j)) = P[j] * std::sqrt((2.0 * double(j) + 1) / (b - a));
    }
    const Eigen::Map<const Eigen::VectorXd> lv(lambdas.data(), Eigen::Index(m));
    Eigen::MatrixXd K = U * lv.asDiagonal() * U.transpose();
    return finalize_kernel(rule.x, rule.w, std::move(K));
}

// ---------------------------------------------------------------------------

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::linearly_stable: return "linearly_stable";
        case Verdict::zero_frequency_mode: return "zero_frequency_mode";
        case Verdict::unstable: return "unstable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

StabilityReport classify(const MathurKernel& k, double tol) {
    StabilityReport rep;
    rep.tol = tol;
    rep.lambda_1 = k.eigenvalues.size() ? k.eigenvalues(0) : 0.0;
    rep.hs_norm = k.hs_norm;
    for (Eigen::Index i = 0; i < k.eigenvalues.size(); ++i)
        if (k.eigenvalues(i) > 1 + tol) ++rep.n_modes_above_one;
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(8, k.eigenvalues.size()); ++i)
        rep.leading_eigenvalues.push_back(k.eigenvalues(i));
    rep.mode_bound_holds = double(rep.n_modes_above_one) < rep.hs_norm * rep.hs_norm;
    rep.lambda_min = k.eigenvalues.size() ? k.eigenvalues(k.eigenvalues.size() - 1) : 0.0;
    rep.eigen_hs_norm = k.eigen_hs_norm;
    rep.symmetry_defect = k.symmetry_defect;
    rep.boundary_max = k.boundary_max;
    rep.max_abs = k.max_abs;
    rep.n_nodes = k.r.size();
    rep.basis_dim = k.basis_dim;
    rep.kept = k.kept;
    rep.dropped = k.dropped;
    rep.gram_condition = k.gram_condition;
    if (rep.lambda_1 < 1 - tol)
        rep.verdict = Verdict::linearly_stable;
    else if (std::abs(rep.lambda_1 - 1) <= tol)
        rep.verdict = Verdict::zero_frequency_mode;
    else
        rep.verdict = Verdict::unstable;
    return rep;
}

StabilityReport stability_report(const SteadyState& ss, const StabilityOptions& opt, MathurKernel* base_kernel) {
    using clock = std::chrono::steady_clock;
    auto run = [&](const std::string& knob, const KernelOptions& ko, ConvergenceRow& row) {
        const auto t0 = clock::now();
        auto k = kernel_K(ss, ko);
        row.knob = knob;
        row.n_nodes = ko.n_nodes;
        row.n_E = ko.n_E;
        row.n_L = ko.n_L;
        row.slice_order = ko.slice_order;
        row.lambda_1 = k.eigenvalues.size() ? k.eigenvalues(0) : 0.0;
        row.hs_norm = k.hs_norm;
        row.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        return k;
    };
    ConvergenceRow base;
    const auto k0 = run("base", opt.kernel, base);
    auto rep = classify(k0, opt.tol);
    rep.convergence.push_back(base);
    if (base_kernel) *base_kernel = k0;
    if (!opt.refine) return rep;
    auto rel = [](double a, double b) { return b != 0 ? std::abs(a - b) / std::abs(b) : std::abs(a - b); };
    auto refine = [&](const std::string& knob, KernelOptions ko) {
        ConvergenceRow row;
        run(knob, ko, row);
        row.rel_change_lambda_1 = rel(row.lambda_1, base.lambda_1);
        row.rel_change_hs = rel(row.hs_norm, base.hs_norm);
        rep.max_rel_change = std::max({rep.max_rel_change, row.rel_change_lambda_1, row.rel_change_hs});
        if (std::abs(row.lambda_1 - base.lambda_1) > opt.tol) rep.converged = false;
        rep.convergence.push_back(row);
    };
    KernelOptions k1 = opt.kernel;
    k1.n_nodes *= 2;
    refine("radial_nodes", k1);
    KernelOptions k2 = opt.kernel;
    k2.n_E *= 2;
    k2.n_L *= 2;
    refine("basis_degree", k2);
    KernelOptions k3 = opt.kernel;
    k3.slice_order *= 2;
    refine("phase_quadrature", k3);
    if (!rep.converged) rep.verdict = Verdict::inconclusive;
    return rep;
}

}  // namespace evstab
