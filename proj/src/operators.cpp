#include "evstab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "evstab/parallel.hpp"
#include "evstab/slice.hpp"

namespace evstab {

namespace {
constexpr double pi = std::numbers::pi;

Parity flipped(Parity p) {
    if (p == Parity::even) return Parity::odd;
    if (p == Parity::odd) return Parity::even;
    return Parity::none;
}

double max_abs_W(const PhaseGrid& g) {
    double m = 0;
    for (double w : g.W()) m = std::max(m, std::abs(w));
    return m > 0 ? m : 1.0;
}

double energy(const SteadyState& ss, double r, double w, double L) {
    return std::exp(ss.mu(r)) * std::sqrt(1 + w * w + L / (r * r));
}

struct RadialTable {
    PanelGrid pg;
    std::vector<double> v;
    double operator()(double r) const {
        if (r <= pg.a() || r >= pg.b()) return 0.0;
        return pg.interpolate(v, r);
    }
};

// Removing the mean before spectral differentiation keeps roundoff relative to the oscillating part.
double orbit_mean(const double* row, std::size_t n) {
    double s = 0;
    for (std::size_t a = 0; a < n; ++a) s += row[a];
    return s / double(n);
}

std::vector<double> column(const std::vector<Moments>& m, double Moments::*field) {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i].*field;
    return out;
}
}  // namespace

// ---------------------------------------------------------------------------

PhaseFunction transport_apply(const PhaseFunction& f) {
    const auto& g = *f.grid;
    const std::size_t n = g.nth();
    const auto D = periodic_diff_matrix(n);
    PhaseFunction out{f.grid, std::vector<double>(f.v.size()), flipped(f.parity), {}};
    parallel_for(g.n_orbits(), [&](std::size_t o) {
        const double* row = f.v.data() + o * n;
        double* dst = out.v.data() + o * n;
        const double s = -1.0 / g.T()[o];
        const double mean = orbit_mean(row, n);
        for (std::size_t a = 0; a < n; ++a) {
            double acc = 0;
            for (std::size_t b = 0; b < n; ++b) acc += D[a * n + b] * (row[b] - mean);
            dst[a] = s * acc;
        }
    });
    if (f.eval) out.eval = transport_evaluator(g.state(), f.eval, max_abs_W(g));
    return out;
}

PhaseFunction transport_inverse(const PhaseFunction& f, double tol) {
    const auto& g = *f.grid;
    const std::size_t n = g.nth();
    double fmax = 0;
    for (double x : f.v) fmax = std::max(fmax, std::abs(x));
    for (std::size_t o = 0; o < g.n_orbits(); ++o) {
        double mean = 0;
        for (std::size_t a = 0; a < n; ++a) mean += f.v[o * n + a];
        mean /= double(n);
        if (std::abs(mean) > tol * fmax)
            throw NotInImage("transport_inverse: orbit " + std::to_string(o) + " has theta-mean " +
                             std::to_string(mean) + "; input is not in the range of T");
    }
    const auto A = periodic_antideriv_matrix(n);
    PhaseFunction out{f.grid, std::vector<double>(f.v.size()), flipped(f.parity), {}};
    parallel_for(g.n_orbits(), [&](std::size_t o) {
        const double* row = f.v.data() + o * n;
        double* dst = out.v.data() + o * n;
        const double s = -g.T()[o];
        for (std::size_t a = 0; a < n; ++a) {
            double acc = 0;
            for (std::size_t b = 0; b < n; ++b) acc += A[a * n + b] * row[b];
            dst[a] = s * acc;
        }
    });
    return out;
}

Evaluator transport_evaluator(const SteadyState& ss, Evaluator f, double w_scale) {
    const double hr = 1e-3 * (ss.Rmax - ss.Rmin);
    const double hw = 1e-3 * w_scale;
    const SteadyState* s = &ss;
    return [s, f, hr, hw](double r, double w, double L) {
        const double fr = (-f(r + 2 * hr, w, L) + 8 * f(r + hr, w, L) - 8 * f(r - hr, w, L) + f(r - 2 * hr, w, L)) /
                          (12 * hr);
        const double fw = (-f(r, w + 2 * hw, L) + 8 * f(r, w + hw, L) - 8 * f(r, w - hw, L) + f(r, w - 2 * hw, L)) /
                          (12 * hw);
        const double eps = std::sqrt(1 + w * w + L / (r * r));
        const double mp = s->mu_prime(r);
        return -std::exp(s->mu(r) - s->lambda(r)) * ((w / eps) * fr + (L / (r * r * r * eps) - mp * eps) * fw);
    };
}

// ---------------------------------------------------------------------------

std::string to_string(GeneratorKind k) { return k == GeneratorKind::box ? "box" : "curvilinear"; }

GeneratorKind generator_kind_from_string(const std::string& s) {
    if (s == "box") return GeneratorKind::box;
    if (s == "curvilinear") return GeneratorKind::curvilinear;
    throw std::invalid_argument("unknown generator kind '" + s + "' (expected box|curvilinear)");
}

GeneratorSpace::GeneratorSpace(const SteadyState& ss, std::size_t n_E, std::size_t n_L, GeneratorKind kind)
    : ss_(&ss), nE_(n_E), nL_(n_L), kind_(kind), emin_(ss) {
    if (n_E == 0 || n_L == 0) throw std::invalid_argument("GeneratorSpace: degrees must be positive");
    Llo_ = emin_.L_lo();
    Lhi_ = emin_.L_hi();
    E0_ = ss.E0();
    Elo_ = E0_;
    for (std::size_t i = 0; i <= 256; ++i) Elo_ = std::min(Elo_, emin_(Llo_ + (Lhi_ - Llo_) * double(i) / 256.0));
}

void GeneratorSpace::values(double E, double L, double* out) const {
    const double x = 2 * (L - Llo_) / (Lhi_ - Llo_) - 1;
    double e;
    if (kind_ == GeneratorKind::box) {
        e = 2 * (E - Elo_) / (E0_ - Elo_) - 1;
    } else {
        const double em = emin_(L);
        e = 2 * (E - em) / (E0_ - em) - 1;
    }
    double px[64], pe[64];
    if (nE_ > 64 || nL_ > 64) throw std::invalid_argument("GeneratorSpace: degree above 64");
    legendre_values(std::clamp(x, -1.0, 1.0), nL_, px);
    legendre_values(std::clamp(e, -1.0, 1.0), nE_, pe);
    for (std::size_t a = 0; a < nL_; ++a)
        for (std::size_t b = 0; b < nE_; ++b) out[a * nE_ + b] = px[a] * pe[b];
}

double GeneratorSpace::value(std::size_t i, double E, double L) const {
    std::vector<double> v(size());
    values(E, L, v.data());
    return v[i];
}

// ---------------------------------------------------------------------------

PhaseFunction lift_to_kernelB(const PhaseGrid& grid, const std::function<double(double, double)>& g,
                              RadialOptions ro) {
    const auto& ss = grid.state();
    auto pg = support_panels(ss, ro.panels, ro.order);
    const SteadyState* sp = &ss;
    Evaluator ge = [sp, g](double r, double w, double L) { return g(energy(*sp, r, w, L), L); };
    std::vector<double> integrand(pg.size());
    parallel_for(pg.size(), [&](std::size_t i) {
        const double s = pg.nodes()[i];
        const double p = slice_moments(ss, ge, s, grid.options().slice_order, Parity::even).p;
        integrand[i] = std::exp(3 * ss.lambda(s) + ss.mu(s)) * p * s;
    });
    auto P = std::make_shared<RadialTable>(RadialTable{pg, pg.cumulative_from_right(integrand)});
    PhaseFunction out{&grid, std::vector<double>(grid.size()), Parity::even, {}};
    const std::size_t n = grid.nth();
    for (std::size_t o = 0; o < grid.n_orbits(); ++o) {
        const double E = grid.E()[o], L = grid.L()[o];
        const double gv = g(E, L);
        const double c = 4 * pi * grid.abs_phi_prime()[o] * E;
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = o * n + a;
            out.v[i] = gv + c * std::exp(-grid.lambda()[i] - grid.mu()[i]) * (*P)(grid.R()[i]);
        }
    }
    out.eval = [sp, g, P](double r, double w, double L) {
        const double E = energy(*sp, r, w, L);
        const double gv = g(E, L);
        const double ph = std::abs(phi_prime(sp->eos, E, L));
        if (ph == 0) return gv;
        return gv + 4 * pi * ph * E * std::exp(-sp->lambda(r) - sp->mu(r)) * (*P)(r);
    };
    return out;
}

PhaseFunction profile_element(const PhaseGrid& grid) {
    const auto& ss = grid.state();
    PhaseFunction out{&grid, std::vector<double>(grid.size()), Parity::even, {}};
    const std::size_t n = grid.nth();
    for (std::size_t o = 0; o < grid.n_orbits(); ++o) {
        const double c = grid.abs_phi_prime()[o] * grid.E()[o];
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = o * n + a;
            out.v[i] = c * std::exp(-grid.lambda()[i] - grid.mu()[i]);
        }
    }
    const SteadyState* sp = &ss;
    out.eval = [sp](double r, double w, double L) {
        const double E = energy(*sp, r, w, L);
        return std::abs(phi_prime(sp->eos, E, L)) * E * std::exp(-sp->lambda(r) - sp->mu(r));
    };
    return out;
}

double check_kernelB(const PhaseFunction& k, RadialOptions ro) {
    const auto& g = *k.grid;
    const auto& ss = g.state();
    auto pg = support_panels(ss, ro.panels, ro.order);
    const RadialTable pk{pg, column(source_terms(k, pg.nodes()), &Moments::p)};
    const auto D = periodic_diff_matrix(g.nth());
    const std::size_t n = g.nth();
    std::vector<double> num(g.n_orbits(), 0.0), den(g.n_orbits(), 0.0);
    parallel_for(g.n_orbits(), [&](std::size_t o) {
        const double invT = 1.0 / g.T()[o];
        const double ph = g.abs_phi_prime()[o];
        const double mean = orbit_mean(k.v.data() + o * n, n);
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = o * n + a;
            double d = 0;
            for (std::size_t b = 0; b < n; ++b) d += D[a * n + b] * (k.v[o * n + b] - mean);
            d *= invT;
            const double R = g.R()[i];
            const double c = 4 * pi * R * ph * std::exp(2 * g.mu()[i] + g.lambda()[i]) * g.W()[i] * pk(R);
            num[o] = std::max(num[o], std::abs(d + c));
            den[o] = std::max(den[o], std::abs(d));
        }
    });
    const double nmax = *std::max_element(num.begin(), num.end());
    const double dmax = *std::max_element(den.begin(), den.end());
    return dmax > 0 ? nmax / dmax : nmax;
}

// ---------------------------------------------------------------------------

PivotedCholesky pivoted_cholesky(const Eigen::MatrixXd& G, double drop_tol) {
    const Eigen::Index n = G.rows();
    PivotedCholesky out;
    if (n == 0) return out;
    const double thresh = drop_tol * G.trace() / double(n);
    Eigen::VectorXd d = G.diagonal();
    std::vector<bool> used(n, false);
    Eigen::MatrixXd Lfull = Eigen::MatrixXd::Zero(n, n);  // column j = j-th pivot step, rows = original index
    for (Eigen::Index step = 0; step < n; ++step) {
        Eigen::Index piv = -1;
        double best = thresh;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!used[i] && d(i) > best) {
                best = d(i);
                piv = i;
            }
        if (piv < 0) break;
        used[piv] = true;
        out.kept.push_back(std::size_t(piv));
        const double lpp = std::sqrt(d(piv));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (used[i] && i != piv) continue;
            double s = G(i, piv);
            for (Eigen::Index k = 0; k < step; ++k) s -= Lfull(i, k) * Lfull(piv, k);
            Lfull(i, step) = (i == piv) ? lpp : s / lpp;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (!used[i]) d(i) -= Lfull(i, step) * Lfull(i, step);
    }
    const std::size_t r = out.kept.size();
    out.dropped = std::size_t(n) - r;
    out.L = Eigen::MatrixXd::Zero(Eigen::Index(r), Eigen::Index(r));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j <= i; ++j) out.L(Eigen::Index(i), Eigen::Index(j)) = Lfull(Eigen::Index(out.kept[i]), Eigen::Index(j));
    return out;
}

KernelBasis build_kernel_basis(const PhaseGrid& grid, KernelBasisOptions opt, bool compute_residuals) {
    KernelBasis kb;
    kb.options = opt;
    const auto& ss = grid.state();
    auto gs = std::make_shared<const GeneratorSpace>(ss, opt.n_E, opt.n_L, opt.kind);
    kb.generators = *gs;
    const SteadyState* sp = &ss;
    for (std::size_t i = 0; i < gs->size(); ++i) {
        auto gen = [gs, sp, i](double E, double L) {
            const double ph = std::abs(phi_prime(sp->eos, E, L));
            return ph == 0 ? 0.0 : ph * gs->value(i, E, L);
        };
        kb.elements.push_back(lift_to_kernelB(grid, gen, opt.radial));
    }
    if (opt.include_profile) kb.elements.push_back(profile_element(grid));

    const std::size_t m = kb.elements.size(), n = grid.size();
    Eigen::MatrixXd K(n, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) K(Eigen::Index(i), Eigen::Index(j)) = kb.elements[j].v[i];
    const Eigen::Map<const Eigen::VectorXd> hw(grid.h_weight().data(), Eigen::Index(n));
    kb.gram = K.transpose() * hw.asDiagonal() * K;
    kb.gram = 0.5 * (kb.gram + kb.gram.transpose()).eval();

    auto pc = pivoted_cholesky(kb.gram, opt.drop_tol);
    if (pc.kept.empty()) throw DegenerateBasis("build_kernel_basis: Gram matrix is numerically zero; lower the degree");
    kb.kept = pc.kept;
    kb.dropped = pc.dropped;
    kb.chol = pc.L;
    const Eigen::Index r = Eigen::Index(kb.kept.size());
    Eigen::MatrixXd Gk(r, r);
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < r; ++b) Gk(a, b) = kb.gram(Eigen::Index(kb.kept[a]), Eigen::Index(kb.kept[b]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gk, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(r - 1);
    kb.condition = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();

    // Orthonormal span: Q = K_kept L^{-T}, then two weighted Gram-Schmidt sweeps.
    Eigen::MatrixXd Kk(n, r);
    for (Eigen::Index b = 0; b < r; ++b) Kk.col(b) = K.col(Eigen::Index(kb.kept[b]));
    Eigen::MatrixXd Q = kb.chol.triangularView<Eigen::Lower>().solve(Kk.transpose()).transpose();
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (Eigen::Index b = 0; b < r; ++b) {
            for (Eigen::Index c = 0; c < b; ++c) {
                const double proj = (Q.col(c).array() * hw.array() * Q.col(b).array()).sum();
                Q.col(b) -= proj * Q.col(c);
            }
            const double nrm = std::sqrt((Q.col(b).array().square() * hw.array()).sum());
            Q.col(b) /= nrm;
        }
    }
    for (Eigen::Index b = 0; b < r; ++b) {
        PhaseFunction q{&grid, std::vector<double>(Q.col(b).data(), Q.col(b).data() + n), Parity::even, {}};
        kb.orthonormal.push_back(std::move(q));
    }
    if (compute_residuals)
        for (const auto& e : kb.elements) kb.residuals.push_back(check_kernelB(e, opt.radial));
    return kb;
}

Eigen::VectorXd project_kerB(const KernelBasis& basis, const PhaseFunction& f) {
    const Eigen::Index r = Eigen::Index(basis.kept.size());
    Eigen::VectorXd b(r);
    for (Eigen::Index a = 0; a < r; ++a) b(a) = inner_product(basis.elements[basis.kept[a]], f);
    const auto Lv = basis.chol.triangularView<Eigen::Lower>();
    Eigen::VectorXd z = Lv.solve(b);
    Eigen::VectorXd ck = basis.chol.transpose().triangularView<Eigen::Upper>().solve(z);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(Eigen::Index(basis.elements.size()));
    for (Eigen::Index a = 0; a < r; ++a) c(Eigen::Index(basis.kept[a])) = ck(a);
    return c;
}

PhaseFunction apply_projection(const KernelBasis& basis, const PhaseFunction& f) {
    PhaseFunction out{f.grid, std::vector<double>(f.v.size(), 0.0), Parity::even, {}};
    for (const auto& q : basis.orthonormal) {
        const double c = inner_product(q, f);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += c * q.v[i];
    }
    const auto c = project_kerB(basis, f);
    std::vector<std::pair<double, Evaluator>> terms;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (c(i) != 0) {
            if (!basis.elements[std::size_t(i)].eval) return out;
            terms.emplace_back(c(i), basis.elements[std::size_t(i)].eval);
        }
    out.eval = [terms](double r, double w, double L) {
        double s = 0;
        for (const auto& [ci, e] : terms) s += ci * e(r, w, L);
        return s;
    };
    return out;
}

// ---------------------------------------------------------------------------

PhaseFunction apply_B(const PhaseFunction& f, RadialOptions ro) {
    const auto& g = *f.grid;
    const auto& ss = g.state();
    auto Tf = transport_apply(f);
    auto pg = support_panels(ss, ro.panels, ro.order);
    const auto mom = source_terms(f, pg.nodes());
    auto pf = std::make_shared<RadialTable>(RadialTable{pg, column(mom, &Moments::p)});
    auto jf = std::make_shared<RadialTable>(RadialTable{pg, column(mom, &Moments::j)});
    PhaseFunction out{f.grid, Tf.v, Tf.parity, {}};
    const std::size_t n = g.nth();
    for (std::size_t o = 0; o < g.n_orbits(); ++o) {
        const double ph = g.abs_phi_prime()[o], E = g.E()[o];
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = o * n + a;
            const double R = g.R()[i], W = g.W()[i];
            const double eps = E * std::exp(-g.mu()[i]);
            out.v[i] -= 4 * pi * R * ph * std::exp(2 * g.mu()[i] + g.lambda()[i]) * (W * (*pf)(R) - W * W / eps * (*jf)(R));
        }
    }
    if (Tf.eval) {
        const SteadyState* sp = &ss;
        auto te = Tf.eval;
        out.eval = [sp, te, pf, jf](double r, double w, double L) {
            const double E = energy(*sp, r, w, L);
            const double ph = std::abs(phi_prime(sp->eos, E, L));
            double v = te(r, w, L);
            if (ph == 0) return v;
            const double eps = E * std::exp(-sp->mu(r));
            return v - 4 * pi * r * ph * std::exp(2 * sp->mu(r) + sp->lambda(r)) * (w * (*pf)(r) - w * w / eps * (*jf)(r));
        };
    }
    return out;
}

LambdaIdentityResiduals lambda_identity_residuals(const PhaseFunction& f, RadialOptions ro) {
    if (!f.eval) throw std::invalid_argument("lambda_identity_residuals: f needs a pointwise evaluator");
    const auto& g = *f.grid;
    const auto& ss = g.state();
    auto pg = support_panels(ss, ro.panels, ro.order);
    const auto& x = pg.nodes();
    const auto Te = transport_evaluator(ss, f.eval, max_abs_W(g));
    const std::size_t order = g.options().slice_order;
    std::vector<double> rhoB(x.size()), rhoT(x.size()), rhsB(x.size()), rhsT(x.size());
    parallel_for(x.size(), [&](std::size_t i) {
        const double r = x[i];
        const auto mf = slice_moments(ss, f.eval, r, order, f.parity);
        const auto mT = slice_moments(ss, Te, r, order, flipped(f.parity));
        const double el = std::exp(ss.lambda(r)), em = std::exp(ss.mu(r));
        rhoB[i] = mT.rho + 4 * pi * r * em * em * el * mf.j * hlr_lhs(ss, r, order);
        rhoT[i] = em * el * mT.rho;
        rhsB[i] = -4 * pi * r * el * em * mf.j;
        rhsT[i] = -4 * pi * r * em * em * el * el * mf.j;
    });
    const auto lB = lambda_field(ss, pg, rhoB);
    const auto lT = lambda_field(ss, pg, rhoT);
    auto rel = [](const std::vector<double>& a, const std::vector<double>& b) {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num = std::max(num, std::abs(a[i] - b[i]));
            den = std::max({den, std::abs(a[i]), std::abs(b[i])});
        }
        return den > 0 ? num / den : num;
    };
    return {rel(lB, rhsB), rel(lT, rhsT)};
}

MomentIdentityResiduals moment_identity_residuals(const PhaseFunction& f, std::size_t n_r) {
    if (!f.eval) throw std::invalid_argument("moment_identity_residuals: f needs a pointwise evaluator");
    const auto& g = *f.grid;
    const auto& ss = g.state();
    const auto Te = transport_evaluator(ss, f.eval, max_abs_W(g));
    const std::size_t order = g.options().slice_order;
    const double h = 1e-3 * (ss.Rmax - ss.Rmin);
    std::vector<double> pres(n_r), jres(n_r), pscale(n_r), jscale(n_r);
    parallel_for(n_r, [&](std::size_t i) {
        const double t = 0.5 * (1 - std::cos(pi * (double(i) + 0.5) / double(n_r)));
        const double r = ss.Rmin + 2 * h + (ss.Rmax - ss.Rmin - 4 * h) * t;
        auto mom = [&](double s) { return slice_moments(ss, f.eval, s, order, Parity::none); };
        const auto m = mom(r);
        const auto m1 = mom(r + h), m2 = mom(r + 2 * h), n1 = mom(r - h), n2 = mom(r - 2 * h);
        const double dp = (-m2.p + 8 * m1.p - 8 * n1.p + n2.p) / (12 * h);
        const double dj = (-m2.j + 8 * m1.j - 8 * n1.j + n2.j) / (12 * h);
        const auto mT = slice_moments(ss, Te, r, order, Parity::none);
        const double mp = ss.mu_prime(r);
        const double c = std::exp(ss.lambda(r) - ss.mu(r));
        const double a1 = dp, a2 = mp * (m.p + m.rho), a3 = 2 / r * (m.p - m.q), a4 = c * mT.j;
        pres[i] = std::abs(a1 + a2 + a3 + a4);
        pscale[i] = std::max({std::abs(a1), std::abs(a2), std::abs(a3), std::abs(a4)});
        const double b1 = dj, b2 = 2 * (mp + 1 / r) * m.j, b3 = c * mT.rho;
        jres[i] = std::abs(b1 + b2 + b3);
        jscale[i] = std::max({std::abs(b1), std::abs(b2), std::abs(b3)});
    });
    auto ratio = [](const std::vector<double>& a, const std::vector<double>& s) {
        const double sm = *std::max_element(s.begin(), s.end());
        const double am = *std::max_element(a.begin(), a.end());
        return sm > 0 ? am / sm : am;
    };
    return {ratio(pres, pscale), ratio(jres, jscale)};
}

double kerB_perp_defect(const PhaseFunction& f, RadialOptions ro) {
    const auto& g = *f.grid;
    const auto& ss = g.state();
    auto pg = support_panels(ss, ro.panels, ro.order);
    const auto rho = column(source_terms(f, pg.nodes()), &Moments::rho);
    const RadialTable lam{pg, lambda_field(ss, pg, rho)};
    const std::size_t n = g.nth();
    double fmax = 0, worst = 0;
    for (double x : f.v) fmax = std::max(fmax, std::abs(x));
    for (std::size_t o = 0; o < g.n_orbits(); ++o) {
        const double ph = g.abs_phi_prime()[o], E = g.E()[o];
        double s = 0, scale = 0;
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = o * n + a;
            const double R = g.R()[i], W = g.W()[i];
            const double extra = ph * std::exp(2 * g.mu()[i]) * lam(R) * W * W / E;
            s += f.v[i] + extra;
            scale = std::max(scale, std::abs(extra));
        }
        worst = std::max(worst, std::abs(s / double(n)));
        fmax = std::max(fmax, scale);
    }
    return fmax > 0 ? worst / fmax : worst;
}

double B_skew_defect(const PhaseFunction& f, const PhaseFunction& h, RadialOptions ro) {
    const auto Bf = apply_B(f, ro), Bh = apply_B(h, ro);
    const double num = std::abs(inner_product(Bf, h) + inner_product(f, Bh));
    const double den = norm(Bf) * norm(h) + norm(f) * norm(Bh);
    return den > 0 ? num / den : num;
}

PhaseFunction odd_test_function(const PhaseGrid& grid, unsigned seed) {
    const auto& ss = grid.state();
    std::mt19937_64 rng(seed);
    auto u = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };
    const double c1 = 2 * u() - 1, c2 = 2 * u() - 1, k = 1 + std::floor(3 * u()), phase = 2 * pi * u();
    const double E0 = ss.E0(), L0 = ss.eos.L0;
    const double Lspan = grid.emin().L_hi() - L0;
    const double a = ss.Rmin, width = ss.Rmax - ss.Rmin;
    const SteadyState* sp = &ss;
    Evaluator f = [=](double r, double w, double L) {
        const double E = energy(*sp, r, w, L);
        const double al = 1 - E / E0;
        const double x = (L - L0) / Lspan;
        if (al <= 0 || x <= 0) return 0.0;
        const double bump = al * al * al * x * x * x * (1 + c1 * x + c2 * al);
        return w * bump * (1.5 + std::sin(2 * pi * k * (r - a) / width + phase)) * 1e2;
    };
    return sample(grid, f, Parity::odd);
}

}  // namespace evstab
