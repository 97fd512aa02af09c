#include "evstab/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "evstab/quadrature.hpp"
#include "evstab/roots.hpp"
#include "evstab/slice.hpp"

namespace evstab {

namespace {
constexpr double pi = std::numbers::pi;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

double activation(double L0, double r, double y) {
    if (r <= 0) return L0 > 0 ? -1.0 : 1 - std::exp(-y);
    return 1 - std::exp(-y) * std::sqrt(1 + L0 / (r * r));
}
}  // namespace

std::string to_string(Mode m) { return m == Mode::singfree ? "singfree" : "shell"; }

Mode mode_from_string(const std::string& s) {
    if (s == "singfree") return Mode::singfree;
    if (s == "shell") return Mode::shell;
    throw std::invalid_argument("unknown mode '" + s + "' (expected singfree|shell)");
}

double schwarzschild_psi(double M, double L, double r) {
    if (r <= 2 * M) return 0;
    return std::sqrt(1 - 2 * M / r) * std::sqrt(1 + L / (r * r));
}

double schwarzschild_psi_prime(double M, double L, double r) {
    const double a = 1 - 2 * M / r, b = 1 + L / (r * r);
    return (M / (r * r) * b - L / (r * r * r) * a) / std::sqrt(a * b);
}

CriticalRadii schwarzschild_critical_radii(double M, double L) {
    if (!(M > 0)) throw std::invalid_argument("critical radii: M must be positive");
    if (!(L > 12 * M * M))
        throw std::invalid_argument("critical radii: no critical points for L <= 12 M^2 (L=" + fmt(L) + ")");
    // Roots of M r^2 - L r + 3 M L = 0, the smaller one in cancellation-free form.
    const double disc = std::sqrt(L * L - 12 * M * M * L);
    const double r_L = (L + disc) / (2 * M);
    const double s_L = 3 * L / r_L;
    return {s_L, r_L};
}

LevelRadii schwarzschild_level_radii(double M, double L, double E) {
    const auto cr = schwarzschild_critical_radii(M, L);
    const double lo = schwarzschild_psi(M, L, cr.r_L);
    const double hi = std::min(1.0, schwarzschild_psi(M, L, cr.s_L));
    if (!(E > lo)) throw std::invalid_argument("level radii: E=" + fmt(E) + " must exceed Psi_L(r_L)=" + fmt(lo));
    if (!(E < hi))
        throw std::invalid_argument("level radii: E=" + fmt(E) + " must be below min(1, Psi_L(s_L))=" + fmt(hi));
    auto f = [&](double r) { return schwarzschild_psi(M, L, r) - E; };
    LevelRadii out;
    out.r0 = bracketed_root(f, 2 * M, cr.s_L);
    out.r_minus = bracketed_root(f, cr.s_L, cr.r_L);
    double b = 2 * cr.r_L;
    while (f(b) <= 0) b *= 2;
    out.r_plus = bracketed_root(f, cr.r_L, b);
    return out;
}

ShellParameters ShellParameters::make(double M, double L0, double E, std::optional<double> eta0) {
    ShellParameters p;
    p.M = M;
    p.L0 = L0;
    p.E_intermediate = E;
    const auto cr = schwarzschild_critical_radii(M, L0);
    p.r0 = cr.s_L;
    const auto lev = schwarzschild_level_radii(M, L0, E);
    p.eta0 = eta0 ? *eta0 : 0.5 * (lev.r_minus - p.r0);
    p.y_init = std::log(std::sqrt(2.0) * E);
    p.validate();
    return p;
}

void ShellParameters::validate() const {
    if (!(M > 0)) throw std::invalid_argument("shell: M must be positive");
    if (!(L0 > 12 * M * M)) throw std::invalid_argument("shell: L0=" + fmt(L0) + " must exceed 12 M^2=" + fmt(12 * M * M));
    const auto cr = schwarzschild_critical_radii(M, L0);
    const auto lev = schwarzschild_level_radii(M, L0, E_intermediate);
    if (std::abs(r0 - cr.s_L) > 1e-12 * cr.s_L) throw std::invalid_argument("shell: r0 must equal s_L0");
    if (!(eta0 > 0 && r0 + eta0 < lev.r_minus))
        throw std::invalid_argument("shell: eta0 must satisfy 0 < eta0 < r_-(E,L0) - r0");
    if (std::abs(y_init - std::log(std::sqrt(2.0) * E_intermediate)) > 1e-14)
        throw std::invalid_argument("shell: y_init must equal ln(sqrt(2) E)");
}

// ---------------------------------------------------------------------------

double SteadyState::y(double r) const {
    if (mode == Mode::singfree) {
        if (vacuum) return y0;
        if (r <= Rmax) return sol(r)[0];
        return y_inf - 0.5 * std::log(1 - 2 * M_vlasov / r);
    }
    const double E = shell->E_intermediate;
    if (vacuum || r <= Rmin) return std::log(E) - 0.5 * std::log(1 - 2 * M / r);
    if (r <= R0max) return std::log(E) - 0.5 * std::log(1 - 2 * M / r) + sol(r)[0];
    return y_inf - 0.5 * std::log(1 - 2 * (M + M_vlasov) / r);
}

double SteadyState::m(double r) const {
    if (vacuum || r <= Rmin) return 0;
    if (r >= r_ode_end) return M_vlasov;
    return sol(r)[1];
}

double SteadyState::lambda(double r) const {
    if (r <= 0) return 0;
    return -0.5 * std::log(1 - 2 * (M + m(r)) / r);
}

double SteadyState::mu_prime(double r) const {
    if (r <= 0) return 0;
    const double mt = M + m(r);
    return (mt / (r * r) + 4 * pi * r * p(r)) / (1 - 2 * mt / r);
}

double SteadyState::lambda_prime(double r) const {
    if (r <= 0) return 0;
    const double mt = M + m(r);
    return (4 * pi * r * rho(r) - mt / (r * r)) / (1 - 2 * mt / r);
}

double SteadyState::slice_A(double r) const {
    if (!in_support(r)) return 0;
    return std::max(0.0, std::exp(2 * y(r)) - 1 - eos.L0 / (r * r));
}

double SteadyState::rho(double r) const {
    if (!in_support(r)) return 0;
    return eos.delta * profile_G(eos, r, y(r));
}

double SteadyState::p(double r) const {
    if (!in_support(r)) return 0;
    return eos.delta * profile_H(eos, r, y(r));
}

double SteadyState::rho_plus_p(double r) const {
    if (!in_support(r)) return 0;
    const auto gh = profile_GH(eos, r, y(r));
    return eos.delta * (gh.G + gh.H);
}

double SteadyState::q(double r) const {
    const double A = slice_A(r);
    if (A <= 0) return 0;
    const double emu = std::exp(mu(r));
    const double r2 = r * r;
    const auto res = slice_integrate<1>(
        r, A, eos.L0, opts.slice_order, opts.slice_order,
        [&](double w, double L) {
            const double eps = std::sqrt(1 + w * w + L / r2);
            return std::array<double, 1>{0.5 * L / r2 * phi(eos, emu * eps, L) / eps};
        },
        true);
    return res[0];
}

double SteadyState::psi(double L, double r) const { return std::exp(mu(r)) * std::sqrt(1 + L / (r * r)); }

double SteadyState::psi_prime(double L, double r) const {
    const double s = std::sqrt(1 + L / (r * r));
    return std::exp(mu(r)) * (mu_prime(r) * s - L / (r * r * r * s));
}

double SteadyState::psi_second(double L, double r) const {
    const double h = 1e-4 * r;
    return (-psi_prime(L, r + 2 * h) + 8 * psi_prime(L, r + h) - 8 * psi_prime(L, r - h) + psi_prime(L, r - 2 * h)) /
           (12 * h);
}

std::vector<double> SteadyState::grid() const {
    std::vector<double> g;
    const double rin = mode == Mode::shell ? 2 * M : 0.0;
    const double lo = mode == Mode::shell ? Rmin : 0.0;
    if (mode == Mode::shell) {
        for (int i = 1; i <= 64; ++i) {
            double t = i / 64.0;
            g.push_back(rin + (lo - rin) * t * t);
        }
    } else if (Rmin > 0) {
        for (int i = 0; i <= 32; ++i) g.push_back(Rmin * i / 32.0);
    }
    if (!vacuum) {
        for (const auto& s : sol.steps()) {
            if (s.t0 >= Rmin && s.t0 <= Rmax) g.push_back(s.t0);
        }
        for (double x : Chebyshev::lobatto_points(Rmin, Rmax, opts.cheb_nodes)) g.push_back(x);
    }
    const double top = mode == Mode::shell ? std::max(Rmax, R0max) : Rmax;
    for (int i = 1; i <= 64; ++i) g.push_back(top * std::pow(10.0, i / 64.0));
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::abs(b); }),
            g.end());
    if (mode == Mode::shell) g.erase(std::remove_if(g.begin(), g.end(), [&](double r) { return r <= rin; }), g.end());
    return g;
}

std::vector<TableRow> SteadyState::table() const {
    std::vector<TableRow> out;
    for (double r : grid()) {
        TableRow row{r, y(r), mu(r), lambda(r), rho(r), p(r), q(r), m(r)};
        out.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {
using DP = DormandPrince<2>;

DP::Options dp_options(const SolverOptions& o) {
    DP::Options d;
    d.rtol = o.rtol;
    d.atol = o.atol;
    return d;
}
}  // namespace

SteadyState solve_singularity_free(const EquationOfState& eos_in, double y0, const SolverOptions& opts) {
    if (!std::isfinite(y0) || !(y0 > 0)) throw std::invalid_argument("singfree: y0 must be positive");
    EquationOfState eos = eos_in;
    eos.cutoff_energy.reset();
    eos.validate();
    SteadyState ss;
    ss.mode = Mode::singfree;
    ss.M = 0;
    ss.y0 = y0;
    ss.opts = opts;
    if (eos.delta == 0) {
        ss.vacuum = true;
        eos.cutoff_energy = std::exp(y0);
        ss.eos = eos;
        ss.y_inf = y0;
        return ss;
    }
    const double L0 = eos.L0, delta = eos.delta;
    double last_r = 0;
    auto rhs = [&](double r, const DP::State& s) -> DP::State {
        if (r <= 0) return {0.0, 0.0};
        const auto gh = profile_GH(eos, r, s[0]);
        const double den = 1 - 2 * s[1] / r;
        if (!(den > 0))
            throw std::runtime_error("singfree: 2m/r reached 1 near r=" + fmt(r) + " (last valid r=" + fmt(last_r) + ")");
        last_r = r;
        return {-(s[1] / (r * r) + 4 * pi * r * delta * gh.H) / den, 4 * pi * r * r * delta * gh.G};
    };
    DP dp(rhs, dp_options(opts));
    bool entered = false;
    dp.integrate(0.0, {y0, 0.0}, 1e6, [&](const DP::Step& s) {
        const double t = s.t0 + s.h;
        const double a = activation(L0, t, DP::dense(s, t)[0]);
        if (a > 0) entered = true;
        return entered && a <= 0;
    });
    const auto& steps = dp.steps();
    if (!entered || activation(L0, dp.t_end(), dp.y_end()[0]) > 0)
        throw std::runtime_error("singfree: no compact support found");
    auto act = [&](const DP::Step& s) {
        return [&s, L0](double r) { return activation(L0, r, DP::dense(s, r)[0]); };
    };
    const auto& last = steps.back();
    const double R = bracketed_root(act(last), last.t0, last.t0 + last.h);
    double Rin = 0;
    if (L0 > 0) {
        for (const auto& s : steps) {
            if (activation(L0, s.t0 + s.h, DP::dense(s, s.t0 + s.h)[0]) > 0) {
                Rin = bracketed_root(act(s), std::max(s.t0, 1e-300), s.t0 + s.h);
                break;
            }
        }
    }
    ss.sol = DenseSolution<2>(steps);
    ss.sol.truncate_after(R);
    const auto yR = ss.sol(R);
    ss.Rmin = Rin;
    ss.Rmax = R;
    ss.r_ode_end = R;
    ss.M_vlasov = yR[1];
    ss.y_inf = yR[0] + 0.5 * std::log(1 - 2 * yR[1] / R);
    const double E0 = std::exp(ss.y_inf);
    if (!(E0 > 0 && E0 < 1)) throw std::runtime_error("singfree: cut-off energy " + fmt(E0) + " outside ]0,1[");
    eos.cutoff_energy = E0;
    ss.eos = eos;
    return ss;
}

SteadyState build_shell(const ShellParameters& params, EquationOfState eos, double delta, const SolverOptions& opts) {
    params.validate();
    if (!(delta >= 0)) throw std::invalid_argument("shell: delta must be >= 0");
    eos.L0 = params.L0;
    eos.delta = delta;
    eos.cutoff_energy.reset();
    eos.validate();
    SteadyState ss;
    ss.mode = Mode::shell;
    ss.M = params.M;
    ss.shell = params;
    ss.opts = opts;
    const auto lev = schwarzschild_level_radii(params.M, params.L0, params.E_intermediate);
    ss.R0min = lev.r_minus;
    ss.R0max = lev.r_plus;
    ss.Rmin = lev.r_minus;
    if (delta == 0) {
        ss.vacuum = true;
        ss.Rmax = lev.r_plus;
        ss.r_ode_end = lev.r_plus;
        ss.y_inf = std::log(params.E_intermediate);
        eos.cutoff_energy = params.E_intermediate;
        ss.eos = eos;
        return ss;
    }
    const double M = params.M, L0 = params.L0, r0 = params.r0;
    // Integrated unknown is z = y - y_vac, which is O(delta).
    auto y_vac = [&](double r) { return std::log(params.E_intermediate) - 0.5 * std::log(1 - 2 * M / r); };
    double last_r = ss.Rmin;
    auto rhs = [&](double r, const DP::State& s) -> DP::State {
        const double mt = M + s[1];
        const double den = 1 - 2 * mt / r;
        if (!(den > 0))
            throw std::runtime_error("shell: horizon formation, 2(M+m)/r reached 1 near r=" + fmt(r) +
                                     " (last valid r=" + fmt(last_r) + ")");
        last_r = r;
        GH gh;
        if (r >= r0) gh = profile_GH(eos, r, y_vac(r) + s[0]);
        const double dy = -(mt / (r * r) + 4 * pi * r * delta * gh.H) / den;
        const double dy_vac = -M / (r * r) / (1 - 2 * M / r);
        return {dy - dy_vac, 4 * pi * r * r * delta * gh.G};
    };
    DP dp(rhs, dp_options(opts));
    dp.integrate(ss.Rmin, {0.0, 0.0}, ss.R0max);
    ss.sol = DenseSolution<2>(dp.steps());
    ss.r_ode_end = ss.R0max;
    const auto yend = dp.y_end();
    ss.M_vlasov = yend[1];
    ss.y_inf = y_vac(ss.R0max) + yend[0] + 0.5 * std::log(1 - 2 * (M + yend[1]) / ss.R0max);
    const double E0 = std::exp(ss.y_inf);
    if (!(E0 > 0 && E0 < 1)) throw std::runtime_error("shell: cut-off energy " + fmt(E0) + " outside ]0,1[");
    eos.cutoff_energy = E0;
    ss.eos = eos;

    // Outer support edge: last sign change of the activation along the accepted steps.
    const auto& steps = dp.steps();
    double Rmax = ss.R0max;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        const auto& s = *it;
        auto f = [&](double r) { return activation(L0, r, y_vac(r) + DP::dense(s, r)[0]); };
        const double fa = f(s.t0), fb = f(s.t0 + s.h);
        if (fa > 0) {
            Rmax = fb > 0 ? s.t0 + s.h : bracketed_root(f, s.t0, s.t0 + s.h, fa, fb);
            break;
        }
    }
    ss.Rmax = Rmax;
    if (!(ss.Rmax > ss.Rmin)) throw std::runtime_error("shell: empty matter support");
    return ss;
}

// ---------------------------------------------------------------------------

Diagnostics diagnostics(const SteadyState& ss) {
    Diagnostics d;
    d.M_ADM = ss.M + ss.M_vlasov;
    if (!ss.vacuum) {
        std::vector<double> br;
        const std::size_t np = 64;
        for (std::size_t i = 0; i <= np; ++i) br.push_back(ss.Rmin + (ss.Rmax - ss.Rmin) * i / np);
        PanelGrid pg(br, 10);
        std::vector<double> f(pg.size());
        for (std::size_t i = 0; i < pg.size(); ++i) {
            const double r = pg.nodes()[i];
            const double A = ss.slice_A(r);
            const double emu = std::exp(ss.mu(r));
            const auto n = slice_integrate<1>(
                r, A, ss.eos.L0, ss.opts.slice_order, ss.opts.slice_order,
                [&](double w, double L) {
                    return std::array<double, 1>{phi(ss.eos, emu * std::sqrt(1 + w * w + L / (r * r)), L)};
                },
                true);
            f[i] = 4 * pi * r * r * std::exp(ss.lambda(r)) * n[0];
        }
        d.N_rest_mass = pg.integrate(f);
        if (d.N_rest_mass > 0) d.binding_energy = (d.N_rest_mass - ss.M_vlasov) / d.N_rest_mass;
    }
    for (double r : ss.grid()) {
        if (r <= 0 || r < ss.Rmin) continue;
        d.max_2m_over_r = std::max(d.max_2m_over_r, 2 * (ss.M + ss.m(r)) / r);
    }
    if (ss.vacuum && ss.mode == Mode::singfree) d.max_2m_over_r = 0;
    return d;
}

Residuals residuals(const SteadyState& ss, std::size_t samples) {
    Residuals res;
    if (ss.vacuum) return res;
    const double a = ss.Rmin, b = ss.Rmax, w = b - a;
    const double h = 2e-4 * w;
    auto d4 = [h](auto&& f, double r) {
        return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h);
    };
    double tov_num = 0, tov_den = 0, f1_num = 0, f1_den = 0, f2_num = 0, f2_den = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double r = a + w * 0.5 * (1 - std::cos(pi * (i + 0.5) / samples));
        if (r - 2 * h <= a || r + 2 * h >= b) continue;
        const double rho = ss.rho(r), p = ss.p(r), q = ss.q(r);
        const double mup = ss.mu_prime(r);
        const double dp = d4([&](double s) { return ss.p(s); }, r);
        const double t2 = mup * (p + rho), t3 = 2 / r * (p - q);
        tov_num = std::max(tov_num, std::abs(dp + t2 + t3));
        tov_den = std::max({tov_den, std::abs(dp), std::abs(t2), std::abs(t3)});

        const double lam = ss.lambda(r);
        const double e2l = std::exp(-2 * lam);
        const double dlam = d4([&](double s) { return ss.lambda(s); }, r);
        const double dmu = d4([&](double s) { return ss.mu(s); }, r);
        const double lhs1 = e2l * (2 * r * dlam - 1) + 1, rhs1 = 8 * pi * r * r * rho;
        const double lhs2 = e2l * (2 * r * dmu + 1) - 1, rhs2 = 8 * pi * r * r * p;
        f1_num = std::max(f1_num, std::abs(lhs1 - rhs1));
        f1_den = std::max(f1_den, std::abs(rhs1));
        f2_num = std::max(f2_num, std::abs(lhs2 - rhs2));
        f2_den = std::max(f2_den, std::abs(rhs1));
    }
    res.tov = tov_den > 0 ? tov_num / tov_den : 0;
    res.field_rho = f1_den > 0 ? f1_num / f1_den : 0;
    res.field_p = f2_den > 0 ? f2_num / f2_den : 0;
    return res;
}

}  // namespace evstab
