#include "evstab/potential_orbits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "evstab/ode.hpp"
#include "evstab/roots.hpp"

namespace evstab {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double harmonic_threshold = 1e-4;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Radial sample points on the support, clustered quadratically toward the inner edge.
std::vector<double> support_samples(const SteadyState& ss, std::size_t n) {
    std::vector<double> x;
    x.reserve(n);
    const double a = ss.Rmin, b = ss.Rmax;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i + 1) / double(n + 1);
        x.push_back(a + (b - a) * t * t);
    }
    return x;
}
}  // namespace

double effective_potential(const SteadyState& ss, double L, double r) {
    if (ss.mode == Mode::shell && r <= 2 * ss.M) throw std::domain_error("effective_potential: r must exceed 2M");
    if (!(r > 0)) throw std::domain_error("effective_potential: r must be positive");
    return ss.psi(L, r);
}

PotentialMinimum potential_minimum(const SteadyState& ss, double L) {
    const auto x = support_samples(ss, 256);
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = ss.psi_prime(L, x[i]);
    PotentialMinimum best{x.front(), ss.psi(L, x.front())};
    bool found = false;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (d[i] < 0 && d[i + 1] >= 0) {
            const double r = bracketed_root([&](double s) { return ss.psi_prime(L, s); }, x[i], x[i + 1], d[i], d[i + 1]);
            const double v = ss.psi(L, r);
            if (!found || v < best.E_min) best = {r, v};
            found = true;
        }
    }
    if (!found) {
        for (double r : x) {
            const double v = ss.psi(L, r);
            if (v < best.E_min) best = {r, v};
        }
    }
    return best;
}

double min_angular_momentum(const SteadyState& ss) { return ss.eos.L0; }

double max_angular_momentum(const SteadyState& ss) {
    if (ss.vacuum) throw std::runtime_error("max_angular_momentum: no matter support");
    const double E0 = ss.E0();
    auto f = [&](double L) { return potential_minimum(ss, L).E_min - E0; };
    double lo = ss.eos.L0;
    double hi = lo > 0 ? 2 * lo : 1e-3;
    double flo = f(lo > 0 ? lo : 1e-12);
    if (flo >= 0) throw std::runtime_error("max_angular_momentum: I_L empty at the lower cut");
    double fhi = f(hi);
    while (fhi < 0) {
        lo = hi;
        flo = fhi;
        hi *= 2;
        fhi = f(hi);
        if (hi > 1e12) throw std::runtime_error("max_angular_momentum: no upper bound found");
    }
    return bracketed_root(f, lo, hi, flo, fhi, 48);
}

// ---------------------------------------------------------------------------

SingleWellReport verify_single_well(const SteadyState& ss, std::size_t n_L, std::size_t samples) {
    SingleWellReport rep;
    if (ss.vacuum) {
        rep.violations.push_back("no matter support");
        return rep;
    }
    const double E0 = ss.E0();
    const double Llo = min_angular_momentum(ss), Lhi = max_angular_momentum(ss);
    rep.support.E0 = E0;
    rep.support.L_lo = Llo;
    rep.support.L_hi = Lhi;

    // Uniform interior values plus geometric refinement toward L_hi where I_L collapses.
    std::vector<double> Ls;
    const std::size_t nu = n_L / 2, ng = n_L - nu;
    for (std::size_t i = 0; i < nu; ++i) Ls.push_back(Llo + (Lhi - Llo) * (i + 0.5) / nu);
    for (std::size_t i = 1; i <= ng; ++i) Ls.push_back(Lhi - (Lhi - Llo) * std::pow(10.0, -6.0 * double(i) / ng));
    std::sort(Ls.begin(), Ls.end());

    const auto coarse = support_samples(ss, samples);
    for (double L : Ls) {
        LCheck c;
        c.L = L;
        std::vector<char> in(coarse.size());
        for (std::size_t i = 0; i < coarse.size(); ++i) in[i] = ss.psi(L, coarse[i]) < E0;
        auto first = std::find(in.begin(), in.end(), 1);
        if (first == in.end()) {
            // I_L smaller than the sample spacing; locate it through the minimum.
            const auto pm = potential_minimum(ss, L);
            if (pm.E_min >= E0) continue;
            c.I_lo = c.I_hi = pm.r_L;
        }
        std::size_t i0 = first - in.begin();
        std::size_t i1 = coarse.size() - 1 - (std::find(in.rbegin(), in.rend(), 1) - in.rbegin());
        if (first != in.end()) {
            for (std::size_t i = i0; i <= i1; ++i)
                if (!in[i]) c.connected = false;
            auto g = [&](double r) { return ss.psi(L, r) - E0; };
            c.I_lo = i0 > 0 ? bracketed_root(g, coarse[i0 - 1], coarse[i0]) : ss.Rmin;
            c.I_hi = i1 + 1 < coarse.size() ? bracketed_root(g, coarse[i1], coarse[i1 + 1]) : ss.Rmax;
        }
        if (c.I_hi <= c.I_lo) {
            const auto pm = potential_minimum(ss, L);
            const double w = 1e-6 * pm.r_L;
            c.I_lo = pm.r_L - w;
            c.I_hi = pm.r_L + w;
        }
        std::vector<double> x(samples), d(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            x[i] = c.I_lo + (c.I_hi - c.I_lo) * (i + 0.5) / samples;
            d[i] = ss.psi_prime(L, x[i]);
        }
        for (std::size_t i = 0; i + 1 < samples; ++i) {
            if ((d[i] < 0) != (d[i + 1] < 0)) {
                ++c.sign_changes;
                c.critical_radii.push_back(
                    bracketed_root([&](double s) { return ss.psi_prime(L, s); }, x[i], x[i + 1], d[i], d[i + 1]));
            }
        }
        if (c.sign_changes == 1) {
            c.r_L = c.critical_radii.front();
            c.E_min = ss.psi(L, c.r_L);
        }
        if (!c.connected) rep.violations.push_back("I_L disconnected at L=" + fmt(L));
        if (c.sign_changes != 1) {
            std::string msg = "L=" + fmt(L) + ": " + std::to_string(c.sign_changes) + " critical points";
            for (double r : c.critical_radii) msg += " r=" + fmt(r);
            rep.violations.push_back(msg);
        } else if (ss.psi_second(L, c.r_L) <= 0) {
            rep.violations.push_back("L=" + fmt(L) + ": critical point is not a minimum");
        } else {
            rep.support.L_grid.push_back(L);
            rep.support.r_L.push_back(c.r_L);
            rep.support.E_min.push_back(c.E_min);
        }
        rep.per_L.push_back(std::move(c));
    }
    const auto diag = diagnostics(ss);
    rep.max_2m_over_r = diag.max_2m_over_r;
    const bool isotropic = ss.mode == Mode::singfree && ss.eos.L0 == 0 && ss.eos.l == 0;
    rep.sufficient_condition = isotropic && rep.max_2m_over_r <= 1.0 / 3.0;
    rep.pass = rep.violations.empty();
    if (rep.pass) {
        const auto pb = period_bounds(ss, 16, 16);
        rep.support.T_inf = pb.T_inf;
        rep.support.T_sup = pb.T_sup;
    }
    return rep;
}

// ---------------------------------------------------------------------------

TurningPoints turning_points(const SteadyState& ss, double E, double L, double r_L) {
    if (r_L <= 0) r_L = potential_minimum(ss, L).r_L;
    const double emin = ss.psi(L, r_L);
    if (!(E > emin)) throw std::out_of_range("turning_points: E=" + fmt(E) + " <= Psi_L(r_L)=" + fmt(emin));
    if (!(E < ss.E0())) throw std::out_of_range("turning_points: E=" + fmt(E) + " >= E0=" + fmt(ss.E0()));
    auto f = [&](double r) { return ss.psi(L, r) - E; };
    double a = ss.Rmin > 0 ? ss.Rmin : 0.5 * r_L;
    const double floor = ss.mode == Mode::shell ? 2 * ss.M : 0.0;
    double fa = f(a);
    while (fa <= 0) {
        a = floor + 0.5 * (a - floor);
        fa = f(a);
        if (a - floor < 1e-12 * r_L) throw std::runtime_error("turning_points: no inner bracket");
    }
    double b = ss.Rmax;
    double fb = f(b);
    while (fb <= 0) {
        b = r_L + 2 * (b - r_L);
        fb = f(b);
        if (b > 1e8 * r_L) throw std::runtime_error("turning_points: no outer bracket");
    }
    const double fL = f(r_L);
    TurningPoints tp;
    tp.r_minus = bracketed_root(f, a, r_L, fa, fL);
    tp.r_plus = bracketed_root(f, r_L, b, fL, fb);
    return tp;
}

double harmonic_period(const SteadyState& ss, double E, double L) {
    const double rL = potential_minimum(ss, L).r_L;
    return 2 * pi * std::exp(ss.lambda(rL) - ss.mu(rL)) * std::sqrt(E / ss.psi_second(L, rL));
}

namespace {
// Integrand of the half period in the u variable; finite limits at u = -+ pi/2.
struct HalfPeriodIntegrand {
    const SteadyState& ss;
    double E, L, mid, half, rm, rp;
    double operator()(double u) const {
        const double r = mid + half * std::sin(u);
        const double g = std::exp(ss.lambda(r) - ss.mu(r)) * E;
        const double c = std::cos(u);
        if (c < 1e-7) {
            const double rt = u < 0 ? rm : rp;
            const double dpsi = std::abs(ss.psi_prime(L, rt));
            return std::exp(ss.lambda(rt) - ss.mu(rt)) * std::sqrt(E * half / dpsi);
        }
        const double psi = ss.psi(L, r);
        const double D = (E - psi) * (E + psi);
        return g * half * c / std::sqrt(std::max(D, 1e-300));
    }
};
}  // namespace

PeriodResult period(const SteadyState& ss, double E, double L, std::size_t order) {
    const double rL = potential_minimum(ss, L).r_L;
    const auto tp = turning_points(ss, E, L, rL);
    PeriodResult res;
    if ((tp.r_plus - tp.r_minus) / rL < harmonic_threshold) {
        res.harmonic = true;
        res.T = harmonic_period(ss, E, L);
        return res;
    }
    const double mid = 0.5 * (tp.r_plus + tp.r_minus), half = 0.5 * (tp.r_plus - tp.r_minus);
    HalfPeriodIntegrand g{ss, E, L, mid, half, tp.r_minus, tp.r_plus};
    const auto& rule = gauss_legendre(order);
    double s = 0;
    for (std::size_t i = 0; i < order; ++i) s += rule.w[i] * g(0.5 * pi * rule.x[i]);
    res.T = 2 * 0.5 * pi * s;
    return res;
}

// ---------------------------------------------------------------------------

OrbitMap::OrbitMap(const SteadyState& ss, double E, double L, std::size_t n_cheb, double r_L)
    : ss_(&ss), E_(E), L_(L) {
    const double rL = r_L > 0 ? r_L : potential_minimum(ss, L).r_L;
    const auto tp = turning_points(ss, E, L, rL);
    rm_ = tp.r_minus;
    rp_ = tp.r_plus;
    mid_ = 0.5 * (rp_ + rm_);
    half_ = 0.5 * (rp_ - rm_);
    if (half_ * 2 / rL < harmonic_threshold) {
        harmonic_ = true;
        T_ = 2 * pi * std::exp(ss.lambda(rL) - ss.mu(rL)) * std::sqrt(E / ss.psi_second(L, rL));
        return;
    }
    HalfPeriodIntegrand g{ss, E, L, mid_, half_, rm_, rp_};
    auto us = Chebyshev::lobatto_points(-0.5 * pi, 0.5 * pi, n_cheb);
    std::vector<double> v(us.size());
    for (std::size_t i = 0; i < us.size(); ++i) v[i] = g(us[i]);
    theta_u_ = Chebyshev::from_samples(v, -0.5 * pi, 0.5 * pi).integral();
    const double total = theta_u_(0.5 * pi);
    T_ = 2 * total;
    // theta runs over [0, 1/2] on the outgoing branch.
    scale_ = 1 / T_;
}

double OrbitMap::theta_of_r(double r) const {
    const double s = std::clamp((r - mid_) / half_, -1.0, 1.0);
    const double u = std::asin(s);
    if (harmonic_) return (u + 0.5 * pi) / (2 * pi);
    return std::clamp(scale_ * theta_u_(u), 0.0, 0.5);
}

double OrbitMap::u_of_theta(double th) const {
    if (harmonic_) return 2 * pi * th - 0.5 * pi;
    if (th <= 0) return -0.5 * pi;
    if (th >= 0.5) return 0.5 * pi;
    auto f = [&](double u) { return scale_ * theta_u_(u) - th; };
    return bracketed_root(f, -0.5 * pi, 0.5 * pi, -th, 0.5 - th, 50);
}

void OrbitMap::RW(double theta, double& R, double& W) const {
    double th = theta - std::floor(theta);
    double sign = 1;
    if (th > 0.5) {
        th = 1 - th;
        sign = -1;
    }
    const double u = u_of_theta(th);
    R = mid_ + half_ * std::sin(u);
    const double psi = ss_->psi(L_, R);
    const double w2 = std::exp(-2 * ss_->mu(R)) * (E_ - psi) * (E_ + psi);
    W = sign * std::sqrt(std::max(0.0, w2));
}

double OrbitMap::R(double theta) const {
    double r, w;
    RW(theta, r, w);
    return r;
}

double OrbitMap::dtheta_dr(double r) const {
    const double psi = ss_->psi(L_, r);
    const double D = (E_ - psi) * (E_ + psi);
    return std::exp(ss_->lambda(r) - ss_->mu(r)) * E_ / (T_ * std::sqrt(std::max(D, 1e-300)));
}

OrbitTable orbit_solution(const SteadyState& ss, double E, double L, std::size_t n_theta) {
    if (n_theta < 2) throw std::invalid_argument("orbit_solution: need at least two nodes");
    OrbitMap om(ss, E, L);
    OrbitTable t;
    t.E = E;
    t.L = L;
    t.r_minus = om.r_minus();
    t.r_plus = om.r_plus();
    t.T = period(ss, E, L).T;
    for (std::size_t i = 0; i < n_theta; ++i) {
        const double th = 0.5 * double(i) / double(n_theta - 1);
        double r, w;
        om.RW(th, r, w);
        t.theta_nodes.push_back(th);
        t.R_nodes.push_back(r);
        t.W_nodes.push_back(w);
    }
    return t;
}

double characteristic_period(const SteadyState& ss, double E, double L, double rtol) {
    const auto tp = turning_points(ss, E, L);
    using DP = DormandPrince<2>;
    auto rhs = [&](double, const DP::State& s) -> DP::State {
        const double r = s[0], w = s[1];
        const double eps = std::sqrt(1 + w * w + L / (r * r));
        const double f = std::exp(ss.mu(r) - ss.lambda(r));
        return {f * w / eps, f * (L / (r * r * r * eps) - ss.mu_prime(r) * eps)};
    };
    DP::Options o;
    o.rtol = rtol;
    o.atol = 1e-15;
    DP dp(rhs, o);
    bool negative = false;
    const double Tguess = period(ss, E, L).T;
    dp.integrate(0.0, {tp.r_minus, 0.0}, 4 * Tguess, [&](const DP::Step& s) {
        const double w = DP::dense(s, s.t0 + s.h)[1];
        if (w < 0) negative = true;
        return negative && w >= 0;
    });
    if (!negative) throw std::runtime_error("characteristic_period: orbit did not close");
    const auto& last = dp.steps().back();
    return bracketed_root([&](double t) { return DP::dense(last, t)[1]; }, last.t0, last.t0 + last.h);
}

PeriodBounds period_bounds(const SteadyState& ss, std::size_t nE, std::size_t nL) {
    PeriodBounds pb;
    pb.T_inf = INFINITY;
    pb.T_sup = 0;
    const double Llo = min_angular_momentum(ss), Lhi = max_angular_momentum(ss);
    const double E0 = ss.E0();
    const auto& gl = gauss_legendre(nL);
    const auto& ge = gauss_legendre(nE);
    for (std::size_t i = 0; i < nL; ++i) {
        const double L = Llo + (Lhi - Llo) * 0.5 * (gl.x[i] + 1);
        const double emin = potential_minimum(ss, L).E_min;
        for (std::size_t j = 0; j < nE; ++j) {
            const double t = 0.5 * (ge.x[j] + 1);
            const double E = emin + (E0 - emin) * t;
            const double T = period(ss, E, L).T;
            pb.T_inf = std::min(pb.T_inf, T);
            pb.T_sup = std::max(pb.T_sup, T);
            ++pb.samples;
        }
    }
    return pb;
}

}  // namespace evstab

namespace evstab {

MinimalEnergy::MinimalEnergy(const SteadyState& ss, std::size_t n) {
    lo_ = min_angular_momentum(ss);
    hi_ = max_angular_momentum(ss);
    E0_ = ss.E0();
    sqrt_var_ = ss.mode == Mode::singfree && lo_ == 0;
    auto f = [&](double x) {
        const double t = sqrt_var_ ? x * x : x;
        const double L = lo_ + (hi_ - lo_) * t;
        if (L <= 0) return std::exp(ss.mu(0.0));
        return potential_minimum(ss, L).E_min;
    };
    cheb_ = Chebyshev(f, 0.0, 1.0, n);
    // Check against the midpoints between Lobatto nodes.
    auto pts = Chebyshev::lobatto_points(0.0, 1.0, n);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 4) {
        const double x = 0.5 * (pts[i] + pts[i + 1]);
        err_ = std::max(err_, std::abs(cheb_(x) - f(x)));
    }
}

double MinimalEnergy::x_of(double L) const {
    const double t = std::clamp((L - lo_) / (hi_ - lo_), 0.0, 1.0);
    return sqrt_var_ ? std::sqrt(t) : t;
}

double MinimalEnergy::operator()(double L) const { return cheb_(x_of(L)); }

}  // namespace evstab
