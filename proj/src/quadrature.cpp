#include "evstab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace evstab {

namespace {

Rule compute_gl(std::size_t n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1, p2 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * pp * pp);
    }
    if (n % 2 == 1) r.x[n / 2] = 0;
    return r;
}

}  // namespace

const Rule& gauss_legendre(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: order must be positive");
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(compute_gl(n));
    return *slot;
}

Rule gauss_legendre(std::size_t n, double a, double b) {
    const Rule& ref = gauss_legendre(n);
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const double h = 0.5 * (b - a), c = 0.5 * (b + a);
    for (std::size_t i = 0; i < n; ++i) {
        r.x[i] = c + h * ref.x[i];
        r.w[i] = h * ref.w[i];
    }
    return r;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    const Rule& ref = gauss_legendre(n);
    const double h = 0.5 * (b - a), c = 0.5 * (b + a);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += ref.w[i] * f(c + h * ref.x[i]);
    return h * s;
}

void legendre_values(double x, std::size_t n, double* out) {
    if (n == 0) return;
    out[0] = 1;
    if (n == 1) return;
    out[1] = x;
    for (std::size_t j = 2; j < n; ++j)
        out[j] = ((2.0 * j - 1) * x * out[j - 1] - (j - 1.0) * out[j - 2]) / j;
}

Barycentric::Barycentric(std::vector<double> nodes) : nodes_(std::move(nodes)), bw_(nodes_.size(), 1.0) {
    const std::size_t n = nodes_.size();
    // Scale by the node spread so that weights stay in range for large n.
    const double span = n > 1 ? (nodes_.back() - nodes_.front()) / 4 : 1;
    for (std::size_t j = 0; j < n; ++j) {
        double p = 1;
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) p *= (nodes_[j] - nodes_[k]) / span;
        bw_[j] = 1 / p;
    }
}

void Barycentric::weights_at(double x, double* c) const {
    const std::size_t n = nodes_.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (x == nodes_[j]) {
            std::fill(c, c + n, 0.0);
            c[j] = 1;
            return;
        }
    }
    double den = 0;
    for (std::size_t j = 0; j < n; ++j) {
        c[j] = bw_[j] / (x - nodes_[j]);
        den += c[j];
    }
    for (std::size_t j = 0; j < n; ++j) c[j] /= den;
}

double Barycentric::operator()(const double* values, double x) const {
    const std::size_t n = nodes_.size();
    double num = 0, den = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = x - nodes_[j];
        if (d == 0) return values[j];
        double t = bw_[j] / d;
        num += t * values[j];
        den += t;
    }
    return num / den;
}

PanelGrid::PanelGrid(std::vector<double> breaks, std::size_t order) : breaks_(std::move(breaks)), q_(order) {
    if (breaks_.size() < 2) throw std::invalid_argument("PanelGrid: need at least two break points");
    for (std::size_t k = 1; k < breaks_.size(); ++k)
        if (!(breaks_[k] > breaks_[k - 1])) throw std::invalid_argument("PanelGrid: break points must increase");
    const Rule& ref = gauss_legendre(q_);
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
        const double h = 0.5 * (breaks_[k + 1] - breaks_[k]), c = 0.5 * (breaks_[k + 1] + breaks_[k]);
        for (std::size_t i = 0; i < q_; ++i) {
            x_.push_back(c + h * ref.x[i]);
            w_.push_back(h * ref.w[i]);
        }
    }
    // S = J * Vinv with V_{jn} = P_n(x_j), Vinv = diag((2n+1)/2) V^T diag(w),
    // J_{jn} = int_{-1}^{x_j} P_n.
    std::vector<double> P(q_ + 1), V(q_ * q_), J(q_ * q_);
    for (std::size_t j = 0; j < q_; ++j) {
        legendre_values(ref.x[j], q_ + 1, P.data());
        for (std::size_t n = 0; n < q_; ++n) {
            V[j * q_ + n] = P[n];
            J[j * q_ + n] = n == 0 ? ref.x[j] + 1 : (P[n + 1] - P[n - 1]) / (2.0 * n + 1);
        }
    }
    S_.assign(q_ * q_, 0.0);
    for (std::size_t j = 0; j < q_; ++j)
        for (std::size_t k = 0; k < q_; ++k) {
            double s = 0;
            for (std::size_t n = 0; n < q_; ++n) s += J[j * q_ + n] * (2.0 * n + 1) / 2 * V[k * q_ + n] * ref.w[k];
            S_[j * q_ + k] = s;
        }
    ref_ = Barycentric(ref.x);
}

double PanelGrid::integrate(const std::vector<double>& f) const {
    double s = 0;
    for (std::size_t i = 0; i < x_.size(); ++i) s += w_[i] * f[i];
    return s;
}

std::vector<double> PanelGrid::cumulative(const std::vector<double>& f) const {
    std::vector<double> F(x_.size());
    double base = 0;
    for (std::size_t k = 0; k < panels(); ++k) {
        const double h = 0.5 * (breaks_[k + 1] - breaks_[k]);
        const double* fk = f.data() + k * q_;
        double total = 0;
        for (std::size_t j = 0; j < q_; ++j) {
            double s = 0;
            for (std::size_t i = 0; i < q_; ++i) s += S_[j * q_ + i] * fk[i];
            F[k * q_ + j] = base + h * s;
        }
        for (std::size_t i = 0; i < q_; ++i) total += w_[k * q_ + i] * fk[i];
        base += total;
    }
    return F;
}

std::vector<double> PanelGrid::cumulative_from_right(const std::vector<double>& f) const {
    std::vector<double> F = cumulative(f);
    const double total = integrate(f);
    for (double& v : F) v = total - v;
    return F;
}

std::vector<double> PanelGrid::cumulative_at_breaks(const std::vector<double>& f) const {
    std::vector<double> F(breaks_.size(), 0.0);
    for (std::size_t k = 0; k < panels(); ++k) {
        double s = 0;
        for (std::size_t i = 0; i < q_; ++i) s += w_[k * q_ + i] * f[k * q_ + i];
        F[k + 1] = F[k] + s;
    }
    return F;
}

std::size_t PanelGrid::panel_of(double x) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    if (it == breaks_.begin()) return 0;
    std::size_t k = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return std::min(k, panels() - 1);
}

double PanelGrid::interpolate(const std::vector<double>& f, double x) const {
    const std::size_t k = panel_of(x);
    const double h = 0.5 * (breaks_[k + 1] - breaks_[k]), c = 0.5 * (breaks_[k + 1] + breaks_[k]);
    return ref_(f.data() + k * q_, (x - c) / h);
}

std::vector<double> Chebyshev::lobatto_points(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) {
        double t = -std::cos(M_PI * j / (n - 1));
        x[j] = 0.5 * (a + b) + 0.5 * (b - a) * t;
    }
    return x;
}

Chebyshev Chebyshev::from_samples(const std::vector<double>& v, double a, double b) {
    const std::size_t n = v.size();
    if (n < 2) throw std::invalid_argument("Chebyshev: need at least two samples");
    Chebyshev c;
    c.a_ = a;
    c.b_ = b;
    c.c_.assign(n, 0.0);
    const std::size_t N = n - 1;
    // Samples are ordered by increasing x, i.e. t_j = -cos(pi j/N); T_k(t_j) = (-1)^k cos(pi j k/N).
    for (std::size_t k = 0; k <= N; ++k) {
        double s = 0;
        for (std::size_t j = 0; j <= N; ++j) {
            double f = (j == 0 || j == N) ? 0.5 : 1.0;
            s += f * v[j] * std::cos(M_PI * double(j * k % (2 * N)) / N);
        }
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        c.c_[k] = sign * s * 2.0 / N;
    }
    c.c_[0] *= 0.5;
    c.c_[N] *= 0.5;
    return c;
}

Chebyshev::Chebyshev(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    auto x = lobatto_points(a, b, n);
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = f(x[j]);
    *this = from_samples(v, a, b);
}

double Chebyshev::operator()(double x) const {
    const double t = (2 * x - a_ - b_) / (b_ - a_);
    double b1 = 0, b2 = 0;
    for (std::size_t k = c_.size(); k-- > 1;) {
        double b0 = 2 * t * b1 - b2 + c_[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + c_[0];
}

Chebyshev Chebyshev::integral() const {
    const std::size_t n = c_.size();
    Chebyshev r;
    r.a_ = a_;
    r.b_ = b_;
    r.c_.assign(n + 1, 0.0);
    const double h = 0.5 * (b_ - a_);
    auto cc = [&](std::size_t k) { return k < n ? c_[k] : 0.0; };
    for (std::size_t k = 1; k <= n; ++k) {
        double ckm1 = (k == 1) ? 2 * cc(0) : cc(k - 1);
        r.c_[k] = h * (ckm1 - cc(k + 1)) / (2.0 * k);
    }
    // Fix the constant so the antiderivative vanishes at a (t = -1).
    double s = 0;
    for (std::size_t k = 1; k <= n; ++k) s += r.c_[k] * ((k % 2 == 0) ? 1.0 : -1.0);
    r.c_[0] = -s;
    return r;
}

double Chebyshev::tail() const {
    const std::size_t n = c_.size();
    double m = 0, t = 0;
    for (double v : c_) m = std::max(m, std::abs(v));
    for (std::size_t k = n > 3 ? n - 3 : 0; k < n; ++k) t = std::max(t, std::abs(c_[k]));
    return m > 0 ? t / m : 0;
}

std::vector<double> periodic_diff_matrix(std::size_t N) {
    std::vector<double> D(N * N, 0.0);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = 0; k < N; ++k) {
            if (j == k) continue;
            const long d = long(j) - long(k);
            const double sgn = (std::labs(d) % 2 == 0) ? 1.0 : -1.0;
            const double arg = M_PI * double(d) / double(N);
            D[j * N + k] = (N % 2 == 0) ? M_PI * sgn / std::tan(arg) : M_PI * sgn / std::sin(arg);
        }
    return D;
}

std::vector<double> periodic_antideriv_matrix(std::size_t N) {
    std::vector<double> A(N * N, 0.0);
    const std::size_t K = (N - 1) / 2;
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t m = 0; m < N; ++m) {
            const double d = (double(j) - double(m)) / double(N);
            double s = 0;
            for (std::size_t k = 1; k <= K; ++k) s += std::sin(2 * M_PI * k * d) / double(k);
            A[j * N + m] = s / (M_PI * N);
        }
    return A;
}

}  // namespace evstab
