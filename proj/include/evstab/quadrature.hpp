#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace evstab {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre rule on [-1, 1]; cached per order.
const Rule& gauss_legendre(std::size_t n);

// Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(std::size_t n, double a, double b);

double integrate_gl(const std::function<double(double)>& f, double a, double b, std::size_t n);

// Legendre polynomials P_0..P_{n-1} at x in [-1, 1].
void legendre_values(double x, std::size_t n, double* out);

// Barycentric Lagrange interpolation on arbitrary distinct nodes.
class Barycentric {
public:
    Barycentric() = default;
    explicit Barycentric(std::vector<double> nodes);
    double operator()(const double* values, double x) const;
    // Fills weights c_j with p(x) = sum_j c_j values_j.
    void weights_at(double x, double* c) const;
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }

private:
    std::vector<double> nodes_;
    std::vector<double> bw_;
};

// Composite Gauss-Legendre on consecutive panels [b_k, b_{k+1}].
// Supports integrals, running integrals at every node, and in-panel interpolation.
class PanelGrid {
public:
    PanelGrid() = default;
    PanelGrid(std::vector<double> breaks, std::size_t order);

    std::size_t panels() const { return breaks_.size() - 1; }
    std::size_t order() const { return q_; }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& weights() const { return w_; }
    const std::vector<double>& breaks() const { return breaks_; }
    double a() const { return breaks_.front(); }
    double b() const { return breaks_.back(); }

    double integrate(const std::vector<double>& f) const;
    // F(x_i) = int_a^{x_i} f.
    std::vector<double> cumulative(const std::vector<double>& f) const;
    // F(x_i) = int_{x_i}^b f.
    std::vector<double> cumulative_from_right(const std::vector<double>& f) const;
    // int_a^{breaks[k]} f for every break point.
    std::vector<double> cumulative_at_breaks(const std::vector<double>& f) const;
    // Panel-local polynomial interpolation of nodal values.
    double interpolate(const std::vector<double>& f, double x) const;
    std::size_t panel_of(double x) const;

private:
    std::vector<double> breaks_;
    std::size_t q_ = 0;
    std::vector<double> x_, w_;
    std::vector<double> S_;  // q x q running-integral matrix on [-1, 1]
    Barycentric ref_;
};

// Chebyshev expansion on [a, b] built from samples at Chebyshev-Lobatto points.
class Chebyshev {
public:
    Chebyshev() = default;
    Chebyshev(const std::function<double(double)>& f, double a, double b, std::size_t n);
    static std::vector<double> lobatto_points(double a, double b, std::size_t n);
    static Chebyshev from_samples(const std::vector<double>& values, double a, double b);

    double operator()(double x) const;
    // Antiderivative vanishing at a.
    Chebyshev integral() const;
    double a() const { return a_; }
    double b() const { return b_; }
    const std::vector<double>& coeffs() const { return c_; }
    double tail() const;

private:
    double a_ = -1, b_ = 1;
    std::vector<double> c_;
};

// Periodic spectral differentiation matrix on N equispaced nodes theta_j = j/N in [0,1).
std::vector<double> periodic_diff_matrix(std::size_t N);
// Spectral zero-mean antiderivative matrix on the same nodes (Nyquist mode dropped for even N).
std::vector<double> periodic_antideriv_matrix(std::size_t N);

}  // namespace evstab
