#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace evstab {

// Dormand-Prince 5(4) with the standard 4th-order continuous extension.
template <std::size_t N>
class DormandPrince {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<State(double, const State&)>;

    struct Step {
        double t0, h;
        State y0;
        std::array<State, 5> rc;  // dense-output coefficients
    };

    struct Options {
        double rtol = 1e-10;
        double atol = 1e-14;
        double h0 = 0;
        double hmax = 0;
        std::size_t max_steps = 200000;
    };

    DormandPrince(Rhs f, Options opt) : f_(std::move(f)), opt_(opt) {}

    // Integrates from t0 to t1 (t1 > t0). `stop` is checked after every accepted
    // step; returning true ends the integration early.
    void integrate(double t0, const State& y0, double t1,
                   const std::function<bool(const Step&)>& stop = nullptr) {
        double t = t0;
        State y = y0;
        double h = opt_.h0 > 0 ? opt_.h0 : initial_step(t0, y0, t1);
        State k1 = f_(t, y);
        std::size_t n = 0;
        while (t < t1) {
            if (++n > opt_.max_steps) throw std::runtime_error("DormandPrince: step limit exceeded");
            if (opt_.hmax > 0) h = std::min(h, opt_.hmax);
            bool last = false;
            if (t + h >= t1) {
                h = t1 - t;
                last = true;
            }
            State k2, k3, k4, k5, k6, k7, yt, ynew;
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (a21 * k1[i]);
            k2 = f_(t + c2 * h, yt);
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            k3 = f_(t + c3 * h, yt);
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = f_(t + c4 * h, yt);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            k5 = f_(t + c5 * h, yt);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            k6 = f_(t + h, yt);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            k7 = f_(t + h, ynew);
            double err = 0;
            for (std::size_t i = 0; i < N; ++i) {
                double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double sc = opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / N);
            if (!std::isfinite(err)) {
                h *= 0.25;
                if (h < 1e-15 * std::max(1.0, std::abs(t))) throw std::runtime_error("DormandPrince: non-finite state");
                continue;
            }
            if (err <= 1) {
                Step s;
                s.t0 = t;
                s.h = h;
                s.y0 = y;
                for (std::size_t i = 0; i < N; ++i) {
                    double ydiff = ynew[i] - y[i];
                    double bspl = h * k1[i] - ydiff;
                    s.rc[0][i] = y[i];
                    s.rc[1][i] = ydiff;
                    s.rc[2][i] = bspl;
                    s.rc[3][i] = ydiff - h * k7[i] - bspl;
                    s.rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                steps_.push_back(s);
                t = last ? t1 : t + h;
                y = ynew;
                k1 = k7;
                if (stop && stop(steps_.back())) break;
                double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                h *= std::clamp(fac, 0.2, 5.0);
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
            if (h < 1e-15 * std::max(1.0, std::abs(t))) throw std::runtime_error("DormandPrince: step size underflow");
        }
        t_end_ = t;
        y_end_ = y;
    }

    static State dense(const Step& s, double t) {
        const double th = (t - s.t0) / s.h, th1 = 1 - th;
        State y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = s.rc[0][i] + th * (s.rc[1][i] + th1 * (s.rc[2][i] + th * (s.rc[3][i] + th1 * s.rc[4][i])));
        return y;
    }

    const std::vector<Step>& steps() const { return steps_; }
    double t_end() const { return t_end_; }
    const State& y_end() const { return y_end_; }

private:
    double initial_step(double t0, const State& y0, double t1) const {
        State f0 = f_(t0, y0);
        double d0 = 0, d1v = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double sc = opt_.atol + opt_.rtol * std::abs(y0[i]);
            d0 += (y0[i] / sc) * (y0[i] / sc);
            d1v += (f0[i] / sc) * (f0[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1v = std::sqrt(d1v / N);
        double h = (d0 < 1e-5 || d1v < 1e-5) ? 1e-6 : 0.01 * d0 / d1v;
        return std::min(h, 0.01 * (t1 - t0));
    }

    Rhs f_;
    Options opt_;
    std::vector<Step> steps_;
    double t_end_ = 0;
    State y_end_{};

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

// Piecewise dense solution assembled from accepted steps.
template <std::size_t N>
class DenseSolution {
public:
    using Step = typename DormandPrince<N>::Step;
    using State = std::array<double, N>;

    DenseSolution() = default;
    explicit DenseSolution(std::vector<Step> steps) : steps_(std::move(steps)) {}

    bool empty() const { return steps_.empty(); }
    double t_begin() const { return steps_.front().t0; }
    double t_end() const { return steps_.back().t0 + steps_.back().h; }
    State operator()(double t) const {
        auto it = std::upper_bound(steps_.begin(), steps_.end(), t, [](double v, const Step& s) { return v < s.t0; });
        if (it != steps_.begin()) --it;
        return DormandPrince<N>::dense(*it, std::clamp(t, it->t0, it->t0 + it->h));
    }
    const std::vector<Step>& steps() const { return steps_; }
    void append(const std::vector<Step>& more) { steps_.insert(steps_.end(), more.begin(), more.end()); }
    void truncate_after(double t) {
        while (!steps_.empty() && steps_.back().t0 >= t) steps_.pop_back();
    }

private:
    std::vector<Step> steps_;
};

}  // namespace evstab
