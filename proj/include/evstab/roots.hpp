#pragma once

#include <boost/math/tools/roots.hpp>
#include <cstdint>
#include <stdexcept>

namespace evstab {

// Bracketed root by TOMS 748; f(a) and f(b) must differ in sign.
template <class F>
double bracketed_root(F&& f, double a, double b, double fa, double fb, int bits = 52) {
    if (fa == 0) return a;
    if (fb == 0) return b;
    if ((fa > 0) == (fb > 0)) throw std::runtime_error("bracketed_root: no sign change");
    std::uintmax_t it = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(bits);
    auto res = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
    return 0.5 * (res.first + res.second);
}

template <class F>
double bracketed_root(F&& f, double a, double b, int bits = 52) {
    return bracketed_root(f, a, b, f(a), f(b), bits);
}

}  // namespace evstab
