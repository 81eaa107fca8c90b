#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "trapdet/error.hpp"

namespace trapdet::quad {

struct Options {
    double target_rel = 1e-10;   // refinement stops once reached
    double required_rel = 1e-8;  // error above this (relative to the L1 norm) throws
    unsigned max_depth = 20;
    double abs_floor = 0.0;      // errors below this are always accepted
};

struct Result {
    double value;
    double error;
    double l1;
};

//! Adaptive Gauss-Kronrod (7/15) on [a, b].
template <class F>
Result integrate(F&& f, double a, double b, Options const& opt = {}) {
    if (a == b) return {0.0, 0.0, 0.0};
    double error = 0.0;
    double l1 = 0.0;
    double const value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, opt.max_depth, opt.target_rel, &error, &l1);
    if (!std::isfinite(value) || error > std::max(opt.required_rel * l1, opt.abs_floor)) {
        std::ostringstream os;
        os << "quadrature on [" << a << ", " << b << "] did not converge: estimate " << value << ", error "
           << error << ", required relative tolerance " << opt.required_rel;
        throw QuadratureError(os.str(), value, error);
    }
    return {value, error, l1};
}

}  // namespace trapdet::quad
