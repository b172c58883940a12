#pragma once

#include <cmath>

#include "piid/limit_law.hpp"
#include "piid/quadrature.hpp"

namespace piid::testing {

// Total mass of a law's density over [lo, hi]. The pure chi-squared branch at
// ell = 2 is unbounded at its left support edge; substituting s = edge + t^2
// there makes the integrand bounded so ordinary quadrature applies.
inline double pdf_mass(const piid::LimitLaw& law, double lo, double hi, double tol = 1e-9) {
    const double edge = law.support_min();
    if (!std::isfinite(edge)) {
        return piid::integrate([&law](double s) { return law.pdf(s); }, lo, hi, tol).value;
    }
    const double near =
        piid::integrate([&law, edge](double t) { return 2.0 * t * law.pdf(edge + t * t); }, 0.0,
                        1.0, tol)
            .value;
    const double far =
        piid::integrate([&law](double s) { return law.pdf(s); }, edge + 1.0, hi, tol).value;
    return near + far;
}

}  // namespace piid::testing
