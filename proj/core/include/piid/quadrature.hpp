#pragma once

#include <functional>
#include <span>

namespace piid {

struct IntegrationResult {
    double value = 0.0;
    double abs_error = 0.0;  // estimated
};

/// Adaptive Gauss-Kronrod integration of f over [a, b] to an absolute
/// tolerance. Either bound may be infinite. The integrand is evaluated at
/// interior nodes only, so integrable endpoint singularities are tolerated;
/// callers should still split the domain at known interior singularities.
IntegrationResult integrate(const std::function<double(double)>& f, double a, double b,
                            double abs_tol = 1e-10);

/// As above over [front, back] of a sorted breakpoint list, with the initial
/// panels split at the interior breakpoints. Narrow features (sharp peaks,
/// steps) must be covered by breakpoints or the first-pass error estimates
/// can miss them entirely.
IntegrationResult integrate(const std::function<double(double)>& f,
                            std::span<const double> breakpoints, double abs_tol = 1e-10);

}  // namespace piid
