#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "piid/rng.hpp"

namespace piid {

struct LawMoments {
    double mean;
    double variance;
    double third_central;
    double fourth_central;
    double skewness() const { return third_central; }       // variance is 1
    double kurtosis() const { return fourth_central; }
};

/// The two-parameter limit law
///
///     S = sqrt(1 - r^2) Z + r chi,
///
/// where Z is standard normal and chi is an independent standardized
/// chi-squared with ell-1 degrees of freedom. r = 0 is the standard normal;
/// |r| = 1 is the (possibly reflected) standardized chi-squared itself.
///
/// The density and CDF have no closed form in between; they are computed by
/// adaptive Gauss-Kronrod quadrature of the convolution of the normal kernel
/// against the chi-squared component, truncated at its 1e-14 and 1 - 1e-14
/// quantiles, to absolute tolerance 1e-10 per evaluation. For ell = 2 the
/// chi-squared density is unbounded at its left support edge; that endpoint
/// is removed by the substitution g = u^2, under which the integrand is
/// smooth. Instances are immutable and all evaluators are safe to call
/// concurrently.
class LimitLaw {
public:
    /// Requires ell >= 2 and |r| <= 1.
    LimitLaw(int ell, double r);

    int ell() const { return ell_; }
    double r() const { return r_; }

    /// Characteristic function
    /// e^{-(1-r^2)t^2/2} e^{-i t r sqrt((ell-1)/2)} (1 - i t r sqrt(2/(ell-1)))^{-(ell-1)/2},
    /// principal branch.
    std::complex<double> cf(double t) const;

    double pdf(double s) const;
    double cdf(double s) const;

    /// Inverse CDF by bracketed root-finding: |cdf(result) - p| <= 1e-10.
    /// Requires p in (0, 1); throws std::domain_error otherwise.
    double quantile(double p) const;

    /// count i.i.d. draws of sqrt(1-r^2) Z + r (Gamma - (ell-1))/sqrt(2(ell-1)).
    std::vector<double> sample(RngStream& rng, std::size_t count) const;

    /// (0, 1, sqrt(8/(ell-1)) r^3, 3 + 12 r^4/(ell-1)).
    LawMoments moments() const;

    /// sup |cdf - Phi| over the fixed grid [-8, 8] with step 1e-3.
    double gaussian_distance() const;

    /// Left support endpoint: -r sqrt((ell-1)/2) when r = 1 (finite only for
    /// the pure chi-squared branch), -infinity otherwise.
    double support_min() const;

private:
    enum class Branch { gaussian, chi, mixed };

    double pdf_positive(double s) const;  // branch for r > 0
    double cdf_positive(double s) const;
    std::vector<double> integration_breakpoints(double s, bool u_space) const;

    int ell_;
    double r_;
    double nu_;          // ell - 1
    double abs_r_;
    double gauss_sd_;    // sqrt(1 - r^2)
    double chi_scale_;   // |r| / sqrt(2 nu): maps (g - nu) to the rchi component
    double g_hi_;        // chi-squared upper truncation quantile
    double g_lo_;        // lower truncation quantile (0 for nu <= 2)
    double log_norm_;    // log of the chi-squared density normalization
    Branch branch_;
};

}  // namespace piid
