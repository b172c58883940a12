#pragma once

namespace piid {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF, accurate in both tails.
double norm_cdf(double x);

/// Standard normal survival function 1 - Phi(x).
double norm_sf(double x);

/// Standard normal quantile (Wichura's PPND16 / AS 241), |error| < 1e-15.
/// Requires p in (0, 1).
double norm_quantile(double p);

/// Chi-squared density with nu degrees of freedom; 0 for x < 0.
double chi2_pdf(double x, double nu);

/// Chi-squared CDF (regularized lower incomplete gamma).
double chi2_cdf(double x, double nu);

/// Chi-squared quantile. Requires p in [0, 1).
double chi2_quantile(double p, double nu);

}  // namespace piid
