#include "piid/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "piid/quadrature.hpp"
#include "piid/special_functions.hpp"

namespace piid {

namespace {
constexpr double kBranchEps = 1e-12;   // |r| within this of 0 or 1 selects a degenerate branch
constexpr double kTailQ = 1e-14;       // chi-squared component truncation
constexpr double kEvalTol = 1e-10;     // absolute quadrature tolerance per evaluation
}  // namespace

LimitLaw::LimitLaw(int ell, double r) : ell_(ell), r_(r) {
    if (ell < 2) throw std::invalid_argument("LimitLaw: ell must be >= 2");
    if (!(std::fabs(r) <= 1.0)) throw std::invalid_argument("LimitLaw: |r| must be <= 1");
    nu_ = static_cast<double>(ell - 1);
    abs_r_ = std::fabs(r);
    gauss_sd_ = std::sqrt(std::max(0.0, 1.0 - r * r));
    chi_scale_ = abs_r_ / std::sqrt(2.0 * nu_);
    g_hi_ = chi2_quantile(1.0 - kTailQ, nu_);
    g_lo_ = nu_ <= 2.0 ? 0.0 : chi2_quantile(kTailQ, nu_);
    log_norm_ = std::lgamma(0.5 * nu_) + 0.5 * nu_ * 0.6931471805599453094;
    if (abs_r_ < kBranchEps)
        branch_ = Branch::gaussian;
    else if (abs_r_ > 1.0 - kBranchEps)
        branch_ = Branch::chi;
    else
        branch_ = Branch::mixed;
}

std::complex<double> LimitLaw::cf(double t) const {
    using namespace std::complex_literals;
    const std::complex<double> gauss = std::exp(-0.5 * (1.0 - r_ * r_) * t * t + 0.0i);
    const std::complex<double> shift = std::exp(-1.0i * t * r_ * std::sqrt(0.5 * nu_));
    const std::complex<double> base = 1.0 - 1.0i * t * r_ * std::sqrt(2.0 / nu_);
    // principal branch of base^(-nu/2); Re(base) = 1 > 0 so the branch cut is
    // never approached
    const std::complex<double> power = std::exp(-0.5 * nu_ * std::log(base));
    return gauss * shift * power;
}

double LimitLaw::support_min() const {
    if (branch_ == Branch::chi && r_ > 0.0) return -r_ * std::sqrt(0.5 * nu_);
    return -std::numeric_limits<double>::infinity();
}

// Chi-squared density evaluated inside the convolution integrals.
// g > 0 is guaranteed (quadrature nodes are interior).
static inline double chi2_density(double g, double nu, double log_norm) {
    if (nu == 2.0) return std::exp(-0.5 * g - log_norm);
    return std::exp((0.5 * nu - 1.0) * std::log(g) - 0.5 * g - log_norm);
}

// Initial panel layout for the convolution integrals. The Gaussian kernel is
// much narrower than the chi-squared range when |r| is close to 1, so its
// neighbourhood must appear among the initial breakpoints; a single first
// panel would under-sample it and mislead the error estimates.
std::vector<double> LimitLaw::integration_breakpoints(double s, bool u_space) const {
    const double lo = u_space ? 0.0 : g_lo_;
    const double hi = u_space ? std::sqrt(g_hi_) : g_hi_;
    std::vector<double> pts{lo, hi};
    auto add = [&](double x) {
        if (x > lo && x < hi) pts.push_back(x);
    };
    const double g_star = s / chi_scale_ + nu_;  // kernel centre in g
    const double dg = gauss_sd_ / chi_scale_;    // kernel width in g
    if (u_space) {
        for (double bulk : {0.8, 1.6, 3.0}) add(bulk);
        if (g_star > 0.0) {
            const double u_star = std::sqrt(g_star);
            const double du = dg / (2.0 * std::max(u_star, 0.3));
            for (double k : {-8.0, -3.0, -1.0, 1.0, 3.0, 8.0}) add(u_star + k * du);
        }
    } else {
        const double sd = std::sqrt(2.0 * nu_);
        for (double k : {-3.0, -1.0, 0.0, 1.0, 3.0}) add(nu_ + k * sd);
        for (double k : {-8.0, -3.0, -1.0, 1.0, 3.0, 8.0}) add(g_star + k * dg);
    }
    std::sort(pts.begin(), pts.end());
    return pts;
}

double LimitLaw::pdf_positive(double s) const {
    const double a = gauss_sd_;
    const double scale = chi_scale_;
    const double nu = nu_;
    const double log_norm = log_norm_;
    if (nu == 1.0) {
        // g = u^2 removes the chi2_1 edge singularity:
        // f_Gamma(u^2) 2u = sqrt(2/pi) exp(-u^2/2)
        auto integrand = [=](double u) {
            const double g = u * u;
            const double z = (s - scale * (g - nu)) / a;
            return 0.79788456080286535588 * std::exp(-0.5 * g) * norm_pdf(z) / a;
        };
        return integrate(integrand, integration_breakpoints(s, true), kEvalTol).value;
    }
    auto integrand = [=](double g) {
        const double z = (s - scale * (g - nu)) / a;
        return chi2_density(g, nu, log_norm) * norm_pdf(z) / a;
    };
    return integrate(integrand, integration_breakpoints(s, false), kEvalTol).value;
}

double LimitLaw::cdf_positive(double s) const {
    const double a = gauss_sd_;
    const double scale = chi_scale_;
    const double nu = nu_;
    const double log_norm = log_norm_;
    const double y_lo = chi_scale_ * (g_lo_ - nu_);
    const double y_hi = chi_scale_ * (g_hi_ - nu_);
    // Tail shortcuts keep the adaptive refinement off regions where the
    // integrand is uniformly negligible.
    const double upper_bound = norm_cdf((s - y_lo) / a);
    if (upper_bound < 1e-13) return upper_bound;
    const double sf_bound = norm_sf((s - y_hi) / a);
    if (sf_bound < 1e-13) return 1.0 - sf_bound;

    if (nu == 1.0) {
        auto integrand = [=](double u) {
            const double g = u * u;
            const double z = (s - scale * (g - nu)) / a;
            return 0.79788456080286535588 * std::exp(-0.5 * g) * norm_cdf(z);
        };
        return std::clamp(integrate(integrand, integration_breakpoints(s, true), kEvalTol).value,
                          0.0, 1.0);
    }
    auto integrand = [=](double g) {
        const double z = (s - scale * (g - nu)) / a;
        return chi2_density(g, nu, log_norm) * norm_cdf(z);
    };
    return std::clamp(integrate(integrand, integration_breakpoints(s, false), kEvalTol).value, 0.0,
                      1.0);
}

double LimitLaw::pdf(double s) const {
    switch (branch_) {
        case Branch::gaussian:
            return norm_pdf(s);
        case Branch::chi: {
            const double root = std::sqrt(2.0 * nu_);
            const double g = (r_ > 0.0 ? s : -s) * root + nu_;
            return chi2_pdf(g, nu_) * root;
        }
        case Branch::mixed:
            return pdf_positive(r_ > 0.0 ? s : -s);
    }
    return 0.0;
}

double LimitLaw::cdf(double s) const {
    switch (branch_) {
        case Branch::gaussian:
            return norm_cdf(s);
        case Branch::chi: {
            const double root = std::sqrt(2.0 * nu_);
            if (r_ > 0.0) return chi2_cdf(s * root + nu_, nu_);
            return 1.0 - chi2_cdf(-s * root + nu_, nu_);
        }
        case Branch::mixed:
            if (r_ > 0.0) return cdf_positive(s);
            return 1.0 - cdf_positive(-s);
    }
    return 0.0;
}

double LimitLaw::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("LimitLaw::quantile: p must be in (0, 1)");
    switch (branch_) {
        case Branch::gaussian:
            return norm_quantile(p);
        case Branch::chi: {
            const double root = std::sqrt(2.0 * nu_);
            if (r_ > 0.0) return (chi2_quantile(p, nu_) - nu_) / root;
            return -(chi2_quantile(1.0 - p, nu_) - nu_) / root;
        }
        case Branch::mixed:
            break;
    }
    // Bracket, then bisect until the CDF matches p to 1e-10.
    const double y_min = chi_scale_ * (g_lo_ - nu_) * (r_ > 0.0 ? 1.0 : -1.0);
    const double y_max = chi_scale_ * (g_hi_ - nu_) * (r_ > 0.0 ? 1.0 : -1.0);
    double lo = std::min(y_min, y_max) - 10.0 * gauss_sd_;
    double hi = std::max(y_min, y_max) + 10.0 * gauss_sd_;
    while (cdf(lo) > p) lo -= 8.0 * gauss_sd_;
    while (cdf(hi) < p) hi += 8.0 * gauss_sd_;
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double value = cdf(mid);
        if (std::fabs(value - p) <= 1e-10) return mid;
        if (value < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, std::fabs(mid))) break;
    }
    return mid;
}

std::vector<double> LimitLaw::sample(RngStream& rng, std::size_t count) const {
    std::vector<double> out(count);
    std::normal_distribution<double> gauss;
    std::chi_squared_distribution<double> chi2(nu_);
    const double root = std::sqrt(2.0 * nu_);
    for (std::size_t i = 0; i < count; ++i) {
        const double z = gauss(rng.engine());
        const double gamma = chi2(rng.engine());
        out[i] = gauss_sd_ * z + r_ * (gamma - nu_) / root;
    }
    return out;
}

LawMoments LimitLaw::moments() const {
    const double r2 = r_ * r_;
    return LawMoments{0.0, 1.0, std::sqrt(8.0 / nu_) * r2 * r_, 3.0 + 12.0 * r2 * r2 / nu_};
}

double LimitLaw::gaussian_distance() const {
    if (branch_ == Branch::gaussian) return 0.0;
    double worst = 0.0;
    for (int i = -8000; i <= 8000; ++i) {
        const double s = i * 1e-3;
        worst = std::max(worst, std::fabs(cdf(s) - norm_cdf(s)));
    }
    return worst;
}

}  // namespace piid
