#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "piid/rng.hpp"

namespace piid {

/// Half-open interval [lo, hi). A degenerate interval (lo == hi) denotes the
/// single point {lo}; that is how finite point sets are encoded.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo == hi ? x == lo : (x >= lo && x < hi); }
    bool is_point() const { return lo == hi; }
};

/// A finite union of disjoint half-open intervals (and/or points), kept
/// sorted by left endpoint.
class BorelSet {
public:
    BorelSet() = default;
    explicit BorelSet(std::vector<Interval> parts);

    static BorelSet points(std::span<const double> atoms);
    static BorelSet interval(double lo, double hi);

    bool contains(double x) const;
    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }

private:
    std::vector<Interval> parts_;
};

enum class MarginKind {
    TwoPointExtreme,     // P(W=1) = 1/ell, P(W=-1) = 1 - 1/ell, A = {1};      r = 1
    SymmetricFourPoint,  // W in {-2,-1,1,2}, A = {-1,1};                      r = 0
    SymmetricUniform,    // W ~ Uniform[-1,1], A = [-1/ell, 1/ell);            r = 0
    GaussianMixture,     // two-component normal mixture, A = [w_ell, inf)
    Normal,              // W ~ N(mu, sigma^2), A = [mu, inf), ell = 2;        r = sqrt(2/pi)
    LogNormal,           // log W ~ N(0, beta), A = [1, inf), ell = 2
    Custom,
};

/// Custom margin given by a density and a sampler (programmatic only; not
/// serializable). The support bounds may be infinite; they bound the
/// numerical quadrature used for moments and for P(W in A).
struct CustomDensityMargin {
    std::function<double(double)> density;
    std::function<double(RngStream&)> sampler;
    double support_lo = -std::numeric_limits<double>::infinity();
    double support_hi = std::numeric_limits<double>::infinity();
    BorelSet set_a;
    int ell = 2;
};

/// Custom margin with finitely many atoms. Serializable.
struct CustomDiscreteMargin {
    std::vector<double> atoms;    // strictly increasing
    std::vector<double> weights;  // positive, summing to 1
    BorelSet set_a;
    int ell = 2;
};

struct TwoPointParams { int ell = 2; };
struct FourPointParams { int ell = 2; };
struct UniformParams { int ell = 2; };
struct GaussianMixtureParams { int ell = 2; double sigma = 0.1; };
struct NormalParams { double mu = 0.0; double sigma = 1.0; };
struct LogNormalParams { double beta = 1.0; };

/// Declarative description of a margin F together with the conditioning set A
/// and the integer ell with P(W in A) = 1/ell.
class MarginSpec {
public:
    static MarginSpec two_point_extreme(int ell);
    static MarginSpec symmetric_four_point(int ell);
    static MarginSpec symmetric_uniform(int ell);
    static MarginSpec gaussian_mixture(int ell, double sigma);
    static MarginSpec normal(double mu, double sigma);
    static MarginSpec log_normal(double beta);
    static MarginSpec custom(CustomDensityMargin margin);
    static MarginSpec custom(CustomDiscreteMargin margin);

    MarginKind kind() const { return kind_; }
    int ell() const;

    /// Short human-readable form, e.g. "normal(mu=0,sigma=1)".
    std::string describe() const;

    /// JSON form {"kind": ..., "params": {...}}. Throws std::invalid_argument
    /// for density-based custom margins, which are not serializable.
    nlohmann::json to_json() const;
    static MarginSpec from_json(const nlohmann::json& doc);

    template <class T>
    const T& params() const { return std::get<T>(params_); }

    template <class T>
    const T* params_if() const { return std::get_if<T>(&params_); }

private:
    using Params = std::variant<TwoPointParams, FourPointParams, UniformParams,
                                GaussianMixtureParams, NormalParams, LogNormalParams,
                                CustomDensityMargin, CustomDiscreteMargin>;
    MarginSpec(MarginKind kind, Params params) : kind_(kind), params_(std::move(params)) {}

    MarginKind kind_;
    Params params_;
};

struct SplitMarginInit {
    int ell = 2;
    double mu_u = 0, mu_v = 0, sigma_u = 0, sigma_v = 0, mu = 0, sigma = 0;
    BorelSet set_a;
    std::function<double(RngStream&)> sample_u, sample_v;
};

/// Operational form of a margin: the truncated laws U = W | A^c and
/// V = W | A with their moment bundle and exact conditional samplers.
///
/// Immutable after construction and safe to share across workers; samplers
/// draw from a caller-supplied stream and keep no mutable state.
class SplitMargin {
public:
    SplitMargin() = default;
    /// Assembles a split margin from its moment bundle; r is derived from the
    /// moments. Throws ZeroVarianceError unless sigma > 0. Normally obtained
    /// via split(), but custom splits can be assembled directly.
    explicit SplitMargin(SplitMarginInit init);

    int ell() const { return ell_; }
    double mu_u() const { return mu_u_; }
    double mu_v() const { return mu_v_; }
    double sigma_u() const { return sigma_u_; }
    double sigma_v() const { return sigma_v_; }
    double mean() const { return mu_; }
    double stddev() const { return sigma_; }
    double r() const { return r_; }

    /// Draw from W | A^c. Every value lies outside A.
    double sample_u(RngStream& rng) const { return sample_u_(rng); }
    /// Draw from W | A. Every value lies in A.
    double sample_v(RngStream& rng) const { return sample_v_(rng); }
    /// Draw from the unconditional margin F (mixture of the two branches).
    double sample_w(RngStream& rng) const;

    bool in_a(double x) const { return set_a_.contains(x); }
    const BorelSet& set_a() const { return set_a_; }

private:
    int ell_ = 2;
    double mu_u_ = 0, mu_v_ = 0, sigma_u_ = 0, sigma_v_ = 0, mu_ = 0, sigma_ = 0, r_ = 0;
    BorelSet set_a_;
    std::function<double(RngStream&)> sample_u_, sample_v_;
};

enum class ValidationCode {
    NonIntegerReciprocal,  // P(W in A) != 1/ell beyond tolerance
    NonFiniteVariance,
    ZeroVariance,
    BadParameters,
};

struct ValidationFinding {
    ValidationCode code;
    std::string detail;
};

struct ValidationReport {
    double prob_a = 0.0;         // P(W in A), analytic or by quadrature
    double prob_a_target = 0.0;  // 1/ell
    bool prob_a_ok = false;
    bool variance_finite = false;
    double mu_u = 0.0;
    double mu_v = 0.0;
    /// mu_U == mu_V within tolerance: the limit is Gaussian (r = 0). This is
    /// informational, not an error.
    bool r_zero = false;
    std::vector<ValidationFinding> findings;

    bool ok() const { return findings.empty(); }
    bool has(ValidationCode code) const;
};

/// Residuals of the three weight conditions
///   (1) sum p_i = 1, (2) sum p_i^2 = w, (3) sum p_i^3 = w^2.
/// The uniform vector p_i = 1/ell is the only solution of all three.
struct ConditionReport {
    double sum_residual = 0.0;
    double square_residual = 0.0;
    double cube_residual = 0.0;
    bool all_hold(double tol = 1e-12) const {
        return sum_residual <= tol && square_residual <= tol && cube_residual <= tol;
    }
};

// Tolerances fixed by design: Custom P(W in A) must match 1/ell within
// tau_a; mu_U == mu_V within tau_eq flags the r = 0 (CLT holds) case.
inline constexpr double kTauA = 1e-9;
inline constexpr double kTauEq = 1e-12;

/// Split a margin into its truncated laws. Moments are closed-form for
/// built-ins, numeric (quadrature / exact summation) for customs.
/// Throws NonIntegerReciprocalError or ZeroVarianceError.
SplitMargin split(const MarginSpec& spec);

/// Report-only validation; never throws on margin defects.
ValidationReport validate(const MarginSpec& spec);

/// The shape parameter r = sqrt((1/ell)(1-1/ell)) (mu_V - mu_U) / sigma.
/// Asserts that the equivalent form (mu_V - mu) / (sigma sqrt(ell-1)) agrees.
double r_of(const SplitMargin& split);

/// Evaluate the three weight conditions for a probability vector and w.
/// Requires every p_i in (0, 1).
ConditionReport check_weight_conditions(std::span<const double> p, double w);

}  // namespace piid
