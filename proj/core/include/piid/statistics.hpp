#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "piid/limit_law.hpp"
#include "piid/margins.hpp"

namespace piid {

/// Sorted sample with the usual right-continuous ECDF.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> values);  // throws EmptySampleError
    double operator()(double x) const;
    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted_values() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

/// Two-sided Kolmogorov-Smirnov distance between an ECDF and a CDF:
/// sup over sample points of max(|F^(x) - F(x)|, |F^(x-) - F(x)|).
double ks_distance(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf);

struct PairJoint {
    std::int64_t a = 0, b = 0;  // D-indices, 1-based, a < b
    std::int64_t count11 = 0;   // #{D_a = 1 and D_b = 1}
};

/// Joint 3-bit histogram of a triangle (D_ij, D_ik, D_jk); counts indexed by
/// (d_ij << 2) | (d_ik << 1) | d_jk.
struct TriangleJoint {
    int i = 0, j = 0, k = 0;
    std::array<std::int64_t, 8> counts{};
};

/// Exact joint law of the indicator sequence, as integer counts over all
/// ell^m equiprobable label sequences. Pairs cover every a < b; triples cover
/// every triangle (i,j), (i,k), (j,k) -- the only triples that can violate
/// product factorization, and the witnesses that the sequence is not mutually
/// independent.
struct ExactPairLaw {
    int ell = 0;
    int m = 0;
    std::int64_t n = 0;      // m(m-1)/2
    std::int64_t total = 0;  // ell^m
    std::vector<std::int64_t> marginal_ones;  // size n; #{D_a = 1}
    std::vector<PairJoint> pairs;
    std::vector<TriangleJoint> triangles;

    /// Every marginal count equals ell^(m-1) exactly.
    bool marginals_exact() const;
    /// total * count11 == marginal_a * marginal_b for every pair, exactly.
    bool pairwise_exact() const;
    /// Some triangle violates the product law (always true for m >= 3):
    /// equality of labels is transitive, so #{(1,1,0)} = 0.
    bool has_dependent_triple() const;
    /// A triangle whose (1,1,1) count differs from the product of marginals.
    const TriangleJoint* dependent_triple() const;

    void print(std::ostream& out) const;  // exact fractions over ell^m
};

/// Exhaustive enumeration oracle. Requires ell^m <= 1e6 (throws TooLargeError).
ExactPairLaw enumerate_exact(int ell, int m);

struct ConvergenceRow {
    int m = 0;
    std::int64_t n = 0;
    int reps = 0;
    double ks = 0.0;
    double skew = 0.0;
    double kurt = 0.0;
};

struct ConvergenceReport {
    int ell = 0;
    double r = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<ConvergenceRow> rows;

    void to_csv(std::ostream& out) const;  // header m,reps,ks,skew,kurt
    nlohmann::json to_json() const;
};

/// Full-pipeline convergence study: for each m, generate `reps` independent
/// values of S_n (labels -> D -> X -> standardized mean), then report the KS
/// distance to LimitLaw(ell, r) plus empirical skewness and kurtosis.
///
/// Replication i of tier t uses the derived stream (master_seed, t << 40 | i),
/// so reports are bit-identical across runs and worker counts. workers = 0
/// means hardware concurrency.
ConvergenceReport convergence_study(const SplitMargin& split, std::span<const int> m_grid,
                                    int reps, std::uint64_t master_seed, int workers = 0);

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double skew = 0.0;  // NaN when var == 0
    double kurt = 0.0;  // NaN when var == 0
};

/// Central-moment estimators with population (1/n) normalization.
/// Requires a non-empty sample.
Moments empirical_moments(std::span<const double> values);

/// Pearson correlation of two equal-length samples.
double correlation(std::span<const double> x, std::span<const double> y);

struct PairCorrelation {
    std::int64_t a = 0, b = 0;
    double x_correlation = 0.0;
    double d_correlation = 0.0;
    double bound = 0.0;  // 4 / sqrt(reps)
    bool within_bound = false;
};

/// Sample correlations of (X_a, X_b) and (D_a, D_b) across `reps`
/// replications of the construction at size m, flagged against 4/sqrt(reps).
std::vector<PairCorrelation> pairwise_correlation_check(
    const SplitMargin& split, int m, int reps,
    std::span<const std::pair<std::int64_t, std::int64_t>> pairs, std::uint64_t seed);

}  // namespace piid
