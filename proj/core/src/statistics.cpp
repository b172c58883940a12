#include "piid/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "piid/construction.hpp"
#include "piid/errors.hpp"
#include "piid/format.hpp"

namespace piid {

// ---------------------------------------------------------------------------
// ECDF and KS

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> values)
    : sorted_(std::move(values)) {
    if (sorted_.empty()) throw EmptySampleError("EmpiricalDistribution: empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_distance(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf) {
    const std::vector<double>& v = emp.sorted_values();
    const double n = static_cast<double>(v.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;  // F^(x) - F(x)
        const double lo = f - static_cast<double>(i) / n;          // F(x) - F^(x-)
        worst = std::max({worst, std::fabs(hi), std::fabs(lo)});
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Exact enumeration

bool ExactPairLaw::marginals_exact() const {
    const std::int64_t expected = total / ell;  // ell^(m-1)
    return std::all_of(marginal_ones.begin(), marginal_ones.end(),
                       [expected](std::int64_t c) { return c == expected; });
}

bool ExactPairLaw::pairwise_exact() const {
    for (const PairJoint& p : pairs) {
        const std::int64_t lhs = total * p.count11;
        const std::int64_t rhs = marginal_ones[p.a - 1] * marginal_ones[p.b - 1];
        if (lhs != rhs) return false;
    }
    return true;
}

const TriangleJoint* ExactPairLaw::dependent_triple() const {
    for (const TriangleJoint& t : triangles) {
        // P(1,1,1) vs the product of the three marginals, cross-multiplied to
        // stay in integers: count111 * total^2 vs ell^(m-1)^3 / ... marginals
        // are ell^(m-1) each, so compare count111 * ell^2 against ell^(m-1).
        const std::int64_t count111 = t.counts[0b111];
        const std::int64_t lhs = count111 * total * total;
        const std::int64_t expected = total / ell;
        const std::int64_t rhs = expected * expected * expected;
        if (lhs != rhs) return &t;
    }
    return nullptr;
}

bool ExactPairLaw::has_dependent_triple() const { return dependent_triple() != nullptr; }

void ExactPairLaw::print(std::ostream& out) const {
    out << "exact enumeration: ell=" << ell << " m=" << m << " (" << total
        << " label sequences, n=" << n << " indicators)\n";
    const std::int64_t expected = total / ell;
    if (marginals_exact()) {
        out << "marginals: P(D_a = 1) = " << expected << "/" << total << " for every a\n";
    } else {
        for (std::size_t a = 0; a < marginal_ones.size(); ++a)
            out << "  P(D_" << a + 1 << " = 1) = " << marginal_ones[a] << "/" << total << "\n";
    }
    bool pairs_equal = true;
    for (const PairJoint& p : pairs)
        if (p.count11 != pairs.front().count11) pairs_equal = false;
    if (pairs_equal && !pairs.empty()) {
        out << "pairs: P(D_a = 1, D_b = 1) = " << pairs.front().count11 << "/" << total << " for all "
            << pairs.size() << " pairs";
    } else {
        out << "pairs:";
        for (const PairJoint& p : pairs)
            out << "\n  P(D_" << p.a << " = 1, D_" << p.b << " = 1) = " << p.count11 << "/" << total;
    }
    out << "\npairwise factorization ell^m * #{11} == #{1}*#{1}: "
        << (pairwise_exact() ? "exact" : "VIOLATED") << "\n";
    if (const TriangleJoint* t = dependent_triple()) {
        out << "dependent triple (D_" << t->i << t->j << ", D_" << t->i << t->k << ", D_" << t->j
            << t->k << "):\n";
        static const char* kLabels[8] = {"000", "001", "010", "011", "100", "101", "110", "111"};
        for (int c = 0; c < 8; ++c)
            out << "  P(" << kLabels[c] << ") = " << t->counts[c] << "/" << total << "\n";
        out << "  P(1,1,1) = " << t->counts[7] << "/" << total << " != product of marginals ("
            << expected << "/" << total << ")^3\n";
    }
}

ExactPairLaw enumerate_exact(int ell, int m) {
    if (ell < 2 || m < 2) throw std::invalid_argument("enumerate_exact: ell >= 2 and m >= 2");
    std::int64_t total = 1;
    for (int i = 0; i < m; ++i) {
        total *= ell;
        if (total > 1'000'000)
            throw TooLargeError("enumerate_exact: ell^m exceeds the 1e6 bound");
    }

    ExactPairLaw law;
    law.ell = ell;
    law.m = m;
    law.total = total;
    law.n = static_cast<std::int64_t>(m) * (m - 1) / 2;
    law.marginal_ones.assign(law.n, 0);
    law.pairs.reserve(law.n * (law.n - 1) / 2);
    for (std::int64_t a = 1; a <= law.n; ++a)
        for (std::int64_t b = a + 1; b <= law.n; ++b) law.pairs.push_back(PairJoint{a, b, 0});

    struct TrianglePos {
        int i, j, k;
        std::size_t ij, ik, jk;  // 0-based bit positions
    };
    std::vector<TrianglePos> tri_pos;
    for (int i = 1; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j)
            for (int k = j + 1; k <= m; ++k)
                tri_pos.push_back(TrianglePos{
                    i, j, k, static_cast<std::size_t>(pair_index(i, j, m) - 1),
                    static_cast<std::size_t>(pair_index(i, k, m) - 1),
                    static_cast<std::size_t>(pair_index(j, k, m) - 1)});
    law.triangles.resize(tri_pos.size());
    for (std::size_t t = 0; t < tri_pos.size(); ++t) {
        law.triangles[t].i = tri_pos[t].i;
        law.triangles[t].j = tri_pos[t].j;
        law.triangles[t].k = tri_pos[t].k;
    }

    std::vector<int> labels(m, 1);
    std::vector<std::uint8_t> bits(law.n);
    for (std::int64_t seq = 0; seq < total; ++seq) {
        std::size_t pos = 0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j, ++pos) bits[pos] = labels[i] == labels[j] ? 1 : 0;
        for (std::size_t a = 0; a < bits.size(); ++a) law.marginal_ones[a] += bits[a];
        std::size_t idx = 0;
        for (std::size_t a = 0; a < bits.size(); ++a)
            for (std::size_t b = a + 1; b < bits.size(); ++b, ++idx)
                law.pairs[idx].count11 += bits[a] & bits[b];
        for (std::size_t t = 0; t < tri_pos.size(); ++t) {
            const int cell =
                (bits[tri_pos[t].ij] << 2) | (bits[tri_pos[t].ik] << 1) | bits[tri_pos[t].jk];
            ++law.triangles[t].counts[cell];
        }
        // advance the base-ell odometer
        for (int d = m - 1; d >= 0; --d) {
            if (labels[d] < ell) {
                ++labels[d];
                break;
            }
            labels[d] = 1;
        }
    }
    return law;
}

// ---------------------------------------------------------------------------
// Monte-Carlo machinery

namespace {

// Run fn(i) for i in [0, total) on `workers` threads. fn must write to
// disjoint slots only; the partition never affects results.
void run_parallel(int total, int workers, const std::function<void(int)>& fn) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(1, total));
    if (workers == 1) {
        for (int i = 0; i < total; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const int chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn]() {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (std::thread& t : threads) t.join();
}

}  // namespace

Moments empirical_moments(std::span<const double> values) {
    if (values.empty()) throw EmptySampleError("empirical_moments: empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Moments out;
    out.mean = mean;
    out.var = m2;
    if (m2 > 0.0) {
        out.skew = m3 / std::pow(m2, 1.5);
        out.kurt = m4 / (m2 * m2);
    } else {
        out.skew = std::numeric_limits<double>::quiet_NaN();
        out.kurt = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("correlation: equal non-empty lengths required");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return sxy / std::sqrt(sxx * syy);
}

ConvergenceReport convergence_study(const SplitMargin& split, std::span<const int> m_grid,
                                    int reps, std::uint64_t master_seed, int workers) {
    if (reps < 100) throw std::invalid_argument("convergence_study: reps must be >= 100");
    if (m_grid.empty()) throw std::invalid_argument("convergence_study: empty m grid");
    for (std::size_t i = 1; i < m_grid.size(); ++i)
        if (m_grid[i] <= m_grid[i - 1])
            throw std::invalid_argument("convergence_study: m grid must be strictly increasing");

    ConvergenceReport report;
    report.ell = split.ell();
    report.r = r_of(split);
    report.master_seed = master_seed;
    const LimitLaw law(report.ell, report.r);

    for (std::size_t tier = 0; tier < m_grid.size(); ++tier) {
        const int m = m_grid[tier];
        std::vector<double> values(reps);
        run_parallel(reps, workers, [&](int rep) {
            RngStream rng = RngStream::derive(
                master_seed, (static_cast<std::uint64_t>(tier) << 40) | static_cast<std::uint64_t>(rep));
            const LabelSequence labels = draw_labels(split.ell(), m, rng);
            values[rep] = standardized_mean_streamed(labels, split, rng);
        });
        std::sort(values.begin(), values.end());
        const Moments mom = empirical_moments(values);
        EmpiricalDistribution emp(values);
        const double ks = ks_distance(emp, [&law](double s) { return law.cdf(s); });
        report.rows.push_back(ConvergenceRow{m, static_cast<std::int64_t>(m) * (m - 1) / 2, reps,
                                             ks, mom.skew, mom.kurt});
    }
    return report;
}

void ConvergenceReport::to_csv(std::ostream& out) const {
    out << "m,reps,ks,skew,kurt\n";
    for (const ConvergenceRow& row : rows)
        out << row.m << "," << row.reps << "," << fmt_double(row.ks) << ","
            << fmt_double(row.skew) << "," << fmt_double(row.kurt) << "\n";
}

nlohmann::json ConvergenceReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const ConvergenceRow& row : rows)
        rows_json.push_back({{"m", row.m},
                             {"n", row.n},
                             {"reps", row.reps},
                             {"ks", row.ks},
                             {"skew", row.skew},
                             {"kurt", row.kurt}});
    return {{"ell", ell}, {"r", r}, {"master_seed", master_seed}, {"rows", rows_json}};
}

std::vector<PairCorrelation> pairwise_correlation_check(
    const SplitMargin& split, int m, int reps,
    std::span<const std::pair<std::int64_t, std::int64_t>> pairs, std::uint64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(m) * (m - 1) / 2;
    for (const auto& [a, b] : pairs)
        if (a < 1 || b < 1 || a > n || b > n)
            throw std::invalid_argument("pairwise_correlation_check: index out of range");

    std::vector<std::vector<double>> xa(pairs.size()), xb(pairs.size());
    std::vector<std::vector<double>> da(pairs.size()), db(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        xa[p].resize(reps);
        xb[p].resize(reps);
        da[p].resize(reps);
        db[p].resize(reps);
    }
    for (int rep = 0; rep < reps; ++rep) {
        RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(rep));
        const LabelSequence labels = draw_labels(split.ell(), m, rng);
        const DependencySequence d = build_D(labels);
        const PairwiseSample sample = build_X(d, split, rng);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            xa[p][rep] = sample.x[pairs[p].first - 1];
            xb[p][rep] = sample.x[pairs[p].second - 1];
            da[p][rep] = d.bits[pairs[p].first - 1];
            db[p][rep] = d.bits[pairs[p].second - 1];
        }
    }
    std::vector<PairCorrelation> out(pairs.size());
    const double bound = 4.0 / std::sqrt(static_cast<double>(reps));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        out[p].a = pairs[p].first;
        out[p].b = pairs[p].second;
        out[p].x_correlation = correlation(xa[p], xb[p]);
        out[p].d_correlation = correlation(da[p], db[p]);
        out[p].bound = bound;
        out[p].within_bound = std::fabs(out[p].x_correlation) < bound &&
                              std::fabs(out[p].d_correlation) < bound;
    }
    return out;
}

}  // namespace piid
