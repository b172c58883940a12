#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "piid/construction.hpp"
#include "piid/errors.hpp"
#include "piid/statistics.hpp"
#include "piid/special_functions.hpp"

using namespace piid;

TEST_CASE("pair_index evaluates the closed form") {
    CHECK(pair_index(1, 2, 4) == 1);
    CHECK(pair_index(3, 4, 4) == 6);
    for (int m : {2, 5, 17}) CHECK(pair_index(1, m, m) == m - 1);
    CHECK_THROWS_AS(pair_index(2, 2, 4), IndexOrderError);
    CHECK_THROWS_AS(pair_index(3, 2, 4), IndexOrderError);
}

TEST_CASE("pair_index is a bijection onto {1..n} for m up to 100") {
    for (int m = 2; m <= 100; ++m) {
        std::set<std::int64_t> seen;
        for (int i = 1; i < m; ++i)
            for (int j = i + 1; j <= m; ++j) {
                const std::int64_t k = pair_index(i, j, m);
                CHECK(k >= 1);
                CHECK(k <= m * (m - 1) / 2);
                seen.insert(k);
            }
        CHECK(seen.size() == static_cast<std::size_t>(m) * (m - 1) / 2);
    }
}

TEST_CASE("draw_labels preconditions and ranges") {
    RngStream rng(1);
    CHECK_THROWS_AS(draw_labels(1, 4, rng), std::invalid_argument);
    CHECK_THROWS_AS(draw_labels(2, 1, rng), std::invalid_argument);
    const LabelSequence seq = draw_labels(3, 50, rng);
    CHECK(seq.m() == 50);
    for (auto label : seq.labels) {
        CHECK(label >= 1);
        CHECK(label <= 3);
    }
}

TEST_CASE("draw_labels is uniform over categories") {
    RngStream rng(77);
    const int reps = 100'000;
    std::int64_t count1 = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const LabelSequence seq = draw_labels(2, 4, rng);
        for (auto label : seq.labels) count1 += label == 1;
    }
    const double total = 4.0 * reps;
    const double se = std::sqrt(total * 0.25);
    CHECK(std::fabs(count1 - 0.5 * total) <= 4.0 * se);
}

TEST_CASE("label collision probability is 1/ell") {
    RngStream rng(78);
    const int reps = 100'000;
    int collisions = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const LabelSequence seq = draw_labels(3, 2, rng);
        collisions += seq.labels[0] == seq.labels[1];
    }
    const double q = 1.0 / 3.0;
    const double se = std::sqrt(reps * q * (1 - q));
    CHECK(std::fabs(collisions - reps * q) <= 4.0 * se);
}

TEST_CASE("build_D matches the indicator definition") {
    SUBCASE("labels (1,1,2)") {
        const LabelSequence seq{2, {1, 1, 2}};
        const DependencySequence d = build_D(seq);
        CHECK(d.bits == std::vector<std::uint8_t>{1, 0, 0});
    }
    SUBCASE("all labels equal") {
        const LabelSequence seq{2, {2, 2, 2, 2}};
        const DependencySequence d = build_D(seq);
        CHECK(d.bits == std::vector<std::uint8_t>(6, 1));
    }
    SUBCASE("all labels distinct") {
        const LabelSequence seq{3, {1, 2, 3}};
        const DependencySequence d = build_D(seq);
        CHECK(d.bits == std::vector<std::uint8_t>{0, 0, 0});
    }
}

TEST_CASE("count_ones closed form") {
    CHECK(count_ones_closed_form(CategoryCounts{{2, 2}}) == 2);
    CHECK(count_ones_closed_form(CategoryCounts{{4, 0}}) == 6);
    CHECK(count_ones_closed_form(CategoryCounts{{3, 1}}) == 3);
    // cross-check against a direct count for labels (1,1,2,2)
    const DependencySequence d = build_D(LabelSequence{2, {1, 1, 2, 2}});
    int direct = 0;
    for (auto bit : d.bits) direct += bit;
    CHECK(direct == 2);
}

TEST_CASE("count identity holds exactly for random label sequences") {
    RngStream rng(90210);
    for (int trial = 0; trial < 10'000; ++trial) {
        const int ell = 2 + static_cast<int>(rng.uniform01() * 5.0);
        const int m = 2 + static_cast<int>(rng.uniform01() * 199.0);
        const LabelSequence seq = draw_labels(ell, m, rng);
        const DependencySequence d = build_D(seq);
        std::int64_t direct = 0;
        for (auto bit : d.bits) direct += bit;
        CHECK(direct == count_ones_closed_form(tally(seq)));
    }
}

TEST_CASE("standardized count") {
    CHECK(standardized_count(CategoryCounts{{2, 2}}) ==
          doctest::Approx(-0.816496580927726).epsilon(1e-12));
    // maximal value at N = (m, 0, ..., 0)
    for (int ell : {2, 5}) {
        const int m = 12;
        CategoryCounts counts;
        counts.counts.assign(ell, 0);
        counts.counts[0] = m;
        const double n = m * (m - 1) / 2.0;
        const double q = 1.0 / ell;
        CHECK(standardized_count(counts) ==
              doctest::Approx(std::sqrt(n * (1 - q) / q)).epsilon(1e-12));
    }
}

TEST_CASE("build_X draws from the branch selected by each indicator") {
    const SplitMargin s = split(MarginSpec::normal(0.0, 1.0));
    RngStream rng(1234);
    SUBCASE("all-zero D gives U draws only") {
        DependencySequence d{4, std::vector<std::uint8_t>(6, 0)};
        double sum = 0.0;
        const int runs = 20'000;
        for (int run = 0; run < runs; ++run) {
            const PairwiseSample sample = build_X(d, s, rng);
            for (double x : sample.x) {
                CHECK(x < 0.0);
                sum += x;
            }
        }
        const double se = s.sigma_u() / std::sqrt(6.0 * runs);
        CHECK(std::fabs(sum / (6.0 * runs) - s.mu_u()) <= 4.0 * se);
    }
    SUBCASE("all-one D gives V draws only") {
        DependencySequence d{4, std::vector<std::uint8_t>(6, 1)};
        double sum = 0.0;
        const int runs = 20'000;
        for (int run = 0; run < runs; ++run) {
            const PairwiseSample sample = build_X(d, s, rng);
            for (double x : sample.x) {
                CHECK(x >= 0.0);
                sum += x;
            }
        }
        const double se = s.sigma_v() / std::sqrt(6.0 * runs);
        CHECK(std::fabs(sum / (6.0 * runs) - s.mu_v()) <= 4.0 * se);
    }
}

TEST_CASE("build_X is reproducible and consumes one draw per index") {
    const SplitMargin s = split(MarginSpec::log_normal(1.0));
    RngStream rng_a(5150), rng_b(5150);
    const LabelSequence labels = draw_labels(2, 30, rng_a);
    const LabelSequence labels_b = draw_labels(2, 30, rng_b);
    CHECK(labels.labels == labels_b.labels);
    const DependencySequence d = build_D(labels);
    const PairwiseSample xa = build_X(d, s, rng_a);
    const PairwiseSample xb = build_X(d, s, rng_b);
    CHECK(xa.x == xb.x);
}

TEST_CASE("streamed pipeline equals the materialized pipeline draw-for-draw") {
    const SplitMargin s = split(MarginSpec::normal(0.0, 1.0));
    for (std::uint64_t seed : {1ull, 99ull, 31415ull}) {
        RngStream rng_a = RngStream::derive(seed, 0);
        RngStream rng_b = RngStream::derive(seed, 0);
        const LabelSequence labels = draw_labels(2, 40, rng_a);
        const LabelSequence labels_b = draw_labels(2, 40, rng_b);
        const double materialized = standardized_mean(build_X(build_D(labels), s, rng_a));
        const double streamed = standardized_mean_streamed(labels_b, s, rng_b);
        CHECK(streamed == materialized);
    }
}

TEST_CASE("standardized mean basics") {
    const SplitMargin s = split(MarginSpec::normal(2.0, 3.0));
    PairwiseSample sample;
    sample.m = 4;
    sample.split = s;
    sample.x.assign(6, s.mean());
    CHECK(standardized_mean(sample) == 0.0);
    sample.m = 2;
    sample.x = {s.mean() + s.stddev()};
    CHECK(standardized_mean(sample) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("marginal law of X_1 is the declared margin F") {
    // pool X_1 over independent runs at m = 2 (n = 1) and compare against the
    // standard normal CDF
    const SplitMargin s = split(MarginSpec::normal(0.0, 1.0));
    RngStream rng(86753);
    const int runs = 1'000'000;
    std::vector<double> pooled(runs);
    for (int run = 0; run < runs; ++run) {
        const LabelSequence labels = draw_labels(2, 2, rng);
        const PairwiseSample sample = build_X(build_D(labels), s, rng);
        pooled[run] = sample.x[0];
    }
    const double ks =
        ks_distance(EmpiricalDistribution(std::move(pooled)), [](double x) { return norm_cdf(x); });
    CHECK(ks < 0.005);
}
