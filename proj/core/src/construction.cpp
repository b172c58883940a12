#include "piid/construction.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "piid/errors.hpp"

namespace piid {

std::int64_t CategoryCounts::m() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

LabelSequence draw_labels(int ell, int m, RngStream& rng) {
    if (ell < 2) throw std::invalid_argument("draw_labels: ell must be >= 2");
    if (m < 2) throw std::invalid_argument("draw_labels: m must be >= 2");
    LabelSequence seq;
    seq.ell = ell;
    seq.labels.resize(m);
    for (int j = 0; j < m; ++j) seq.labels[j] = static_cast<std::int32_t>(rng.uniform_label(ell));
    return seq;
}

std::int64_t pair_index(std::int64_t i, std::int64_t j, std::int64_t m) {
    if (i >= j) throw IndexOrderError("pair_index: requires i < j");
    if (i < 1 || j > m) throw std::invalid_argument("pair_index: requires 1 <= i < j <= m");
    return (i * (2 * m - 1) - i * i) / 2 + j - m;
}

DependencySequence build_D(const LabelSequence& labels) {
    const int m = labels.m();
    DependencySequence d;
    d.m = m;
    d.bits.resize(static_cast<std::size_t>(m) * (m - 1) / 2);
    std::size_t k = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j, ++k)
            d.bits[k] = labels.labels[i] == labels.labels[j] ? 1 : 0;
    return d;
}

CategoryCounts tally(const LabelSequence& labels) {
    CategoryCounts counts;
    counts.counts.assign(labels.ell, 0);
    for (std::int32_t label : labels.labels) ++counts.counts[label - 1];
    return counts;
}

std::int64_t count_ones_closed_form(const CategoryCounts& counts) {
    std::int64_t total = 0;
    for (std::int64_t n_i : counts.counts) total += n_i * (n_i - 1) / 2;
    return total;
}

double standardized_count(const CategoryCounts& counts) {
    const double q = 1.0 / counts.ell();
    const std::int64_t m = counts.m();
    const double n = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
    const double p = static_cast<double>(count_ones_closed_form(counts));
    return (p - n * q) / std::sqrt(n * q * (1.0 - q));
}

PairwiseSample build_X(const DependencySequence& d, const SplitMargin& split, RngStream& rng) {
    PairwiseSample sample;
    sample.m = d.m;
    sample.split = split;
    sample.x.resize(d.bits.size());
    for (std::size_t k = 0; k < d.bits.size(); ++k)
        sample.x[k] = d.bits[k] ? split.sample_v(rng) : split.sample_u(rng);
    return sample;
}

double standardized_mean(const PairwiseSample& sample) {
    const double sigma = sample.split.stddev();
    if (!(sigma > 0.0)) throw ZeroVarianceError("standardized_mean: sigma must be positive");
    const double n = static_cast<double>(sample.n());
    double sum = 0.0;
    for (double v : sample.x) sum += v;
    return (sum - sample.split.mean() * n) / (sigma * std::sqrt(n));
}

double standardized_mean_streamed(const LabelSequence& labels, const SplitMargin& split,
                                  RngStream& rng) {
    const double sigma = split.stddev();
    if (!(sigma > 0.0)) throw ZeroVarianceError("standardized_mean: sigma must be positive");
    const int m = labels.m();
    const double n = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        const std::int32_t label_i = labels.labels[i];
        for (int j = i + 1; j < m; ++j)
            sum += label_i == labels.labels[j] ? split.sample_v(rng) : split.sample_u(rng);
    }
    return (sum - split.mean() * n) / (sigma * std::sqrt(n));
}

}  // namespace piid
