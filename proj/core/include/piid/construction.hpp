#pragma once

#include <cstdint>
#include <vector>

#include "piid/margins.hpp"
#include "piid/rng.hpp"

namespace piid {

/// m categorical labels, each uniform on {1, ..., ell}.
struct LabelSequence {
    int ell = 2;
    std::vector<std::int32_t> labels;  // values in {1, ..., ell}
    int m() const { return static_cast<int>(labels.size()); }
};

/// The n = m(m-1)/2 pairwise equality indicators, stored in k(i,j) order:
/// bits[k - 1] = 1 iff labels[i] == labels[j] for k = pair_index(i, j, m).
struct DependencySequence {
    int m = 0;
    std::vector<std::uint8_t> bits;
    std::int64_t n() const { return static_cast<std::int64_t>(bits.size()); }
};

/// Category occupancy counts N of a label sequence; sum(counts) = m.
struct CategoryCounts {
    std::vector<std::int64_t> counts;
    int ell() const { return static_cast<int>(counts.size()); }
    std::int64_t m() const;
};

/// The margin-assigned sequence X: x[k-1] is a U-draw where D_k = 0 and a
/// V-draw where D_k = 1.
struct PairwiseSample {
    std::vector<double> x;
    int m = 0;
    SplitMargin split;
    std::int64_t n() const { return static_cast<std::int64_t>(x.size()); }
};

/// Draw m i.i.d. labels uniform on {1, ..., ell}. Requires ell >= 2, m >= 2.
LabelSequence draw_labels(int ell, int m, RngStream& rng);

/// Linear index of the pair (i, j), 1 <= i < j <= m:
///   k(i,j) = [i(2m-1) - i^2]/2 + j - m,
/// a bijection onto {1, ..., m(m-1)/2}. Throws IndexOrderError if i >= j.
std::int64_t pair_index(std::int64_t i, std::int64_t j, std::int64_t m);

DependencySequence build_D(const LabelSequence& labels);

CategoryCounts tally(const LabelSequence& labels);

/// Number of 1s in D determined by category counts alone:
/// p(N) = sum_i N_i (N_i - 1) / 2.
std::int64_t count_ones_closed_form(const CategoryCounts& counts);

/// (p(N) - n/ell) / sqrt(n (1/ell)(1 - 1/ell)); converges in law to a
/// standardized chi-squared with ell-1 degrees of freedom as m grows.
double standardized_count(const CategoryCounts& counts);

/// Assign margin draws to the indicator sequence. Consumes exactly one
/// conditional variate per index, in index order, so seeded runs are
/// reproducible draw-for-draw.
PairwiseSample build_X(const DependencySequence& d, const SplitMargin& split, RngStream& rng);

/// S_n = (sum_k x_k - mu n) / (sigma sqrt(n)).
double standardized_mean(const PairwiseSample& sample);

/// One-pass equivalent of build_D + build_X + standardized_mean that never
/// materializes the n-sized arrays. Given the same stream state it consumes
/// the same draws in the same order and returns the identical value.
double standardized_mean_streamed(const LabelSequence& labels, const SplitMargin& split,
                                  RngStream& rng);

}  // namespace piid
