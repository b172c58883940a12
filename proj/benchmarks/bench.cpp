#include <benchmark/benchmark.h>

#include "piid/construction.hpp"
#include "piid/limit_law.hpp"
#include "piid/margins.hpp"
#include "piid/rng.hpp"
#include "piid/statistics.hpp"

namespace {

void BM_NormalMarginConditionalDraw(benchmark::State& state) {
    const piid::SplitMargin margin = piid::split(piid::MarginSpec::normal(0.0, 1.0));
    piid::RngStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(margin.sample_v(rng));
    }
}
BENCHMARK(BM_NormalMarginConditionalDraw);

void BM_DrawLabels(benchmark::State& state) {
    piid::RngStream rng(1);
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(piid::draw_labels(2, m, rng));
    }
    state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_DrawLabels)->Arg(100)->Arg(2000);

void BM_PipelineStandardizedMean(benchmark::State& state) {
    const piid::SplitMargin margin = piid::split(piid::MarginSpec::normal(0.0, 1.0));
    const int m = static_cast<int>(state.range(0));
    std::uint64_t rep = 0;
    for (auto _ : state) {
        piid::RngStream rng = piid::RngStream::derive(7, rep++);
        const piid::LabelSequence labels = piid::draw_labels(2, m, rng);
        benchmark::DoNotOptimize(piid::standardized_mean_streamed(labels, margin, rng));
    }
    state.SetItemsProcessed(state.iterations() * (m * (m - 1) / 2));
}
BENCHMARK(BM_PipelineStandardizedMean)->Arg(100)->Arg(400);

void BM_LimitLawPdf(benchmark::State& state) {
    const piid::LimitLaw law(2, 0.8);
    double s = -4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(law.pdf(s));
        s = s < 8.0 ? s + 0.1 : -4.0;
    }
}
BENCHMARK(BM_LimitLawPdf);

void BM_LimitLawCdf(benchmark::State& state) {
    const piid::LimitLaw law(2, 0.8);
    double s = -4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(law.cdf(s));
        s = s < 8.0 ? s + 0.1 : -4.0;
    }
}
BENCHMARK(BM_LimitLawCdf);

void BM_LimitLawSample(benchmark::State& state) {
    const piid::LimitLaw law(2, 0.8);
    piid::RngStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(law.sample(rng, 1000));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_LimitLawSample);

void BM_EnumerateExact(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(piid::enumerate_exact(2, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_EnumerateExact)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
