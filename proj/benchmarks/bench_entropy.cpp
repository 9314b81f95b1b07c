#include "hrc/entropy.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

namespace {

std::vector<std::int32_t> laplacian_symbols(std::size_t n, double scale)
{
    std::mt19937_64 rng(5);
    std::exponential_distribution<double> mag(1.0 / scale);
    std::bernoulli_distribution sign(0.5);
    std::vector<std::int32_t> out(n);
    for (auto& s : out) {
        const auto m = static_cast<std::int32_t>(std::floor(mag(rng)));
        s = sign(rng) ? -m : m;
    }
    return out;
}

const hrc::SegmentShape kShape{64, 32, 32};

void BM_EncodeSegment(benchmark::State& state)
{
    const auto symbols = laplacian_symbols(kShape.count(), static_cast<double>(state.range(0)) / 10.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hrc::encode_segment(symbols, kShape, {}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(symbols.size()));
}
BENCHMARK(BM_EncodeSegment)->Arg(3)->Arg(20)->Arg(200);

void BM_DecodeSegment(benchmark::State& state)
{
    const auto symbols = laplacian_symbols(kShape.count(), static_cast<double>(state.range(0)) / 10.0);
    const hrc::Segment seg = hrc::encode_segment(symbols, kShape, {});
    for (auto _ : state) {
        benchmark::DoNotOptimize(hrc::decode_segment(seg, symbols.size(), kShape, {}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(symbols.size()));
}
BENCHMARK(BM_DecodeSegment)->Arg(3)->Arg(20)->Arg(200);

} // namespace

BENCHMARK_MAIN();
