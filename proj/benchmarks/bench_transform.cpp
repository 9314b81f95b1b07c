#include "hrc/transform.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

hrc::Plane noise_plane(std::size_t w, std::size_t h)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-128.0, 127.0);
    hrc::Plane p(w, h);
    for (auto& v : p.samples) {
        v = dist(rng);
    }
    return p;
}

void BM_Analyze(benchmark::State& state)
{
    const auto block = static_cast<std::size_t>(state.range(0));
    const hrc::Plane plane = noise_plane(512, 512);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hrc::analyze(plane, block));
    }
    state.SetItemsProcessed(state.iterations() * 512 * 512);
}
BENCHMARK(BM_Analyze)->Arg(8)->Arg(16);

void BM_Synthesize(benchmark::State& state)
{
    const auto block = static_cast<std::size_t>(state.range(0));
    const hrc::LatentTensor lat = hrc::analyze(noise_plane(512, 512), block);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hrc::synthesize(lat, block));
    }
    state.SetItemsProcessed(state.iterations() * 512 * 512);
}
BENCHMARK(BM_Synthesize)->Arg(8)->Arg(16);

} // namespace

BENCHMARK_MAIN();
