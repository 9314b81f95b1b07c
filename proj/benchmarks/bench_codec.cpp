#include "hrc/codec.hpp"
#include "hrc/hroi.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

hrc::Image scene(std::size_t w, std::size_t h)
{
    hrc::Image img(w, h, hrc::ColorSpace::RGB);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double fx = static_cast<double>(x);
            const double fy = static_cast<double>(y);
            img.planes[0].at(x, y) = 128 + 90 * std::sin(fx / 23) * std::cos(fy / 17);
            img.planes[1].at(x, y) = 128 + 60 * std::sin((fx + fy) / 11);
            img.planes[2].at(x, y) = 128 + 40 * std::cos(fx / 5) + 30 * std::sin(fy / 29);
        }
    }
    return img;
}

void BM_Encode(benchmark::State& state)
{
    const hrc::Image img = scene(512, 512);
    const auto profile = hrc::builtin_profile("layer_4");
    hrc::EncodeOptions opts;
    opts.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(hrc::encode(img, profile, nullptr, opts));
    }
    state.SetItemsProcessed(state.iterations() * 512 * 512);
}
BENCHMARK(BM_Encode)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& state)
{
    const auto bytes = hrc::encode(scene(512, 512), hrc::builtin_profile("layer_4"), nullptr);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hrc::decode(bytes, static_cast<unsigned>(state.range(0))));
    }
    state.SetItemsProcessed(state.iterations() * 512 * 512);
}
BENCHMARK(BM_Decode)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Pyramid(benchmark::State& state)
{
    const hrc::Image img = scene(512, 512);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hrc::build_pyramid(img, 3, hrc::saliency_spectral_residual));
    }
}
BENCHMARK(BM_Pyramid)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
