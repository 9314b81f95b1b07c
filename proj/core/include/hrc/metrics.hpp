#pragma once

#include "hrc/image.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hrc {

/// 10*log10(255^2 / MSE) over all planes jointly; +infinity for identical images.
double psnr(const Image& a, const Image& b);

/// PSNR restricted to pixels whose label equals `label`. nullopt when the region is empty.
std::optional<double> psnr_region(const Image& a, const Image& b, const std::vector<std::uint8_t>& labels,
                                  std::uint8_t label);

/// Multi-scale SSIM on luma: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// scale weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333).
///
/// Uses as many scales (up to five) as keep the coarsest level at least 11 pixels
/// on its short side, renormalizing the weights. Negative per-scale terms are clamped
/// to zero so the result stays in [0, 1]. Throws InvalidArgument below 11x11.
double msssim(const Image& a, const Image& b);

struct RegionQuality {
    std::uint8_t label = 0;
    std::optional<double> psnr;
    std::size_t pixel_count = 0;
};

struct QualityReport {
    double psnr = 0.0;
    std::optional<double> msssim;
    double bpp = 0.0;
    std::vector<RegionQuality> per_region;
};

QualityReport measure_quality(const Image& original, const Image& decoded, double bpp,
                              const std::vector<std::uint8_t>& labels, std::size_t region_count);

/// Histograms of |y| (bin width 0.5 over [0, 20) plus an overflow bin) and of the
/// fraction y - floor(y) (100 bins over [0, 1)). The fraction uses the floor
/// convention for negatives too, so frac(-2.25) = 0.75.
struct LatentHistograms {
    static constexpr double kAbsBinWidth = 0.5;
    static constexpr double kAbsRange = 20.0;
    static constexpr std::size_t kAbsBins = 40;
    static constexpr std::size_t kFracBins = 100;

    std::vector<std::size_t> abs_counts = std::vector<std::size_t>(kAbsBins + 1, 0); ///< last = overflow
    std::vector<std::size_t> frac_counts = std::vector<std::size_t>(kFracBins, 0);
    std::size_t total = 0;

    void add(double y);
    void merge(const LatentHistograms& other);
    /// Fraction of |y| mass strictly below `limit`, counting whole bins (limit must sit on a bin edge).
    double abs_mass_below(double limit) const;

    std::string to_json() const;
    std::string to_csv() const;
};

LatentHistograms latent_histograms(std::span<const double> values);

} // namespace hrc
