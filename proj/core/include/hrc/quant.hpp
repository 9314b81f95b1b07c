#pragma once

#include "hrc/transform.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hrc {

/// Parameters of the fraction remapping phi(t) = exp(a*t + b) + c pinned at
/// phi(0) = 0, phi(0.5) = epsilon, phi(1) = 1.
///
/// `threshold` is the fraction where phi crosses 0.5, i.e. the rounding
/// boundary that replaces the uniform 0.5. epsilon = 0.5 is the degenerate
/// identity map (uniform rounding); a, b, c are not meaningful there.
struct PhiParams {
    double epsilon = 0.5;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double threshold = 0.5;
    bool identity = true;

    double operator()(double t) const;
};

/// Closed-form solution of the three pinning constraints. Requires 0 < epsilon <= 0.5.
PhiParams solve_phi(double epsilon);

/// Centrosymmetric nonlinear quantizer: sign(y) * (floor|y| + [frac|y| >= threshold]).
/// Symbol 0 covers (-threshold, threshold); every other symbol covers a unit-width interval.
std::int32_t quantize_scalar(double y, const PhiParams& phi);

struct ChannelGroup {
    std::size_t channels = 0;
    double epsilon = 0.5;
};

/// Ordered channel groups with per-group epsilon plus per-region quantization steps.
struct GroupProfile {
    std::string name;
    std::vector<ChannelGroup> groups;
    std::vector<double> region_scales;

    std::size_t total_channels() const;
    /// First channel of each group, plus a trailing total.
    std::vector<std::size_t> group_offsets() const;

    /// Checks the structural invariants; when `channels` is nonzero also that the groups cover it exactly.
    void validate(std::size_t channels = 0) const;
};

/// Steps for F_1, F_2, F_3 and background, finest for the most salient region.
inline std::vector<double> default_region_scales()
{
    return {1.0, 1.25, 1.6, 2.2};
}

/// layer_1 .. layer_4, with channel counts rescaled to `channels`.
std::vector<GroupProfile> builtin_profiles(std::size_t channels = 256);
GroupProfile builtin_profile(const std::string& name, std::size_t channels = 256);

/// Splits `channels` proportionally to `weights`, rounding each cumulative boundary to nearest (half up).
std::vector<std::size_t> apportion_channels(const std::vector<std::size_t>& weights, std::size_t channels);

GroupProfile profile_from_json(const std::string& text);
std::string profile_to_json(const GroupProfile& profile);
GroupProfile load_profile(const std::filesystem::path& path);

/// Integer symbols laid out exactly like LatentTensor.
struct SymbolTensor {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::int32_t> data;

    SymbolTensor() = default;
    SymbolTensor(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w, 0) {}

    std::size_t plane_size() const { return height * width; }
    std::int32_t& at(std::size_t c, std::size_t i, std::size_t j) { return data[(c * height + i) * width + j]; }
    std::int32_t at(std::size_t c, std::size_t i, std::size_t j) const { return data[(c * height + i) * width + j]; }
};

/// Region label per latent position, raster order.
struct LabelGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> labels;

    LabelGrid() = default;
    LabelGrid(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), labels(w * h, fill) {}

    std::uint8_t at(std::size_t i, std::size_t j) const { return labels[i * width + j]; }
};

/// symbol = quantize_scalar(y * gain / region_scales[label], phi(epsilon of the channel's group)).
SymbolTensor quantize_latents(const LatentTensor& lat, const GroupProfile& profile, const LabelGrid& labels,
                              double gain);

/// y = symbol * region_scales[label] / gain.
LatentTensor dequantize_latents(const SymbolTensor& symbols, const GroupProfile& profile, const LabelGrid& labels,
                                double gain);

} // namespace hrc
