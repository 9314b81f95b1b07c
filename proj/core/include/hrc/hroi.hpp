#pragma once

#include "hrc/image.hpp"
#include "hrc/quant.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace hrc {

/// Per-pixel saliency in [0, 1].
struct SaliencyMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;
};

struct BinaryMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> bits; ///< 0 or 1 per pixel

    BinaryMask() = default;
    BinaryMask(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), bits(w * h, fill) {}

    std::size_t count() const;
    bool empty() const { return count() == 0; }
};

/// Hierarchical regions F_1..F_k and the residual background B_k.
///
/// label_map holds 0 for F_1 (most salient), i-1 for F_i and depth() for background.
struct MaskPyramid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<BinaryMask> foreground;
    BinaryMask background;
    std::vector<std::uint8_t> label_map;

    std::size_t depth() const { return foreground.size(); }
    std::size_t region_count() const { return depth() + 1; }

    /// Everything background.
    static MaskPyramid background_only(std::size_t width, std::size_t height);
    /// Rebuilds the masks from `label_map` and `depth`.
    static MaskPyramid from_labels(std::size_t width, std::size_t height, std::size_t depth,
                                   std::vector<std::uint8_t> label_map);

    /// Throws InvalidArgument unless the masks partition the pixel grid and agree with label_map.
    void validate() const;
};

using SaliencyOperator = std::function<SaliencyMap(const Image&)>;

constexpr std::size_t kMaxRoiDepth = 3;

struct BinarizeParams {
    double threshold = 0.5;
    double min_area_frac = 0.002;
    std::size_t morph_radius = 2;
};

/// Spectral residual saliency computed on a 64x64 luma thumbnail and resampled to
/// the input size. Min-max normalized; a flat response maps to all zeros.
SaliencyMap saliency_spectral_residual(const Image& img);

/// Threshold, close then open with a disc of `morph_radius`, then drop 8-connected
/// components smaller than min_area_frac of the image.
BinaryMask binarize(const SaliencyMap& sal, const BinarizeParams& params = {});

/// Applies `saliency` to the image, then repeatedly to the image with every claimed
/// pixel replaced by the mean of the unclaimed pixels. Stops early when a level is empty.
MaskPyramid build_pyramid(const Image& img, std::size_t depth, const SaliencyOperator& saliency,
                          const BinarizeParams& params = {});

/// Grayscale masks, nonzero = foreground; earlier files take priority on overlap.
MaskPyramid load_external_masks(const std::vector<std::filesystem::path>& paths, std::size_t width,
                                std::size_t height);
MaskPyramid masks_to_pyramid(const std::vector<BinaryMask>& masks, std::size_t width, std::size_t height);

/// Latent-grid labels by majority vote in each block; ties go to the smaller label.
LabelGrid downsample_labels(const MaskPyramid& pyr, std::size_t block_size);

/// Edge-replicates the label map to the next block multiple.
MaskPyramid pad_pyramid(const MaskPyramid& pyr, std::size_t block_size);

} // namespace hrc
