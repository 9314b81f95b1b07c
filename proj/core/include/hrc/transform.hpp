#pragma once

#include "hrc/image.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace hrc {

/// Coefficients of one plane after blockwise analysis.
///
/// Coefficient (u, v) of the block at block-row i, block-column j lives in
/// channel zigzag(u, v) at position (i, j). Channel 0 is the DC term, and
/// channel index grows with spatial frequency.
struct LatentTensor {
    std::size_t channels = 0;
    std::size_t height = 0; ///< block rows
    std::size_t width = 0;  ///< block columns
    std::vector<double> data;

    LatentTensor() = default;
    LatentTensor(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w, 0.0) {}

    std::size_t plane_size() const { return height * width; }
    double& at(std::size_t c, std::size_t i, std::size_t j) { return data[(c * height + i) * width + j]; }
    double at(std::size_t c, std::size_t i, std::size_t j) const { return data[(c * height + i) * width + j]; }
};

/// Zigzag scan of a block: entry k is the (row, column) frequency pair stored in channel k.
const std::vector<std::pair<std::size_t, std::size_t>>& zigzag_order(std::size_t block_size);

bool is_supported_block_size(std::size_t block_size);

/// Orthonormal 2-D DCT-II of every block. Plane dimensions must be multiples of `block_size` (8 or 16).
LatentTensor analyze(const Plane& plane, std::size_t block_size);

/// Exact inverse of analyze().
Plane synthesize(const LatentTensor& lat, std::size_t block_size);

} // namespace hrc
