#pragma once

#include "hrc/entropy.hpp"
#include "hrc/hroi.hpp"
#include "hrc/image.hpp"
#include "hrc/quant.hpp"
#include "hrc/transform.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hrc {

inline constexpr std::uint8_t kStreamVersion = 1;
inline constexpr std::uint8_t kFlagObjectMode = 0x01;
inline constexpr std::uint8_t kFlagYCbCr = 0x02;

struct EncodeOptions {
    std::size_t block_size = 16;
    /// Scales coefficients before quantization; stored with 1/256 precision.
    double latent_gain = 0.125;
    /// Code RGB input as BT.601 YCbCr. Off codes the RGB planes directly.
    bool ycbcr = true;
    /// Worker threads for per-segment coding; 0 = hardware concurrency.
    unsigned threads = 0;
};

/// Region label bound to each channel group, indexed by group.
struct ObjectBinding {
    std::vector<std::uint8_t> region_of_group;
};

/// Everything in an .hrc file ahead of the segment payloads.
///
/// Layout (big-endian): "HRC1", version u8, flags u8, width u32, height u32,
/// block_size u8, plane_count u8, latent_gain u16 (x256), group_count u8,
/// per group {channels u16, epsilon u16 (x10000)}, region_count u8,
/// per region {step u16 (x256)}, label RLE length u32 + RLE bytes of
/// {label u8, run u16} over the latent grid, then one u32 segment length per
/// (plane, group), plane-major. Payloads follow in the same order.
struct StreamHeader {
    std::uint8_t version = kStreamVersion;
    std::uint8_t flags = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint8_t block_size = 16;
    std::uint8_t plane_count = 0;
    std::uint16_t latent_gain_q = 0;
    std::vector<ChannelGroup> groups;
    std::vector<std::uint16_t> epsilon_q;
    std::vector<std::uint16_t> region_scale_q;
    LabelGrid labels;
    std::vector<std::uint32_t> segment_lengths;
    std::size_t rle_bytes = 0;
    std::size_t size = 0; ///< serialized header bytes

    bool object_mode() const { return (flags & kFlagObjectMode) != 0; }
    bool ycbcr() const { return (flags & kFlagYCbCr) != 0; }
    double latent_gain() const { return latent_gain_q / 256.0; }
    std::size_t group_count() const { return groups.size(); }
    std::size_t region_count() const { return region_scale_q.size(); }
    std::uint32_t segment_length(std::size_t plane, std::size_t group) const
    {
        return segment_lengths[plane * groups.size() + group];
    }
    /// Profile with the exact epsilon and step values the decoder uses.
    GroupProfile profile() const;
};

StreamHeader parse_header(std::span<const std::uint8_t> bytes);

struct BppBreakdown {
    std::size_t pixels = 0;
    std::size_t file_bytes = 0;
    std::size_t header_bytes = 0;
    std::vector<std::size_t> segment_bytes; ///< plane-major (plane, group)
    double bpp_total = 0.0;
    double bpp_header = 0.0;
    std::vector<double> bpp_per_segment;
    std::vector<double> bpp_per_group; ///< summed over planes
};

BppBreakdown bpp_breakdown(std::span<const std::uint8_t> bytes);

/// `pyramid` may be null, meaning the whole image is background.
std::vector<std::uint8_t> encode(const Image& img, const GroupProfile& profile, const MaskPyramid* pyramid,
                                 const EncodeOptions& opts = {});

/// Each group's latents are masked to its bound region before quantization.
std::vector<std::uint8_t> encode_object_mode(const Image& img, const GroupProfile& profile, const MaskPyramid& pyramid,
                                             const ObjectBinding& binding, const EncodeOptions& opts = {});

Image decode(std::span<const std::uint8_t> bytes, unsigned threads = 0);

/// Decodes groups 1..upto_group and zeroes the rest.
Image decode_progressive(std::span<const std::uint8_t> bytes, std::size_t upto_group, unsigned threads = 0);

/// Decodes only the listed groups (0-based) and zeroes the rest.
Image decode_object(std::span<const std::uint8_t> bytes, const std::vector<std::size_t>& groups,
                    unsigned threads = 0);

/// Dequantized latents of each plane, with unselected groups left at zero.
struct DecodedLatents {
    StreamHeader header;
    std::vector<LatentTensor> planes;
};

DecodedLatents decode_latents(std::span<const std::uint8_t> bytes, const std::vector<bool>& selected_groups,
                              unsigned threads = 0);

/// Synthesis of each plane at padded size, without level shift, cropping or clamping.
std::vector<Plane> synthesize_planes(const DecodedLatents& latents);

/// Level shift, crop, color conversion back to RGB and clamp to [0, 255].
Image reconstruct(const DecodedLatents& latents);

/// Values handed to the quantizer (coefficient * gain / region step) for every plane, as encode() computes them.
std::vector<double> quantizer_inputs(const Image& img, const GroupProfile& profile, const MaskPyramid* pyramid,
                                     const EncodeOptions& opts = {});

/// Resolves region steps for a pyramid of `depth` foreground levels: F_i uses
/// scales[i] (clamped to the last foreground entry) and the background always the last.
std::vector<double> effective_region_scales(const std::vector<double>& scales, std::size_t depth);

} // namespace hrc
