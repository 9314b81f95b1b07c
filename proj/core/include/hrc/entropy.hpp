#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hrc {

/// Geometry of the symbols carried by one segment: a run of channels of one plane.
struct SegmentShape {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t count() const { return channels * height * width; }
};

/// Selects the zero-flag context family. Every segment starts from a fresh model.
struct ContextConfig {
    std::size_t group_index = 0;
    std::size_t group_count = 1;
};

/// One independently decodable entropy-coded unit of the bitstream.
struct Segment {
    std::size_t plane = 0;
    std::size_t group = 0;
    std::size_t symbol_count = 0;
    std::vector<std::uint8_t> payload;
};

/// Optional accounting from encode_segment().
struct EncodeStats {
    /// Sum of -log2 p over every coded bin, p being the adaptive model's probability at coding time.
    double model_bits = 0.0;
    std::size_t bins = 0;
};

/// Binarizes each symbol as zero flag, sign, four adaptive greater-than bins and an
/// order-0 Exp-Golomb remainder, and range codes every bin with adaptive contexts
/// taken from the left, top and previous-channel neighbours.
///
/// Symbols are in SegmentShape order (channel-major, then raster). An empty or
/// all-zero input produces an empty payload, which decodes to zeros.
Segment encode_segment(std::span<const std::int32_t> symbols, const SegmentShape& shape, const ContextConfig& ctx,
                       EncodeStats* stats = nullptr);

/// Inverse of encode_segment(). Throws CorruptStream when the payload is truncated,
/// fails its integrity check or the symbol count disagrees.
std::vector<std::int32_t> decode_segment(const Segment& seg, std::size_t expected_count, const SegmentShape& shape,
                                         const ContextConfig& ctx);

double segment_bpp(const Segment& seg, std::size_t image_pixels);

namespace rc {

/// 12-bit probability of a zero bin, adapted with rate 1/32.
class BitModel {
public:
    static constexpr unsigned kBits = 12;
    static constexpr std::uint32_t kOne = 1u << kBits;
    static constexpr unsigned kShift = 5;

    std::uint32_t p0() const { return prob_; }
    void update(unsigned bit)
    {
        if (bit == 0) {
            prob_ += (kOne - prob_) >> kShift;
        } else {
            prob_ -= prob_ >> kShift;
        }
    }

private:
    std::uint32_t prob_ = kOne / 2;
};

/// Binary range encoder with 32-bit range and carry propagation through a cached byte.
class Encoder {
public:
    void encode(BitModel& model, unsigned bit);
    void encode_direct(std::uint32_t value, unsigned nbits);
    std::vector<std::uint8_t> finish();

private:
    void shift_low();

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    std::vector<std::uint8_t> out_;
};

class Decoder {
public:
    explicit Decoder(std::span<const std::uint8_t> bytes);

    unsigned decode(BitModel& model);
    std::uint32_t decode_direct(unsigned nbits);
    std::size_t consumed() const { return pos_; }

private:
    std::uint8_t next_byte();
    void normalize();

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint32_t code_ = 0;
};

} // namespace rc

} // namespace hrc
