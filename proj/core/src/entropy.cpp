#include "hrc/entropy.hpp"

#include "hrc/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

namespace hrc {

namespace rc {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
}

void Encoder::shift_low()
{
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
        const auto carry = static_cast<std::uint8_t>(low_ >> 32);
        std::uint8_t temp = cache_;
        do {
            out_.push_back(static_cast<std::uint8_t>(temp + carry));
            temp = 0xFF;
        } while (--cache_size_ != 0);
        cache_ = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low_) >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
}

void Encoder::encode(BitModel& model, unsigned bit)
{
    const std::uint32_t bound = (range_ >> BitModel::kBits) * model.p0();
    if (bit == 0) {
        range_ = bound;
    } else {
        low_ += bound;
        range_ -= bound;
    }
    model.update(bit);
    while (range_ < kTop) {
        range_ <<= 8;
        shift_low();
    }
}

void Encoder::encode_direct(std::uint32_t value, unsigned nbits)
{
    while (nbits-- > 0) {
        range_ >>= 1;
        if ((value >> nbits) & 1u) {
            low_ += range_;
        }
        while (range_ < kTop) {
            range_ <<= 8;
            shift_low();
        }
    }
}

std::vector<std::uint8_t> Encoder::finish()
{
    for (int i = 0; i < 5; ++i) {
        shift_low();
    }
    return std::move(out_);
}

Decoder::Decoder(std::span<const std::uint8_t> bytes) : in_(bytes)
{
    if (next_byte() != 0) {
        throw CorruptStream("range coder payload does not start with a zero byte");
    }
    for (int i = 0; i < 4; ++i) {
        code_ = (code_ << 8) | next_byte();
    }
}

std::uint8_t Decoder::next_byte()
{
    if (pos_ >= in_.size()) {
        throw CorruptStream("truncated entropy-coded segment");
    }
    return in_[pos_++];
}

void Decoder::normalize()
{
    while (range_ < kTop) {
        range_ <<= 8;
        code_ = (code_ << 8) | next_byte();
    }
}

unsigned Decoder::decode(BitModel& model)
{
    const std::uint32_t bound = (range_ >> BitModel::kBits) * model.p0();
    unsigned bit;
    if (code_ < bound) {
        range_ = bound;
        bit = 0;
    } else {
        code_ -= bound;
        range_ -= bound;
        bit = 1;
    }
    model.update(bit);
    normalize();
    return bit;
}

std::uint32_t Decoder::decode_direct(unsigned nbits)
{
    std::uint32_t value = 0;
    while (nbits-- > 0) {
        range_ >>= 1;
        unsigned bit = 0;
        if (code_ >= range_) {
            code_ -= range_;
            bit = 1;
        }
        value = (value << 1) | bit;
        normalize();
    }
    return value;
}

} // namespace rc

namespace {

constexpr unsigned kGreaterBins = 4;
constexpr unsigned kMagnitudeBuckets = 4;
constexpr unsigned kMaxPrefix = 32;
constexpr unsigned kCheckBits = 16;

struct ContextModel {
    explicit ContextModel(std::size_t group_count) : zero(group_count * 8) {}

    std::vector<rc::BitModel> zero;
    std::array<rc::BitModel, 3> sign{};
    std::array<std::array<rc::BitModel, kMagnitudeBuckets>, kGreaterBins> greater{};
    std::array<rc::BitModel, kMaxPrefix> prefix{};
    std::array<rc::BitModel, kMaxPrefix> suffix{};
};

struct Neighbours {
    std::int32_t left = 0;
    std::int32_t top = 0;
    std::int32_t prev = 0;

    unsigned significance() const { return (left != 0) | ((top != 0) << 1) | ((prev != 0) << 2); }
    unsigned sign_context() const { return left == 0 ? 0 : (left > 0 ? 1 : 2); }
    unsigned magnitude_bucket() const
    {
        const std::uint64_t s = static_cast<std::uint64_t>(std::llabs(left)) + std::llabs(top) + std::llabs(prev);
        return s == 0 ? 0 : s <= 2 ? 1 : s <= 6 ? 2 : 3;
    }
};

Neighbours neighbours(const std::int32_t* base, const SegmentShape& shape, std::size_t c, std::size_t i,
                      std::size_t j)
{
    const std::size_t plane = shape.height * shape.width;
    const std::int32_t* at = base + c * plane + i * shape.width + j;
    Neighbours n;
    if (j > 0) {
        n.left = at[-1];
    }
    if (i > 0) {
        n.top = at[-static_cast<std::ptrdiff_t>(shape.width)];
    }
    if (c > 0) {
        n.prev = at[-static_cast<std::ptrdiff_t>(plane)];
    }
    return n;
}

// 16-bit FNV-1a fold over the symbol values.
std::uint32_t check_value(std::span<const std::int32_t> symbols)
{
    std::uint32_t h = 2166136261u;
    for (auto s : symbols) {
        h ^= static_cast<std::uint32_t>(s);
        h *= 16777619u;
    }
    return (h ^ (h >> 16)) & 0xFFFFu;
}

void check_context(const ContextConfig& ctx)
{
    if (ctx.group_count == 0 || ctx.group_index >= ctx.group_count) {
        throw InvalidArgument("context group index out of range");
    }
}

class CostingEncoder {
public:
    explicit CostingEncoder(EncodeStats* stats) : stats_(stats) {}

    void bit(rc::BitModel& m, unsigned b)
    {
        if (stats_ != nullptr) {
            const double p0 = static_cast<double>(m.p0()) / rc::BitModel::kOne;
            stats_->model_bits -= std::log2(b == 0 ? p0 : 1.0 - p0);
            ++stats_->bins;
        }
        enc_.encode(m, b);
    }

    void direct(std::uint32_t value, unsigned nbits)
    {
        if (stats_ != nullptr) {
            stats_->model_bits += nbits;
            stats_->bins += nbits;
        }
        enc_.encode_direct(value, nbits);
    }

    std::vector<std::uint8_t> finish() { return enc_.finish(); }

private:
    rc::Encoder enc_;
    EncodeStats* stats_;
};

} // namespace

Segment encode_segment(std::span<const std::int32_t> symbols, const SegmentShape& shape, const ContextConfig& ctx,
                       EncodeStats* stats)
{
    check_context(ctx);
    if (symbols.size() != shape.count()) {
        throw InvalidArgument("symbol count does not match segment shape");
    }
    Segment seg;
    seg.group = ctx.group_index;
    seg.symbol_count = symbols.size();
    // An all-zero (or empty) segment is signalled by an empty payload.
    if (std::all_of(symbols.begin(), symbols.end(), [](std::int32_t s) { return s == 0; })) {
        return seg;
    }

    ContextModel model(ctx.group_count);
    auto& zero = model.zero;
    const std::size_t zero_base = ctx.group_index * 8;
    CostingEncoder enc(stats);
    std::size_t k = 0;
    for (std::size_t c = 0; c < shape.channels; ++c) {
        for (std::size_t i = 0; i < shape.height; ++i) {
            for (std::size_t j = 0; j < shape.width; ++j, ++k) {
                const std::int32_t s = symbols[k];
                const Neighbours nb = neighbours(symbols.data(), shape, c, i, j);
                enc.bit(zero[zero_base + nb.significance()], s != 0);
                if (s == 0) {
                    continue;
                }
                enc.bit(model.sign[nb.sign_context()], s < 0);
                const std::uint64_t m = static_cast<std::uint64_t>(std::llabs(s)) - 1;
                auto& gt = model.greater;
                const unsigned bucket = nb.magnitude_bucket();
                unsigned idx = 0;
                for (; idx < kGreaterBins; ++idx) {
                    enc.bit(gt[idx][bucket], m > idx);
                    if (m <= idx) {
                        break;
                    }
                }
                if (idx < kGreaterBins) {
                    continue;
                }
                // Exp-Golomb order 0 of the remainder.
                const std::uint64_t r = m - kGreaterBins + 1;
                unsigned nbits = 0;
                while ((r >> (nbits + 1)) != 0) {
                    ++nbits;
                }
                for (unsigned b = 0; b < nbits; ++b) {
                    enc.bit(model.prefix[b], 1);
                }
                enc.bit(model.prefix[nbits], 0);
                for (unsigned b = nbits; b-- > 0;) {
                    enc.bit(model.suffix[b], static_cast<unsigned>((r >> b) & 1u));
                }
            }
        }
    }
    enc.direct(check_value(symbols), kCheckBits);
    seg.payload = enc.finish();
    return seg;
}

std::vector<std::int32_t> decode_segment(const Segment& seg, std::size_t expected_count, const SegmentShape& shape,
                                         const ContextConfig& ctx)
{
    check_context(ctx);
    if (seg.symbol_count != expected_count || shape.count() != expected_count) {
        throw CorruptStream("segment symbol count mismatch");
    }
    std::vector<std::int32_t> symbols(expected_count, 0);
    if (seg.payload.empty()) {
        return symbols;
    }
    if (expected_count == 0) {
        throw CorruptStream("payload present for an empty segment");
    }

    ContextModel model(ctx.group_count);
    auto& zero = model.zero;
    const std::size_t zero_base = ctx.group_index * 8;
    rc::Decoder dec(seg.payload);
    std::size_t k = 0;
    for (std::size_t c = 0; c < shape.channels; ++c) {
        for (std::size_t i = 0; i < shape.height; ++i) {
            for (std::size_t j = 0; j < shape.width; ++j, ++k) {
                const Neighbours nb = neighbours(symbols.data(), shape, c, i, j);
                if (dec.decode(zero[zero_base + nb.significance()]) == 0) {
                    continue;
                }
                const bool negative = dec.decode(model.sign[nb.sign_context()]) != 0;
                auto& gt = model.greater;
                const unsigned bucket = nb.magnitude_bucket();
                std::uint64_t m = 0;
                while (m < kGreaterBins && dec.decode(gt[m][bucket]) != 0) {
                    ++m;
                }
                if (m == kGreaterBins) {
                    unsigned nbits = 0;
                    while (dec.decode(model.prefix[nbits]) != 0) {
                        if (++nbits >= kMaxPrefix - 1) {
                            throw CorruptStream("Exp-Golomb prefix overflow");
                        }
                    }
                    std::uint64_t r = 1;
                    for (unsigned b = nbits; b-- > 0;) {
                        r = (r << 1) | dec.decode(model.suffix[b]);
                    }
                    m = r + kGreaterBins - 1;
                }
                if (m + 1 > static_cast<std::uint64_t>(INT32_MAX)) {
                    throw CorruptStream("decoded magnitude out of range");
                }
                const auto mag = static_cast<std::int32_t>(m + 1);
                symbols[k] = negative ? -mag : mag;
            }
        }
    }
    if (dec.decode_direct(kCheckBits) != check_value(symbols)) {
        throw CorruptStream("segment integrity check failed");
    }
    if (dec.consumed() != seg.payload.size()) {
        throw CorruptStream("segment length disagrees with its coded content");
    }
    return symbols;
}

double segment_bpp(const Segment& seg, std::size_t image_pixels)
{
    if (image_pixels == 0) {
        throw InvalidArgument("segment_bpp: image has no pixels");
    }
    return static_cast<double>(seg.payload.size()) * 8.0 / static_cast<double>(image_pixels);
}

} // namespace hrc
