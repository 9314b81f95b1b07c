#include "hrc/codec.hpp"

#include "hrc/error.hpp"
#include "hrc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>

namespace hrc {

namespace {

constexpr char kMagic[4] = {'H', 'R', 'C', '1'};
constexpr double kLevelShift = 128.0;
constexpr double kEpsilonScale = 10000.0;
constexpr double kStepScale = 256.0;
constexpr double kGainScale = 256.0;
constexpr std::size_t kMaxRun = 0xFFFF;

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v)
    {
        u8(static_cast<std::uint8_t>(v >> 8));
        u8(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v)
    {
        u16(static_cast<std::uint16_t>(v >> 16));
        u16(static_cast<std::uint16_t>(v));
    }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t>& data() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8()
    {
        need(1);
        return in_[pos_++];
    }
    std::uint16_t u16()
    {
        const std::uint16_t hi = u8();
        return static_cast<std::uint16_t>((hi << 8) | u8());
    }
    std::uint32_t u32()
    {
        const std::uint32_t hi = u16();
        return (hi << 16) | u16();
    }
    std::span<const std::uint8_t> take(std::size_t n)
    {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n) {
            throw CorruptStream("truncated stream header");
        }
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::uint16_t to_fixed(double v, double scale, const char* what)
{
    const double q = std::round(v * scale);
    if (!(q >= 1.0 && q <= 65535.0)) {
        throw InvalidArgument(std::string(what) + " is outside the representable range");
    }
    return static_cast<std::uint16_t>(q);
}

std::vector<std::uint8_t> rle_encode(const LabelGrid& grid)
{
    ByteWriter w;
    std::size_t i = 0;
    while (i < grid.labels.size()) {
        const std::uint8_t label = grid.labels[i];
        std::size_t run = 1;
        while (i + run < grid.labels.size() && grid.labels[i + run] == label && run < kMaxRun) {
            ++run;
        }
        w.u8(label);
        w.u16(static_cast<std::uint16_t>(run));
        i += run;
    }
    return std::move(w.data());
}

LabelGrid rle_decode(std::span<const std::uint8_t> rle, std::size_t width, std::size_t height,
                     std::size_t region_count)
{
    if (rle.size() % 3 != 0) {
        throw CorruptStream("label RLE length is not a multiple of 3");
    }
    LabelGrid grid(width, height);
    std::size_t pos = 0;
    ByteReader r(rle);
    for (std::size_t k = 0; k < rle.size() / 3; ++k) {
        const std::uint8_t label = r.u8();
        const std::size_t run = r.u16();
        if (label >= region_count || run == 0 || pos + run > grid.labels.size()) {
            throw CorruptStream("invalid label RLE run");
        }
        std::fill_n(grid.labels.begin() + static_cast<std::ptrdiff_t>(pos), run, label);
        pos += run;
    }
    if (pos != grid.labels.size()) {
        throw CorruptStream("label RLE does not cover the latent grid");
    }
    return grid;
}

struct Prepared {
    StreamHeader header;
    GroupProfile profile;
    std::vector<LatentTensor> latents;
    LabelGrid labels;
};

// Everything up to quantization: colour conversion, padding, analysis, label grid.
Prepared prepare(const Image& img, const GroupProfile& profile, const MaskPyramid* pyramid, const EncodeOptions& opts)
{
    img.validate();
    if (img.pixel_count() == 0) {
        throw InvalidArgument("cannot encode an empty image");
    }
    if (img.width > std::numeric_limits<std::uint32_t>::max() || img.height > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("image dimensions exceed 32 bits");
    }
    if (!is_supported_block_size(opts.block_size)) {
        throw InvalidArgument("block size must be 8 or 16");
    }
    const std::size_t channels = opts.block_size * opts.block_size;
    profile.validate(channels);
    if (profile.groups.size() > 255) {
        throw InvalidArgument("too many channel groups");
    }

    Prepared p;
    StreamHeader& h = p.header;
    h.width = static_cast<std::uint32_t>(img.width);
    h.height = static_cast<std::uint32_t>(img.height);
    h.block_size = static_cast<std::uint8_t>(opts.block_size);
    h.latent_gain_q = to_fixed(opts.latent_gain, kGainScale, "latent gain");

    Image coded = img;
    if (img.colorspace == ColorSpace::RGB && opts.ycbcr) {
        coded = convert_colorspace(img, ColorSpace::YCbCr601);
    }
    if (coded.colorspace == ColorSpace::YCbCr601) {
        h.flags |= kFlagYCbCr;
    }
    h.plane_count = static_cast<std::uint8_t>(coded.plane_count());

    MaskPyramid pyr = pyramid != nullptr ? *pyramid : MaskPyramid::background_only(img.width, img.height);
    if (pyr.width != img.width || pyr.height != img.height) {
        throw InvalidArgument("region pyramid does not match image dimensions");
    }
    pyr.validate();
    p.labels = downsample_labels(pad_pyramid(pyr, opts.block_size), opts.block_size);
    h.labels = p.labels;

    // Quantize epsilon and steps to their stored precision so both sides solve identical parameters.
    p.profile.name = profile.name;
    for (const auto& g : profile.groups) {
        const std::uint16_t q = to_fixed(g.epsilon, kEpsilonScale, "epsilon");
        h.epsilon_q.push_back(q);
        h.groups.push_back({g.channels, q / kEpsilonScale});
    }
    p.profile.groups = h.groups;
    for (double s : effective_region_scales(profile.region_scales, pyr.depth())) {
        const std::uint16_t q = to_fixed(s, kStepScale, "region scale");
        h.region_scale_q.push_back(q);
        p.profile.region_scales.push_back(q / kStepScale);
    }

    for (const auto& plane : coded.planes) {
        Plane shifted = pad_to_multiple(plane, opts.block_size);
        for (auto& v : shifted.samples) {
            v -= kLevelShift;
        }
        p.latents.push_back(analyze(shifted, opts.block_size));
    }
    return p;
}

std::vector<std::uint8_t> finish_encode(Prepared& p, const EncodeOptions& opts)
{
    StreamHeader& h = p.header;
    const double gain = h.latent_gain();
    const auto offsets = p.profile.group_offsets();
    const std::size_t groups = p.profile.groups.size();
    const std::size_t planes = p.latents.size();

    std::vector<SymbolTensor> symbols(planes);
    for (std::size_t pl = 0; pl < planes; ++pl) {
        symbols[pl] = quantize_latents(p.latents[pl], p.profile, p.labels, gain);
    }

    std::vector<Segment> segments(planes * groups);
    parallel_for(segments.size(), opts.threads, [&](std::size_t idx) {
        const std::size_t pl = idx / groups;
        const std::size_t g = idx % groups;
        const auto& sym = symbols[pl];
        const SegmentShape shape{offsets[g + 1] - offsets[g], sym.height, sym.width};
        const std::span<const std::int32_t> slice(sym.data.data() + offsets[g] * sym.plane_size(), shape.count());
        segments[idx] = encode_segment(slice, shape, {g, groups});
        segments[idx].plane = pl;
    });

    ByteWriter w;
    for (char c : kMagic) {
        w.u8(static_cast<std::uint8_t>(c));
    }
    w.u8(h.version);
    w.u8(h.flags);
    w.u32(h.width);
    w.u32(h.height);
    w.u8(h.block_size);
    w.u8(h.plane_count);
    w.u16(h.latent_gain_q);
    w.u8(static_cast<std::uint8_t>(groups));
    for (std::size_t g = 0; g < groups; ++g) {
        w.u16(static_cast<std::uint16_t>(h.groups[g].channels));
        w.u16(h.epsilon_q[g]);
    }
    w.u8(static_cast<std::uint8_t>(h.region_scale_q.size()));
    for (auto q : h.region_scale_q) {
        w.u16(q);
    }
    const auto rle = rle_encode(h.labels);
    w.u32(static_cast<std::uint32_t>(rle.size()));
    w.bytes(rle);
    for (const auto& seg : segments) {
        if (seg.payload.size() > std::numeric_limits<std::uint32_t>::max()) {
            throw InvalidArgument("segment exceeds 4 GiB");
        }
        w.u32(static_cast<std::uint32_t>(seg.payload.size()));
    }
    for (const auto& seg : segments) {
        w.bytes(seg.payload);
    }
    return std::move(w.data());
}

std::vector<bool> first_groups(std::size_t count, std::size_t total)
{
    std::vector<bool> sel(total, false);
    std::fill_n(sel.begin(), std::min(count, total), true);
    return sel;
}

} // namespace

GroupProfile StreamHeader::profile() const
{
    GroupProfile p;
    p.name = "stream";
    p.groups = groups;
    for (auto q : region_scale_q) {
        p.region_scales.push_back(q / kStepScale);
    }
    return p;
}

std::vector<double> effective_region_scales(const std::vector<double>& scales, std::size_t depth)
{
    if (scales.empty()) {
        throw InvalidArgument("profile has no region scales");
    }
    std::vector<double> out;
    const std::size_t fg_entries = scales.size() > 1 ? scales.size() - 1 : 1;
    for (std::size_t i = 0; i < depth; ++i) {
        out.push_back(scales[std::min(i, fg_entries - 1)]);
    }
    out.push_back(scales.back());
    return out;
}

StreamHeader parse_header(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    const auto magic = r.take(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw CorruptStream("bad magic: not an HRC1 stream");
    }
    StreamHeader h;
    h.version = r.u8();
    if (h.version != kStreamVersion) {
        throw CorruptStream("unsupported stream version " + std::to_string(h.version));
    }
    h.flags = r.u8();
    if ((h.flags & ~(kFlagObjectMode | kFlagYCbCr)) != 0) {
        throw CorruptStream("unknown header flags");
    }
    h.width = r.u32();
    h.height = r.u32();
    h.block_size = r.u8();
    h.plane_count = r.u8();
    h.latent_gain_q = r.u16();
    if (h.width == 0 || h.height == 0) {
        throw CorruptStream("zero image dimension");
    }
    if (!is_supported_block_size(h.block_size)) {
        throw CorruptStream("unsupported block size");
    }
    if (h.plane_count != 1 && h.plane_count != 3) {
        throw CorruptStream("plane count must be 1 or 3");
    }
    if (h.ycbcr() && h.plane_count != 3) {
        throw CorruptStream("YCbCr flag on a single-plane stream");
    }
    if (h.latent_gain_q == 0) {
        throw CorruptStream("zero latent gain");
    }
    const std::size_t group_count = r.u8();
    if (group_count == 0) {
        throw CorruptStream("stream declares no channel groups");
    }
    std::size_t channel_sum = 0;
    for (std::size_t g = 0; g < group_count; ++g) {
        const std::size_t ch = r.u16();
        const std::uint16_t eq = r.u16();
        if (ch == 0 || eq == 0 || eq > 5000) {
            throw CorruptStream("invalid channel group entry");
        }
        channel_sum += ch;
        h.groups.push_back({ch, eq / kEpsilonScale});
        h.epsilon_q.push_back(eq);
    }
    if (channel_sum != static_cast<std::size_t>(h.block_size) * h.block_size) {
        throw CorruptStream("channel groups do not cover the transform");
    }
    const std::size_t region_count = r.u8();
    if (region_count == 0 || region_count > kMaxRoiDepth + 1) {
        throw CorruptStream("invalid region count");
    }
    for (std::size_t i = 0; i < region_count; ++i) {
        const std::uint16_t q = r.u16();
        if (q == 0) {
            throw CorruptStream("zero region step");
        }
        h.region_scale_q.push_back(q);
    }
    const std::size_t lat_w = (h.width + h.block_size - 1) / h.block_size;
    const std::size_t lat_h = (h.height + h.block_size - 1) / h.block_size;
    h.rle_bytes = r.u32();
    h.labels = rle_decode(r.take(h.rle_bytes), lat_w, lat_h, region_count);
    std::size_t payload = 0;
    for (std::size_t i = 0; i < group_count * h.plane_count; ++i) {
        h.segment_lengths.push_back(r.u32());
        payload += h.segment_lengths.back();
    }
    h.size = r.pos();
    if (bytes.size() - h.size < payload) {
        throw CorruptStream("stream truncated: segment payloads incomplete");
    }
    if (bytes.size() - h.size > payload) {
        throw CorruptStream("trailing bytes after the last segment");
    }
    return h;
}

BppBreakdown bpp_breakdown(std::span<const std::uint8_t> bytes)
{
    const StreamHeader h = parse_header(bytes);
    BppBreakdown b;
    b.pixels = static_cast<std::size_t>(h.width) * h.height;
    b.file_bytes = bytes.size();
    b.header_bytes = h.size;
    const auto pixels = static_cast<double>(b.pixels);
    b.bpp_total = static_cast<double>(b.file_bytes) * 8.0 / pixels;
    b.bpp_header = static_cast<double>(b.header_bytes) * 8.0 / pixels;
    b.bpp_per_group.assign(h.group_count(), 0.0);
    std::vector<std::size_t> group_bytes(h.group_count(), 0);
    for (std::size_t i = 0; i < h.segment_lengths.size(); ++i) {
        b.segment_bytes.push_back(h.segment_lengths[i]);
        b.bpp_per_segment.push_back(static_cast<double>(h.segment_lengths[i]) * 8.0 / pixels);
        group_bytes[i % h.group_count()] += h.segment_lengths[i];
    }
    for (std::size_t g = 0; g < h.group_count(); ++g) {
        b.bpp_per_group[g] = static_cast<double>(group_bytes[g]) * 8.0 / pixels;
    }
    return b;
}

std::vector<std::uint8_t> encode(const Image& img, const GroupProfile& profile, const MaskPyramid* pyramid,
                                 const EncodeOptions& opts)
{
    Prepared p = prepare(img, profile, pyramid, opts);
    return finish_encode(p, opts);
}

std::vector<double> quantizer_inputs(const Image& img, const GroupProfile& profile, const MaskPyramid* pyramid,
                                     const EncodeOptions& opts)
{
    const Prepared p = prepare(img, profile, pyramid, opts);
    const double gain = p.header.latent_gain();
    std::vector<double> out;
    for (const auto& lat : p.latents) {
        const std::size_t n = lat.plane_size();
        for (std::size_t ch = 0; ch < lat.channels; ++ch) {
            for (std::size_t k = 0; k < n; ++k) {
                out.push_back(lat.data[ch * n + k] * gain / p.profile.region_scales[p.labels.labels[k]]);
            }
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_object_mode(const Image& img, const GroupProfile& profile, const MaskPyramid& pyramid,
                                             const ObjectBinding& binding, const EncodeOptions& opts)
{
    Prepared p = prepare(img, profile, &pyramid, opts);
    const std::size_t groups = p.profile.groups.size();
    const std::size_t regions = p.profile.region_scales.size();
    if (binding.region_of_group.size() != groups) {
        throw InvalidArgument("object binding must name one region per channel group (" + std::to_string(groups) +
                              " groups)");
    }
    if (groups < regions) {
        throw InvalidArgument("object mode needs at least as many channel groups as regions");
    }
    for (auto r : binding.region_of_group) {
        if (r >= regions) {
            throw InvalidArgument("object binding references region " + std::to_string(r) + " but the image has " +
                                  std::to_string(regions) + " regions");
        }
    }
    p.header.flags |= kFlagObjectMode;
    const auto offsets = p.profile.group_offsets();
    for (auto& lat : p.latents) {
        const std::size_t n = lat.plane_size();
        for (std::size_t g = 0; g < groups; ++g) {
            const auto region = binding.region_of_group[g];
            for (std::size_t ch = offsets[g]; ch < offsets[g + 1]; ++ch) {
                for (std::size_t k = 0; k < n; ++k) {
                    if (p.labels.labels[k] != region) {
                        lat.data[ch * n + k] = 0.0;
                    }
                }
            }
        }
    }
    return finish_encode(p, opts);
}

DecodedLatents decode_latents(std::span<const std::uint8_t> bytes, const std::vector<bool>& selected_groups,
                              unsigned threads)
{
    DecodedLatents out;
    out.header = parse_header(bytes);
    const StreamHeader& h = out.header;
    const std::size_t groups = h.group_count();
    if (selected_groups.size() != groups) {
        throw InvalidArgument("group selection does not match the stream's group count");
    }
    const GroupProfile profile = h.profile();
    const auto offsets = profile.group_offsets();
    const std::size_t channels = static_cast<std::size_t>(h.block_size) * h.block_size;

    std::vector<std::size_t> seg_offset(h.segment_lengths.size() + 1, h.size);
    for (std::size_t i = 0; i < h.segment_lengths.size(); ++i) {
        seg_offset[i + 1] = seg_offset[i] + h.segment_lengths[i];
    }

    std::vector<SymbolTensor> symbols(h.plane_count, SymbolTensor(channels, h.labels.height, h.labels.width));
    parallel_for(h.segment_lengths.size(), threads, [&](std::size_t idx) {
        const std::size_t pl = idx / groups;
        const std::size_t g = idx % groups;
        if (!selected_groups[g]) {
            return;
        }
        auto& sym = symbols[pl];
        const SegmentShape shape{offsets[g + 1] - offsets[g], sym.height, sym.width};
        Segment seg;
        seg.plane = pl;
        seg.group = g;
        seg.symbol_count = shape.count();
        seg.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(seg_offset[idx]),
                           bytes.begin() + static_cast<std::ptrdiff_t>(seg_offset[idx + 1]));
        const auto decoded = decode_segment(seg, shape.count(), shape, {g, groups});
        std::copy(decoded.begin(), decoded.end(), sym.data.begin() + static_cast<std::ptrdiff_t>(offsets[g] * sym.plane_size()));
    });

    for (const auto& sym : symbols) {
        out.planes.push_back(dequantize_latents(sym, profile, h.labels, h.latent_gain()));
    }
    return out;
}

std::vector<Plane> synthesize_planes(const DecodedLatents& latents)
{
    std::vector<Plane> planes;
    for (const auto& lat : latents.planes) {
        planes.push_back(synthesize(lat, latents.header.block_size));
    }
    return planes;
}

Image reconstruct(const DecodedLatents& latents)
{
    const StreamHeader& h = latents.header;
    const ColorSpace cs = h.plane_count == 1 ? ColorSpace::Gray : (h.ycbcr() ? ColorSpace::YCbCr601 : ColorSpace::RGB);
    Image img(h.width, h.height, cs);
    auto planes = synthesize_planes(latents);
    for (std::size_t p = 0; p < planes.size(); ++p) {
        img.planes[p] = crop(planes[p], h.width, h.height);
        for (auto& v : img.planes[p].samples) {
            v += kLevelShift;
        }
    }
    if (cs == ColorSpace::YCbCr601) {
        img = convert_colorspace(img, ColorSpace::RGB);
    }
    for (auto& plane : img.planes) {
        for (auto& v : plane.samples) {
            v = std::clamp(v, 0.0, 255.0);
        }
    }
    return img;
}

Image decode(std::span<const std::uint8_t> bytes, unsigned threads)
{
    const StreamHeader h = parse_header(bytes);
    return reconstruct(decode_latents(bytes, std::vector<bool>(h.group_count(), true), threads));
}

Image decode_progressive(std::span<const std::uint8_t> bytes, std::size_t upto_group, unsigned threads)
{
    const StreamHeader h = parse_header(bytes);
    if (upto_group < 1 || upto_group > h.group_count()) {
        throw InvalidArgument("progressive group index must lie in [1, " + std::to_string(h.group_count()) + "]");
    }
    return reconstruct(decode_latents(bytes, first_groups(upto_group, h.group_count()), threads));
}

Image decode_object(std::span<const std::uint8_t> bytes, const std::vector<std::size_t>& groups, unsigned threads)
{
    const StreamHeader h = parse_header(bytes);
    if (groups.empty()) {
        throw InvalidArgument("object decode needs at least one group");
    }
    std::vector<bool> sel(h.group_count(), false);
    for (auto g : groups) {
        if (g >= h.group_count()) {
            throw InvalidArgument("group " + std::to_string(g) + " does not exist in the stream");
        }
        sel[g] = true;
    }
    return reconstruct(decode_latents(bytes, sel, threads));
}

} // namespace hrc
