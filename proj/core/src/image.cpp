#include "hrc/image.hpp"

#include "hrc/error.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

namespace hrc {

namespace {

// BT.601 luma weights; chroma scale factors follow from them.
constexpr double kKr = 0.299;
constexpr double kKb = 0.114;
constexpr double kKg = 1.0 - kKr - kKb;
constexpr double kChromaOffset = 128.0;

std::string lower_extension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::uint8_t to_byte(double v)
{
    if (!(v > 0.0)) {
        return 0;
    }
    if (v >= 255.0) {
        return 255;
    }
    return static_cast<std::uint8_t>(std::lround(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Image from_interleaved(const std::uint8_t* data, std::size_t w, std::size_t h, std::size_t channels)
{
    Image img(w, h, channels == 1 ? ColorSpace::Gray : ColorSpace::RGB);
    for (std::size_t i = 0; i < w * h; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            img.planes[c].samples[i] = data[i * channels + c];
        }
    }
    return img;
}

std::vector<std::uint8_t> to_interleaved(const Image& img)
{
    const std::size_t n = img.pixel_count();
    const std::size_t channels = img.plane_count();
    std::vector<std::uint8_t> out(n * channels);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            out[i * channels + c] = to_byte(img.planes[c].samples[i]);
        }
    }
    return out;
}

// Netpbm header token reader: skips whitespace and '#' comments.
class PnmHeader {
public:
    explicit PnmHeader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    unsigned long next_number()
    {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            ++pos_;
        }
        if (start == pos_) {
            throw FormatError("malformed PNM header");
        }
        std::string token(bytes_.begin() + static_cast<std::ptrdiff_t>(start),
                          bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
        if (token.size() > 9) {
            throw FormatError("PNM header value too large");
        }
        return std::stoul(token);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset()
    {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw FormatError("malformed PNM header");
        }
        return pos_ + 1;
    }

private:
    void skip_space()
    {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

Image load_pnm(const std::vector<std::uint8_t>& bytes)
{
    const std::size_t channels = bytes[1] == '5' ? 1 : 3;
    PnmHeader header(bytes);
    const auto w = header.next_number();
    const auto h = header.next_number();
    const auto maxval = header.next_number();
    if (w == 0 || h == 0) {
        throw FormatError("zero image dimension");
    }
    if (maxval != 255) {
        throw FormatError("only maxval 255 is supported");
    }
    const std::size_t offset = header.raster_offset();
    const std::size_t need = static_cast<std::size_t>(w) * h * channels;
    if (bytes.size() < offset + need) {
        throw FormatError("truncated PNM raster");
    }
    return from_interleaved(bytes.data() + offset, w, h, channels);
}

Image load_png(const std::filesystem::path& path)
{
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
        std::string msg = png.message;
        png_image_free(&png);
        throw FormatError("cannot decode PNG " + path.string() + ": " + msg);
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const std::size_t w = png.width;
    const std::size_t h = png.height;
    if (w == 0 || h == 0) {
        png_image_free(&png);
        throw FormatError("zero image dimension");
    }
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw FormatError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return from_interleaved(buffer.data(), w, h, color ? 3 : 1);
}

void write_file(const std::filesystem::path& path, const std::string& header, const std::vector<std::uint8_t>& raster)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

} // namespace

Image::Image(std::size_t w, std::size_t h, ColorSpace cs, double fill) : width(w), height(h), colorspace(cs)
{
    planes.assign(planes_for(cs), Plane(w, h, fill));
}

void Image::validate() const
{
    if (plane_count() != planes_for(colorspace)) {
        throw InvalidArgument("plane count does not match colorspace");
    }
    for (const auto& p : planes) {
        if (p.width != width || p.height != height || p.samples.size() != width * height) {
            throw InvalidArgument("plane geometry does not match image dimensions");
        }
    }
}

std::size_t planes_for(ColorSpace cs)
{
    return cs == ColorSpace::Gray ? 1 : 3;
}

Image load_image(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
        return load_png(path);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        return load_pnm(bytes);
    }
    throw FormatError("unsupported image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path)
{
    img.validate();
    if (img.pixel_count() == 0) {
        throw InvalidArgument("cannot save an empty image");
    }
    const Image* src = &img;
    Image converted;
    if (img.colorspace == ColorSpace::YCbCr601) {
        converted = convert_colorspace(img, ColorSpace::RGB);
        src = &converted;
    }
    const auto raster = to_interleaved(*src);
    const bool gray = src->plane_count() == 1;
    const std::string ext = lower_extension(path);

    if (ext == ".png") {
        png_image png{};
        png.version = PNG_IMAGE_VERSION;
        png.width = static_cast<png_uint_32>(src->width);
        png.height = static_cast<png_uint_32>(src->height);
        png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
        if (!png_image_write_to_file(&png, path.string().c_str(), 0, raster.data(), 0, nullptr)) {
            std::string msg = png.message;
            png_image_free(&png);
            throw IoError("cannot write PNG " + path.string() + ": " + msg);
        }
        return;
    }
    if (ext == ".pgm" || ext == ".ppm") {
        if ((ext == ".pgm") != gray) {
            throw InvalidArgument("extension " + ext + " does not match plane count");
        }
        std::ostringstream header;
        header << (gray ? "P5" : "P6") << '\n' << src->width << ' ' << src->height << "\n255\n";
        write_file(path, header.str(), raster);
        return;
    }
    throw FormatError("unsupported output extension: " + ext);
}

Image convert_colorspace(const Image& img, ColorSpace target)
{
    img.validate();
    if (img.colorspace == target || img.colorspace == ColorSpace::Gray) {
        return img;
    }
    if (target == ColorSpace::Gray) {
        throw InvalidArgument("use luma() to reduce a color image to one plane");
    }
    Image out(img.width, img.height, target);
    const auto& p0 = img.planes[0].samples;
    const auto& p1 = img.planes[1].samples;
    const auto& p2 = img.planes[2].samples;
    auto& o0 = out.planes[0].samples;
    auto& o1 = out.planes[1].samples;
    auto& o2 = out.planes[2].samples;
    if (target == ColorSpace::YCbCr601) {
        for (std::size_t i = 0; i < p0.size(); ++i) {
            const double r = p0[i], g = p1[i], b = p2[i];
            const double y = kKr * r + kKg * g + kKb * b;
            o0[i] = y;
            o1[i] = (b - y) / (2.0 * (1.0 - kKb)) + kChromaOffset;
            o2[i] = (r - y) / (2.0 * (1.0 - kKr)) + kChromaOffset;
        }
    } else {
        for (std::size_t i = 0; i < p0.size(); ++i) {
            const double y = p0[i];
            const double r = y + 2.0 * (1.0 - kKr) * (p2[i] - kChromaOffset);
            const double b = y + 2.0 * (1.0 - kKb) * (p1[i] - kChromaOffset);
            o0[i] = r;
            o1[i] = (y - kKr * r - kKb * b) / kKg;
            o2[i] = b;
        }
    }
    return out;
}

Plane luma(const Image& img)
{
    img.validate();
    if (img.colorspace != ColorSpace::RGB) {
        return img.planes[0];
    }
    Plane y(img.width, img.height);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y.samples[i] = kKr * img.planes[0].samples[i] + kKg * img.planes[1].samples[i] + kKb * img.planes[2].samples[i];
    }
    return y;
}

Plane pad_to_multiple(const Plane& plane, std::size_t block)
{
    if (block == 0 || plane.width == 0 || plane.height == 0) {
        throw InvalidArgument("pad_to_multiple: empty plane or zero block");
    }
    const std::size_t w = (plane.width + block - 1) / block * block;
    const std::size_t h = (plane.height + block - 1) / block * block;
    Plane out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t sy = std::min(y, plane.height - 1);
        for (std::size_t x = 0; x < w; ++x) {
            out.at(x, y) = plane.at(std::min(x, plane.width - 1), sy);
        }
    }
    return out;
}

Plane crop(const Plane& plane, std::size_t width, std::size_t height)
{
    if (width > plane.width || height > plane.height) {
        throw InvalidArgument("crop larger than source plane");
    }
    Plane out(width, height);
    for (std::size_t y = 0; y < height; ++y) {
        std::copy_n(plane.samples.begin() + static_cast<std::ptrdiff_t>(y * plane.width), width,
                    out.samples.begin() + static_cast<std::ptrdiff_t>(y * width));
    }
    return out;
}

void save_indexed_png(const std::vector<std::uint8_t>& indices, std::size_t width, std::size_t height,
                      const std::vector<std::uint32_t>& palette_rgb, const std::filesystem::path& path)
{
    if (indices.size() != width * height || palette_rgb.empty() || palette_rgb.size() > 256) {
        throw InvalidArgument("save_indexed_png: bad raster or palette");
    }
    std::vector<std::uint8_t> colormap;
    for (auto rgb : palette_rgb) {
        colormap.push_back(static_cast<std::uint8_t>(rgb >> 16));
        colormap.push_back(static_cast<std::uint8_t>(rgb >> 8));
        colormap.push_back(static_cast<std::uint8_t>(rgb));
    }
    for (auto idx : indices) {
        if (idx >= palette_rgb.size()) {
            throw InvalidArgument("save_indexed_png: index outside palette");
        }
    }
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = PNG_FORMAT_RGB_COLORMAP;
    png.colormap_entries = static_cast<png_uint_32>(palette_rgb.size());
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, indices.data(), 0, colormap.data())) {
        std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot write PNG " + path.string() + ": " + msg);
    }
}

} // namespace hrc
