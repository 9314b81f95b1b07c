#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace hrc {

enum class ColorSpace : std::uint8_t { Gray, RGB, YCbCr601 };

/// A single raster of real-valued samples in row-major order.
struct Plane {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> samples;

    Plane() = default;
    Plane(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), samples(w * h, fill) {}

    double& at(std::size_t x, std::size_t y) { return samples[y * width + x]; }
    double at(std::size_t x, std::size_t y) const { return samples[y * width + x]; }
    std::size_t size() const { return samples.size(); }
};

/// Planar image with one (Gray) or three (RGB / YCbCr601) planes of samples nominally in [0, 255].
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    ColorSpace colorspace = ColorSpace::Gray;
    std::vector<Plane> planes;

    Image() = default;
    Image(std::size_t w, std::size_t h, ColorSpace cs, double fill = 0.0);

    std::size_t pixel_count() const { return width * height; }
    std::size_t plane_count() const { return planes.size(); }

    /// Throws InvalidArgument when plane count or plane geometry disagree with the header fields.
    void validate() const;
};

std::size_t planes_for(ColorSpace cs);

/// Loads PNG, binary PGM (P5) or binary PPM (P6). Result is Gray or RGB.
Image load_image(const std::filesystem::path& path);

/// Writes by extension: .png, .pgm, .ppm. Samples are clamped to [0,255] and rounded.
void save_image(const Image& img, const std::filesystem::path& path);

/// BT.601 full-range conversion. Gray passes through unchanged.
Image convert_colorspace(const Image& img, ColorSpace target);

/// Luma plane: plane 0 for Gray/YCbCr, BT.601 weighted sum for RGB.
Plane luma(const Image& img);

/// Edge-replicates to the next multiple of `block` in each dimension.
Plane pad_to_multiple(const Plane& plane, std::size_t block);
Plane crop(const Plane& plane, std::size_t width, std::size_t height);

/// Writes an 8-bit palette PNG. `indices` holds one palette index per pixel.
void save_indexed_png(const std::vector<std::uint8_t>& indices, std::size_t width, std::size_t height,
                      const std::vector<std::uint32_t>& palette_rgb, const std::filesystem::path& path);

} // namespace hrc
