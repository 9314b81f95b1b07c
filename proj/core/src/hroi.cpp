#include "hrc/hroi.hpp"

#include "hrc/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <mutex>

namespace hrc {

namespace {

constexpr std::size_t kThumb = 64;

// FFTW's planner is not thread-safe.
std::mutex& fftw_mutex()
{
    static std::mutex m;
    return m;
}

// Box-filter resampling: each output pixel averages the source area it covers.
Plane resize_area(const Plane& src, std::size_t w, std::size_t h)
{
    Plane out(w, h);
    const double sx = static_cast<double>(src.width) / static_cast<double>(w);
    const double sy = static_cast<double>(src.height) / static_cast<double>(h);
    for (std::size_t oy = 0; oy < h; ++oy) {
        const double y0 = oy * sy;
        const double y1 = y0 + sy;
        for (std::size_t ox = 0; ox < w; ++ox) {
            const double x0 = ox * sx;
            const double x1 = x0 + sx;
            double acc = 0.0;
            double area = 0.0;
            for (auto y = static_cast<std::size_t>(y0); y < src.height && static_cast<double>(y) < y1; ++y) {
                const double wy = std::min(y1, y + 1.0) - std::max(y0, static_cast<double>(y));
                for (auto x = static_cast<std::size_t>(x0); x < src.width && static_cast<double>(x) < x1; ++x) {
                    const double wx = std::min(x1, x + 1.0) - std::max(x0, static_cast<double>(x));
                    acc += wx * wy * src.at(x, y);
                    area += wx * wy;
                }
            }
            out.at(ox, oy) = area > 0.0 ? acc / area : 0.0;
        }
    }
    return out;
}

Plane resize_bilinear(const Plane& src, std::size_t w, std::size_t h)
{
    Plane out(w, h);
    const double sx = static_cast<double>(src.width) / static_cast<double>(w);
    const double sy = static_cast<double>(src.height) / static_cast<double>(h);
    for (std::size_t oy = 0; oy < h; ++oy) {
        const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, src.height - 1);
        const double ty = fy - y0;
        for (std::size_t ox = 0; ox < w; ++ox) {
            const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, src.width - 1);
            const double tx = fx - x0;
            const double top = src.at(x0, y0) * (1 - tx) + src.at(x1, y0) * tx;
            const double bot = src.at(x0, y1) * (1 - tx) + src.at(x1, y1) * tx;
            out.at(ox, oy) = top * (1 - ty) + bot * ty;
        }
    }
    return out;
}

std::size_t wrap(std::ptrdiff_t i, std::size_t n)
{
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

// 3x3 mean with circular indexing (the spectrum is periodic).
std::vector<double> box3_circular(const std::vector<double>& v, std::size_t n)
{
    std::vector<double> out(v.size());
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    acc += v[wrap(static_cast<std::ptrdiff_t>(y) + dy, n) * n +
                             wrap(static_cast<std::ptrdiff_t>(x) + dx, n)];
                }
            }
            out[y * n + x] = acc / 9.0;
        }
    }
    return out;
}

// Separable Gaussian with circular indexing; the saliency raster is periodic.
std::vector<double> gaussian_blur(const std::vector<double>& v, std::size_t n, double sigma, int radius)
{
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (auto& k : kernel) {
        k /= sum;
    }
    auto wrapi = [n](std::ptrdiff_t i) { return wrap(i, n); };
    std::vector<double> tmp(v.size());
    std::vector<double> out(v.size());
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[i + radius] * v[y * n + wrapi(static_cast<std::ptrdiff_t>(x) + i)];
            }
            tmp[y * n + x] = acc;
        }
    }
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[i + radius] * tmp[wrapi(static_cast<std::ptrdiff_t>(y) + i) * n + x];
            }
            out[y * n + x] = acc;
        }
    }
    return out;
}

// Spectral residual of an n x n real raster; returns |IFFT(exp(R + iP))|^2.
// The mean is removed first and empty frequencies stay empty, so a flat raster has no response.
std::vector<double> spectral_residual(const Plane& thumb)
{
    const std::size_t n = thumb.width;
    std::vector<std::complex<double>> spec(n * n);
    std::vector<std::complex<double>> back(n * n);
    fftw_plan fwd;
    fftw_plan inv;
    {
        std::lock_guard lock(fftw_mutex());
        fwd = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), reinterpret_cast<fftw_complex*>(back.data()),
                               reinterpret_cast<fftw_complex*>(spec.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()),
                               reinterpret_cast<fftw_complex*>(back.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    double mean = 0.0;
    for (double v : thumb.samples) {
        mean += v;
    }
    mean /= static_cast<double>(n * n);
    for (std::size_t i = 0; i < n * n; ++i) {
        back[i] = thumb.samples[i] - mean;
    }
    fftw_execute(fwd);

    double peak = 0.0;
    for (const auto& c : spec) {
        peak = std::max(peak, std::abs(c));
    }
    const double floor_amp = 1e-9 * std::max(peak, 1.0);

    std::vector<double> log_amp(n * n);
    for (std::size_t i = 0; i < n * n; ++i) {
        log_amp[i] = std::log1p(std::abs(spec[i]));
    }
    const auto smooth = box3_circular(log_amp, n);
    for (std::size_t i = 0; i < n * n; ++i) {
        const bool empty = i == 0 || std::abs(spec[i]) <= floor_amp;
        spec[i] = empty ? std::complex<double>{} : std::polar(std::exp(log_amp[i] - smooth[i]), std::arg(spec[i]));
    }
    fftw_execute(inv);
    {
        std::lock_guard lock(fftw_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    std::vector<double> power(n * n);
    const double scale = 1.0 / static_cast<double>(n * n);
    for (std::size_t i = 0; i < n * n; ++i) {
        power[i] = std::norm(back[i] * scale);
    }
    return power;
}

// Pixels reachable within `radius` (Euclidean disc). Out-of-bounds neighbours are ignored.
BinaryMask morph(const BinaryMask& in, std::size_t radius, bool dilate)
{
    if (radius == 0) {
        return in;
    }
    const auto r = static_cast<std::ptrdiff_t>(radius);
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> disc;
    for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
        for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
            if (dx * dx + dy * dy <= r * r) {
                disc.emplace_back(dx, dy);
            }
        }
    }
    BinaryMask out(in.width, in.height);
    const auto w = static_cast<std::ptrdiff_t>(in.width);
    const auto h = static_cast<std::ptrdiff_t>(in.height);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            bool hit = !dilate;
            for (const auto& [dx, dy] : disc) {
                const auto nx = x + dx;
                const auto ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) {
                    continue;
                }
                const bool v = in.bits[static_cast<std::size_t>(ny * w + nx)] != 0;
                if (dilate && v) {
                    hit = true;
                    break;
                }
                if (!dilate && !v) {
                    hit = false;
                    break;
                }
            }
            out.bits[static_cast<std::size_t>(y * w + x)] = hit ? 1 : 0;
        }
    }
    return out;
}

void remove_small_components(BinaryMask& mask, std::size_t min_pixels)
{
    if (min_pixels <= 1) {
        return;
    }
    const std::size_t w = mask.width;
    const std::size_t h = mask.height;
    std::vector<std::uint8_t> seen(mask.bits.size(), 0);
    std::vector<std::size_t> stack;
    std::vector<std::size_t> component;
    for (std::size_t start = 0; start < mask.bits.size(); ++start) {
        if (!mask.bits[start] || seen[start]) {
            continue;
        }
        component.clear();
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            component.push_back(p);
            const std::size_t px = p % w;
            const std::size_t py = p / w;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if ((dx == 0 && dy == 0) || (px == 0 && dx < 0) || (py == 0 && dy < 0) ||
                        (px + 1 == w && dx > 0) || (py + 1 == h && dy > 0)) {
                        continue;
                    }
                    const std::size_t q = (py + dy) * w + (px + dx);
                    if (mask.bits[q] && !seen[q]) {
                        seen[q] = 1;
                        stack.push_back(q);
                    }
                }
            }
        }
        if (component.size() < min_pixels) {
            for (auto p : component) {
                mask.bits[p] = 0;
            }
        }
    }
}

std::vector<std::uint8_t> labels_from_masks(const std::vector<BinaryMask>& fg, std::size_t n)
{
    std::vector<std::uint8_t> labels(n, static_cast<std::uint8_t>(fg.size()));
    for (std::size_t k = fg.size(); k-- > 0;) {
        for (std::size_t i = 0; i < n; ++i) {
            if (fg[k].bits[i]) {
                labels[i] = static_cast<std::uint8_t>(k);
            }
        }
    }
    return labels;
}

} // namespace

std::size_t BinaryMask::count() const
{
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

MaskPyramid MaskPyramid::background_only(std::size_t width, std::size_t height)
{
    return from_labels(width, height, 0, std::vector<std::uint8_t>(width * height, 0));
}

MaskPyramid MaskPyramid::from_labels(std::size_t width, std::size_t height, std::size_t depth,
                                     std::vector<std::uint8_t> label_map)
{
    if (depth > kMaxRoiDepth) {
        throw InvalidArgument("region depth exceeds 3");
    }
    if (label_map.size() != width * height) {
        throw InvalidArgument("label map size does not match dimensions");
    }
    MaskPyramid pyr;
    pyr.width = width;
    pyr.height = height;
    pyr.foreground.assign(depth, BinaryMask(width, height));
    pyr.background = BinaryMask(width, height);
    for (std::size_t i = 0; i < label_map.size(); ++i) {
        const auto l = label_map[i];
        if (l > depth) {
            throw InvalidArgument("label outside pyramid depth");
        }
        if (l == depth) {
            pyr.background.bits[i] = 1;
        } else {
            pyr.foreground[l].bits[i] = 1;
        }
    }
    pyr.label_map = std::move(label_map);
    return pyr;
}

void MaskPyramid::validate() const
{
    const std::size_t n = width * height;
    if (label_map.size() != n || background.bits.size() != n) {
        throw InvalidArgument("pyramid masks do not match its dimensions");
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t owners = background.bits[i] ? 1 : 0;
        std::size_t owner = depth();
        for (std::size_t k = 0; k < depth(); ++k) {
            if (foreground[k].bits.size() != n) {
                throw InvalidArgument("pyramid masks do not match its dimensions");
            }
            if (foreground[k].bits[i]) {
                ++owners;
                owner = k;
            }
        }
        if (owners != 1 || label_map[i] != owner) {
            throw InvalidArgument("pyramid masks do not partition the image");
        }
    }
}

SaliencyMap saliency_spectral_residual(const Image& img)
{
    if (img.pixel_count() == 0) {
        throw InvalidArgument("saliency of an empty image");
    }
    const Plane y = luma(img);
    const Plane thumb = resize_area(y, kThumb, kThumb);
    auto power = gaussian_blur(spectral_residual(thumb), kThumb, 3.0, 4);

    const auto [lo, hi] = std::minmax_element(power.begin(), power.end());
    const double min_v = *lo;
    const double range = *hi - *lo;
    Plane norm(kThumb, kThumb);
    if (range > 1e-9 * std::max(std::fabs(*hi), 1e-300)) {
        for (std::size_t i = 0; i < power.size(); ++i) {
            norm.samples[i] = (power[i] - min_v) / range;
        }
    }
    const Plane full = resize_bilinear(norm, img.width, img.height);
    SaliencyMap out{img.width, img.height, full.samples};
    for (auto& v : out.values) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

BinaryMask binarize(const SaliencyMap& sal, const BinarizeParams& params)
{
    if (!(params.threshold > 0.0 && params.threshold < 1.0)) {
        throw InvalidArgument("threshold must lie in (0, 1)");
    }
    if (!(params.min_area_frac >= 0.0 && params.min_area_frac <= 0.5)) {
        throw InvalidArgument("min_area_frac must lie in [0, 0.5]");
    }
    BinaryMask mask(sal.width, sal.height);
    for (std::size_t i = 0; i < sal.values.size(); ++i) {
        mask.bits[i] = sal.values[i] >= params.threshold ? 1 : 0;
    }
    mask = morph(morph(mask, params.morph_radius, true), params.morph_radius, false);
    mask = morph(morph(mask, params.morph_radius, false), params.morph_radius, true);
    const auto min_pixels =
        static_cast<std::size_t>(std::ceil(params.min_area_frac * static_cast<double>(sal.width * sal.height)));
    remove_small_components(mask, min_pixels);
    return mask;
}

MaskPyramid build_pyramid(const Image& img, std::size_t depth, const SaliencyOperator& saliency,
                          const BinarizeParams& params)
{
    img.validate();
    if (depth < 1 || depth > kMaxRoiDepth) {
        throw InvalidArgument("ROI depth must be 1, 2 or 3");
    }
    const std::size_t n = img.pixel_count();
    std::vector<BinaryMask> fg;
    std::vector<std::uint8_t> claimed(n, 0);
    std::size_t claimed_count = 0;
    Image working = img;
    for (std::size_t level = 0; level < depth && claimed_count < n; ++level) {
        const SaliencyMap sal = saliency(working);
        if (sal.width != img.width || sal.height != img.height || sal.values.size() != n) {
            throw InvalidArgument("saliency operator returned a map of the wrong size");
        }
        BinaryMask mask = binarize(sal, params);
        for (std::size_t i = 0; i < n; ++i) {
            if (claimed[i]) {
                mask.bits[i] = 0;
            }
        }
        if (mask.empty()) {
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (mask.bits[i]) {
                claimed[i] = 1;
                ++claimed_count;
            }
        }
        fg.push_back(std::move(mask));
        if (claimed_count == n) {
            break;
        }
        for (std::size_t p = 0; p < img.plane_count(); ++p) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!claimed[i]) {
                    sum += img.planes[p].samples[i];
                }
            }
            const double fill = sum / static_cast<double>(n - claimed_count);
            for (std::size_t i = 0; i < n; ++i) {
                working.planes[p].samples[i] = claimed[i] ? fill : img.planes[p].samples[i];
            }
        }
    }
    return MaskPyramid::from_labels(img.width, img.height, fg.size(), labels_from_masks(fg, n));
}

MaskPyramid masks_to_pyramid(const std::vector<BinaryMask>& masks, std::size_t width, std::size_t height)
{
    if (masks.size() > kMaxRoiDepth) {
        throw InvalidArgument("at most 3 region masks are supported");
    }
    for (const auto& m : masks) {
        if (m.width != width || m.height != height || m.bits.size() != width * height) {
            throw InvalidArgument("mask dimensions do not match the image");
        }
    }
    return MaskPyramid::from_labels(width, height, masks.size(), labels_from_masks(masks, width * height));
}

MaskPyramid load_external_masks(const std::vector<std::filesystem::path>& paths, std::size_t width,
                                std::size_t height)
{
    if (paths.size() > kMaxRoiDepth) {
        throw InvalidArgument("at most 3 region masks are supported");
    }
    std::vector<BinaryMask> masks;
    for (const auto& path : paths) {
        const Image m = load_image(path);
        if (m.width != width || m.height != height) {
            throw InvalidArgument("mask " + path.string() + " does not match the image dimensions");
        }
        const Plane y = luma(m);
        BinaryMask mask(width, height);
        for (std::size_t i = 0; i < y.size(); ++i) {
            mask.bits[i] = y.samples[i] > 0.0 ? 1 : 0;
        }
        masks.push_back(std::move(mask));
    }
    return masks_to_pyramid(masks, width, height);
}

LabelGrid downsample_labels(const MaskPyramid& pyr, std::size_t block_size)
{
    if (block_size == 0 || pyr.width % block_size != 0 || pyr.height % block_size != 0) {
        throw InvalidArgument("pyramid dimensions must be multiples of the block size");
    }
    LabelGrid grid(pyr.width / block_size, pyr.height / block_size);
    std::array<std::size_t, kMaxRoiDepth + 1> votes{};
    for (std::size_t bi = 0; bi < grid.height; ++bi) {
        for (std::size_t bj = 0; bj < grid.width; ++bj) {
            votes.fill(0);
            for (std::size_t y = bi * block_size; y < (bi + 1) * block_size; ++y) {
                for (std::size_t x = bj * block_size; x < (bj + 1) * block_size; ++x) {
                    const auto l = pyr.label_map[y * pyr.width + x];
                    if (l > kMaxRoiDepth) {
                        throw InvalidArgument("label outside pyramid depth");
                    }
                    ++votes[l];
                }
            }
            // max_element returns the first maximum, i.e. the smallest label on ties.
            grid.labels[bi * grid.width + bj] =
                static_cast<std::uint8_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        }
    }
    return grid;
}

MaskPyramid pad_pyramid(const MaskPyramid& pyr, std::size_t block_size)
{
    if (block_size == 0 || pyr.width == 0 || pyr.height == 0) {
        throw InvalidArgument("pad_pyramid: empty pyramid or zero block");
    }
    const std::size_t w = (pyr.width + block_size - 1) / block_size * block_size;
    const std::size_t h = (pyr.height + block_size - 1) / block_size * block_size;
    std::vector<std::uint8_t> labels(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            labels[y * w + x] = pyr.label_map[std::min(y, pyr.height - 1) * pyr.width + std::min(x, pyr.width - 1)];
        }
    }
    return MaskPyramid::from_labels(w, h, pyr.depth(), std::move(labels));
}

} // namespace hrc
