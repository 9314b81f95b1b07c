#include "hrc/metrics.hpp"

#include "hrc/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace hrc {

namespace {

constexpr double kPeak = 255.0;

void require_same_shape(const Image& a, const Image& b)
{
    a.validate();
    b.validate();
    if (a.width != b.width || a.height != b.height || a.plane_count() != b.plane_count()) {
        throw InvalidArgument("images differ in dimensions or plane count");
    }
}

double psnr_from_sse(double sse, std::size_t n)
{
    if (sse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(kPeak * kPeak / (sse / static_cast<double>(n)));
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * kPeak) * (0.01 * kPeak);
constexpr double kC2 = (0.03 * kPeak) * (0.03 * kPeak);
constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::array<double, kWindow> gaussian_window()
{
    std::array<double, kWindow> w{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += w[i];
    }
    for (auto& v : w) {
        v /= sum;
    }
    return w;
}

// Valid-mode separable filtering: output is (w - 10) x (h - 10).
Plane filter_valid(const Plane& p, const std::array<double, kWindow>& w)
{
    const std::size_t ow = p.width - kWindow + 1;
    const std::size_t oh = p.height - kWindow + 1;
    Plane tmp(ow, p.height);
    for (std::size_t y = 0; y < p.height; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += w[k] * p.at(x + k, y);
            }
            tmp.at(x, y) = acc;
        }
    }
    Plane out(ow, oh);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += w[k] * tmp.at(x, y + k);
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

struct ScaleTerms {
    double luminance;
    double contrast_structure;
};

ScaleTerms ssim_terms(const Plane& x, const Plane& y, const std::array<double, kWindow>& w)
{
    Plane xx(x.width, x.height), yy(x.width, x.height), xy(x.width, x.height);
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx.samples[i] = x.samples[i] * x.samples[i];
        yy.samples[i] = y.samples[i] * y.samples[i];
        xy.samples[i] = x.samples[i] * y.samples[i];
    }
    const Plane mx = filter_valid(x, w);
    const Plane my = filter_valid(y, w);
    const Plane sxx = filter_valid(xx, w);
    const Plane syy = filter_valid(yy, w);
    const Plane sxy = filter_valid(xy, w);
    double l_sum = 0.0;
    double cs_sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double ux = mx.samples[i];
        const double uy = my.samples[i];
        const double vx = sxx.samples[i] - ux * ux;
        const double vy = syy.samples[i] - uy * uy;
        const double cov = sxy.samples[i] - ux * uy;
        l_sum += (2.0 * ux * uy + kC1) / (ux * ux + uy * uy + kC1);
        cs_sum += (2.0 * cov + kC2) / (vx + vy + kC2);
    }
    const auto n = static_cast<double>(mx.size());
    return {l_sum / n, cs_sum / n};
}

// 2x2 mean with edge replication for odd sizes.
Plane halve(const Plane& p)
{
    Plane out((p.width + 1) / 2, (p.height + 1) / 2);
    for (std::size_t y = 0; y < out.height; ++y) {
        const std::size_t y0 = 2 * y;
        const std::size_t y1 = std::min(2 * y + 1, p.height - 1);
        for (std::size_t x = 0; x < out.width; ++x) {
            const std::size_t x0 = 2 * x;
            const std::size_t x1 = std::min(2 * x + 1, p.width - 1);
            out.at(x, y) = 0.25 * (p.at(x0, y0) + p.at(x1, y0) + p.at(x0, y1) + p.at(x1, y1));
        }
    }
    return out;
}

} // namespace

double psnr(const Image& a, const Image& b)
{
    require_same_shape(a, b);
    double sse = 0.0;
    for (std::size_t p = 0; p < a.plane_count(); ++p) {
        for (std::size_t i = 0; i < a.pixel_count(); ++i) {
            const double d = a.planes[p].samples[i] - b.planes[p].samples[i];
            sse += d * d;
        }
    }
    return psnr_from_sse(sse, a.pixel_count() * a.plane_count());
}

std::optional<double> psnr_region(const Image& a, const Image& b, const std::vector<std::uint8_t>& labels,
                                  std::uint8_t label)
{
    require_same_shape(a, b);
    if (labels.size() != a.pixel_count()) {
        throw InvalidArgument("label map does not match image");
    }
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != label) {
            continue;
        }
        for (std::size_t p = 0; p < a.plane_count(); ++p) {
            const double d = a.planes[p].samples[i] - b.planes[p].samples[i];
            sse += d * d;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return psnr_from_sse(sse, n);
}

double msssim(const Image& a, const Image& b)
{
    require_same_shape(a, b);
    const std::size_t min_side = std::min(a.width, a.height);
    if (min_side < static_cast<std::size_t>(kWindow)) {
        throw InvalidArgument("MS-SSIM needs at least 11x11 pixels");
    }
    std::size_t scales = 1;
    while (scales < kScaleWeights.size() && (min_side >> scales) >= static_cast<std::size_t>(kWindow)) {
        ++scales;
    }
    double weight_sum = 0.0;
    for (std::size_t s = 0; s < scales; ++s) {
        weight_sum += kScaleWeights[s];
    }
    const auto window = gaussian_window();
    Plane x = luma(a);
    Plane y = luma(b);
    double result = 1.0;
    for (std::size_t s = 0; s < scales; ++s) {
        const ScaleTerms t = ssim_terms(x, y, window);
        const double weight = kScaleWeights[s] / weight_sum;
        double term = t.contrast_structure;
        if (s + 1 == scales) {
            term *= t.luminance;
        }
        result *= std::pow(std::max(term, 0.0), weight);
        if (s + 1 < scales) {
            x = halve(x);
            y = halve(y);
        }
    }
    return std::clamp(result, 0.0, 1.0);
}

QualityReport measure_quality(const Image& original, const Image& decoded, double bpp,
                              const std::vector<std::uint8_t>& labels, std::size_t region_count)
{
    QualityReport r;
    r.psnr = psnr(original, decoded);
    if (std::min(original.width, original.height) >= static_cast<std::size_t>(kWindow)) {
        r.msssim = msssim(original, decoded);
    }
    r.bpp = bpp;
    for (std::size_t l = 0; l < region_count; ++l) {
        RegionQuality q;
        q.label = static_cast<std::uint8_t>(l);
        q.pixel_count = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), q.label));
        q.psnr = psnr_region(original, decoded, labels, q.label);
        r.per_region.push_back(q);
    }
    return r;
}

void LatentHistograms::add(double y)
{
    const double mag = std::fabs(y);
    const auto abs_bin = mag >= kAbsRange ? kAbsBins : static_cast<std::size_t>(mag / kAbsBinWidth);
    ++abs_counts[std::min(abs_bin, kAbsBins)];
    const double frac = y - std::floor(y);
    ++frac_counts[std::min(static_cast<std::size_t>(frac * kFracBins), kFracBins - 1)];
    ++total;
}

void LatentHistograms::merge(const LatentHistograms& other)
{
    for (std::size_t i = 0; i < abs_counts.size(); ++i) {
        abs_counts[i] += other.abs_counts[i];
    }
    for (std::size_t i = 0; i < frac_counts.size(); ++i) {
        frac_counts[i] += other.frac_counts[i];
    }
    total += other.total;
}

double LatentHistograms::abs_mass_below(double limit) const
{
    if (total == 0) {
        return 0.0;
    }
    const auto bins = std::min(static_cast<std::size_t>(limit / kAbsBinWidth), kAbsBins);
    std::size_t below = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        below += abs_counts[i];
    }
    return static_cast<double>(below) / static_cast<double>(total);
}

std::string LatentHistograms::to_json() const
{
    nlohmann::json j;
    j["total"] = total;
    j["abs"] = {{"bin_width", kAbsBinWidth}, {"range", kAbsRange}, {"counts", abs_counts}};
    j["frac"] = {{"bins", kFracBins}, {"convention", "y - floor(y)"}, {"counts", frac_counts}};
    return j.dump(2);
}

std::string LatentHistograms::to_csv() const
{
    std::ostringstream out;
    out << "histogram,bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < kAbsBins; ++i) {
        out << "abs," << i * kAbsBinWidth << ',' << (i + 1) * kAbsBinWidth << ',' << abs_counts[i] << '\n';
    }
    out << "abs," << kAbsRange << ",inf," << abs_counts[kAbsBins] << '\n';
    for (std::size_t i = 0; i < kFracBins; ++i) {
        out << "frac," << static_cast<double>(i) / kFracBins << ',' << static_cast<double>(i + 1) / kFracBins << ','
            << frac_counts[i] << '\n';
    }
    return out.str();
}

LatentHistograms latent_histograms(std::span<const double> values)
{
    if (values.empty()) {
        throw InvalidArgument("histogram of an empty tensor");
    }
    LatentHistograms h;
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("non-finite latent value");
        }
        h.add(v);
    }
    return h;
}

} // namespace hrc
