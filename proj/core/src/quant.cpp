#include "hrc/quant.hpp"

#include "hrc/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace hrc {

double PhiParams::operator()(double t) const
{
    if (identity) {
        return t;
    }
    return std::exp(a * t + b) + c;
}

PhiParams solve_phi(double epsilon)
{
    if (!(epsilon > 0.0 && epsilon <= 0.5)) {
        throw InvalidArgument("epsilon must lie in (0, 0.5]");
    }
    PhiParams p;
    p.epsilon = epsilon;
    if (epsilon == 0.5) {
        return p;
    }
    // With w = exp(a/2) and u = exp(b), the constraints reduce to u(w - 1) = eps and u(w^2 - 1) = 1.
    const double v = 1.0 / epsilon - 1.0;
    const double u = epsilon / (v - 1.0);
    p.identity = false;
    p.a = 2.0 * std::log(v);
    p.b = std::log(u);
    p.c = -u;
    p.threshold = std::log1p(0.5 / u) / p.a;
    return p;
}

std::int32_t quantize_scalar(double y, const PhiParams& phi)
{
    if (!std::isfinite(y)) {
        throw InvalidArgument("cannot quantize a non-finite value");
    }
    const double mag = std::fabs(y);
    if (mag >= static_cast<double>(std::numeric_limits<std::int32_t>::max() - 1)) {
        throw InvalidArgument("value out of symbol range");
    }
    const double whole = std::floor(mag);
    const auto q = static_cast<std::int32_t>(whole) + (mag - whole >= phi.threshold ? 1 : 0);
    return y < 0.0 ? -q : q;
}

std::size_t GroupProfile::total_channels() const
{
    return std::accumulate(groups.begin(), groups.end(), std::size_t{0},
                           [](std::size_t acc, const ChannelGroup& g) { return acc + g.channels; });
}

std::vector<std::size_t> GroupProfile::group_offsets() const
{
    std::vector<std::size_t> offsets{0};
    for (const auto& g : groups) {
        offsets.push_back(offsets.back() + g.channels);
    }
    return offsets;
}

void GroupProfile::validate(std::size_t channels) const
{
    if (groups.empty()) {
        throw InvalidArgument("profile '" + name + "' has no channel groups");
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].channels == 0) {
            throw InvalidArgument("profile '" + name + "' has an empty channel group");
        }
        if (!(groups[i].epsilon > 0.0 && groups[i].epsilon <= 0.5)) {
            throw InvalidArgument("profile '" + name + "': epsilon must lie in (0, 0.5]");
        }
        if (i > 0 && groups[i].epsilon > groups[i - 1].epsilon) {
            throw InvalidArgument("profile '" + name + "': epsilon must be non-increasing across groups");
        }
    }
    if (region_scales.empty()) {
        throw InvalidArgument("profile '" + name + "' has no region scales");
    }
    for (std::size_t i = 0; i < region_scales.size(); ++i) {
        if (!(region_scales[i] > 0.0) || !std::isfinite(region_scales[i])) {
            throw InvalidArgument("profile '" + name + "': region scales must be positive");
        }
        if (i > 0 && region_scales[i] < region_scales[i - 1]) {
            throw InvalidArgument("profile '" + name + "': region scales must be non-decreasing");
        }
    }
    if (channels != 0 && total_channels() != channels) {
        throw InvalidArgument("profile '" + name + "' covers " + std::to_string(total_channels()) +
                              " channels, transform has " + std::to_string(channels));
    }
}

std::vector<std::size_t> apportion_channels(const std::vector<std::size_t>& weights, std::size_t channels)
{
    const std::size_t total = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
    if (weights.empty() || total == 0) {
        throw InvalidArgument("apportion_channels: empty weights");
    }
    std::vector<std::size_t> out;
    std::size_t cum = 0;
    std::size_t prev = 0;
    for (auto w : weights) {
        cum += w;
        const std::size_t boundary = (2 * channels * cum + total) / (2 * total);
        if (boundary <= prev) {
            throw InvalidArgument("apportion_channels: too few channels for the requested split");
        }
        out.push_back(boundary - prev);
        prev = boundary;
    }
    return out;
}

std::vector<GroupProfile> builtin_profiles(std::size_t channels)
{
    struct Def {
        const char* name;
        std::vector<std::size_t> weights;
        std::vector<double> eps;
    };
    // Channel splits are given out of a 320-channel latent and rescaled.
    const std::vector<Def> defs = {
        {"layer_1", {320}, {0.5}},
        {"layer_2", {32, 288}, {0.5, 0.4}},
        {"layer_3", {32, 64, 224}, {0.5, 0.4, 0.3}},
        {"layer_4", {32, 64, 72, 152}, {0.5, 0.4, 0.3, 0.2}},
    };
    std::vector<GroupProfile> out;
    for (const auto& d : defs) {
        GroupProfile p;
        p.name = d.name;
        const auto counts = apportion_channels(d.weights, channels);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            p.groups.push_back({counts[i], d.eps[i]});
        }
        p.region_scales = default_region_scales();
        out.push_back(std::move(p));
    }
    return out;
}

GroupProfile builtin_profile(const std::string& name, std::size_t channels)
{
    for (auto& p : builtin_profiles(channels)) {
        if (p.name == name) {
            return p;
        }
    }
    throw InvalidArgument("unknown profile '" + name + "'");
}

GroupProfile profile_from_json(const std::string& text)
{
    GroupProfile p;
    try {
        const auto j = nlohmann::json::parse(text);
        p.name = j.value("name", std::string("custom"));
        for (const auto& g : j.at("groups")) {
            p.groups.push_back({g.at("channels").get<std::size_t>(), g.at("epsilon").get<double>()});
        }
        p.region_scales = j.contains("region_scales") ? j.at("region_scales").get<std::vector<double>>()
                                                      : default_region_scales();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid profile JSON: ") + e.what());
    }
    p.validate();
    return p;
}

std::string profile_to_json(const GroupProfile& profile)
{
    nlohmann::json j;
    j["name"] = profile.name;
    j["groups"] = nlohmann::json::array();
    for (const auto& g : profile.groups) {
        j["groups"].push_back({{"channels", g.channels}, {"epsilon", g.epsilon}});
    }
    j["region_scales"] = profile.region_scales;
    return j.dump(2);
}

GroupProfile load_profile(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open profile " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return profile_from_json(ss.str());
}

namespace {

void check_shapes(std::size_t channels, std::size_t height, std::size_t width, const GroupProfile& profile,
                  const LabelGrid& labels, double gain)
{
    profile.validate(channels);
    if (labels.width != width || labels.height != height || labels.labels.size() != width * height) {
        throw InvalidArgument("label grid does not match latent spatial dimensions");
    }
    for (auto l : labels.labels) {
        if (l >= profile.region_scales.size()) {
            throw InvalidArgument("region label without a region scale");
        }
    }
    if (!(gain > 0.0) || !std::isfinite(gain)) {
        throw InvalidArgument("latent gain must be positive");
    }
}

} // namespace

SymbolTensor quantize_latents(const LatentTensor& lat, const GroupProfile& profile, const LabelGrid& labels,
                              double gain)
{
    check_shapes(lat.channels, lat.height, lat.width, profile, labels, gain);
    SymbolTensor out(lat.channels, lat.height, lat.width);
    const auto offsets = profile.group_offsets();
    const std::size_t n = lat.plane_size();
    for (std::size_t g = 0; g < profile.groups.size(); ++g) {
        const PhiParams phi = solve_phi(profile.groups[g].epsilon);
        for (std::size_t ch = offsets[g]; ch < offsets[g + 1]; ++ch) {
            for (std::size_t k = 0; k < n; ++k) {
                const double step = profile.region_scales[labels.labels[k]];
                out.data[ch * n + k] = quantize_scalar(lat.data[ch * n + k] * gain / step, phi);
            }
        }
    }
    return out;
}

LatentTensor dequantize_latents(const SymbolTensor& symbols, const GroupProfile& profile, const LabelGrid& labels,
                                double gain)
{
    check_shapes(symbols.channels, symbols.height, symbols.width, profile, labels, gain);
    if (symbols.data.size() != symbols.channels * symbols.plane_size()) {
        throw InvalidArgument("symbol tensor storage does not match its shape");
    }
    LatentTensor out(symbols.channels, symbols.height, symbols.width);
    const std::size_t n = symbols.plane_size();
    for (std::size_t ch = 0; ch < symbols.channels; ++ch) {
        for (std::size_t k = 0; k < n; ++k) {
            out.data[ch * n + k] = symbols.data[ch * n + k] * profile.region_scales[labels.labels[k]] / gain;
        }
    }
    return out;
}

} // namespace hrc
