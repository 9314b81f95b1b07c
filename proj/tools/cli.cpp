#include "cli.hpp"

#include "hrc/codec.hpp"
#include "hrc/error.hpp"
#include "hrc/hroi.hpp"
#include "hrc/image.hpp"
#include "hrc/metrics.hpp"
#include "hrc/parallel.hpp"
#include "hrc/quant.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hrc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    if (text.empty()) {
        return parts;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (item.empty()) {
            throw InvalidArgument("empty entry in list '" + text + "'");
        }
        parts.push_back(item);
    }
    return parts;
}

std::size_t parse_index(const std::string& text, const std::string& what)
{
    std::size_t pos = 0;
    unsigned long value = 0;
    try {
        value = std::stoul(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != text.size() || text.empty() || text.front() == '-') {
        throw InvalidArgument("invalid " + what + " '" + text + "'");
    }
    return value;
}

/// Requested thread count, capped by HRC_THREADS when set.
unsigned thread_budget(unsigned requested)
{
    unsigned threads = resolve_threads(requested);
    if (const char* env = std::getenv("HRC_THREADS"); env != nullptr && *env != '\0') {
        const auto cap = static_cast<unsigned>(parse_index(env, "HRC_THREADS value"));
        if (cap > 0) {
            threads = std::min(threads, cap);
        }
    }
    return threads;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomic(const fs::path& path, const std::string& data)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move report into place at " + path.string());
    }
}

void write_atomic(const fs::path& path, const std::vector<std::uint8_t>& data)
{
    write_atomic(path, std::string(data.begin(), data.end()));
}

json number_or_inf(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

json optional_number(const std::optional<double>& v)
{
    return v ? number_or_inf(*v) : json(nullptr);
}

GroupProfile resolve_profile(const std::string& source, std::size_t block_size,
                             const std::vector<double>& region_scales)
{
    GroupProfile profile;
    const std::size_t channels = block_size * block_size;
    if (source.rfind("layer_", 0) == 0 && !fs::exists(source)) {
        profile = builtin_profile(source, channels);
    } else {
        profile = load_profile(source);
    }
    if (!region_scales.empty()) {
        profile.region_scales = region_scales;
    }
    profile.validate(channels);
    return profile;
}

json profile_json(const GroupProfile& p)
{
    return json::parse(profile_to_json(p));
}

std::string region_name(std::size_t label, std::size_t depth)
{
    return label == depth ? "background" : "F" + std::to_string(label + 1);
}

/// The common knobs shared by every subcommand that encodes.
struct CodecFlags {
    std::size_t block_size = 16;
    double gain = 0.125;
    bool rgb = false;
    unsigned threads = 0;
    std::vector<double> region_scales;

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--block-size", block_size, "Transform block size")->check(CLI::IsMember({8, 16}));
        cmd.add_option("--gain", gain, "Latent gain applied before quantization")->check(CLI::PositiveNumber);
        cmd.add_flag("--rgb", rgb, "Code RGB planes directly instead of YCbCr");
        cmd.add_option("--threads", threads, "Worker threads (0 = all cores)");
        cmd.add_option("--region-scales", region_scales, "Quantization steps per region, background last")
            ->delimiter(',');
    }

    EncodeOptions options() const
    {
        EncodeOptions o;
        o.block_size = block_size;
        o.latent_gain = gain;
        o.ycbcr = !rgb;
        o.threads = thread_budget(threads);
        return o;
    }

    json to_json() const
    {
        return {{"block_size", block_size},
                {"latent_gain", gain},
                {"color", rgb ? "rgb" : "ycbcr"},
                {"threads", thread_budget(threads)}};
    }
};

MaskPyramid make_pyramid(const Image& img, std::size_t depth, const std::string& masks)
{
    if (!masks.empty()) {
        std::vector<fs::path> paths;
        for (const auto& p : split(masks, ',')) {
            paths.emplace_back(p);
        }
        return load_external_masks(paths, img.width, img.height);
    }
    if (depth == 0) {
        return MaskPyramid::background_only(img.width, img.height);
    }
    return build_pyramid(img, depth, saliency_spectral_residual);
}

ObjectBinding parse_binding(const std::string& text, std::size_t groups, std::size_t regions)
{
    ObjectBinding b;
    if (text.empty()) {
        // Group g covers region g; surplus groups fall to the background.
        for (std::size_t g = 0; g < groups; ++g) {
            b.region_of_group.push_back(static_cast<std::uint8_t>(std::min(g, regions - 1)));
        }
        return b;
    }
    std::vector<int> region(groups, -1);
    for (const auto& item : split(text, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw InvalidArgument("binding entries must look like group:region, got '" + item + "'");
        }
        const std::size_t g = parse_index(item.substr(0, colon), "binding group");
        const std::size_t r = parse_index(item.substr(colon + 1), "binding region");
        if (g >= groups) {
            throw InvalidArgument("binding names group " + std::to_string(g) + " but the profile has " +
                                  std::to_string(groups) + " groups");
        }
        if (region[g] >= 0) {
            throw InvalidArgument("group " + std::to_string(g) + " is bound twice");
        }
        if (r > 255) {
            throw InvalidArgument("binding region out of range");
        }
        region[g] = static_cast<int>(r);
    }
    for (std::size_t g = 0; g < groups; ++g) {
        if (region[g] < 0) {
            throw InvalidArgument("binding does not cover group " + std::to_string(g));
        }
        b.region_of_group.push_back(static_cast<std::uint8_t>(region[g]));
    }
    return b;
}

json bpp_json(const BppBreakdown& b, std::size_t groups)
{
    json segments = json::array();
    for (std::size_t i = 0; i < b.segment_bytes.size(); ++i) {
        segments.push_back({{"plane", i / groups},
                            {"group", i % groups},
                            {"bytes", b.segment_bytes[i]},
                            {"bpp", b.bpp_per_segment[i]}});
    }
    return {{"file_bytes", b.file_bytes},
            {"header_bytes", b.header_bytes},
            {"bpp_total", b.bpp_total},
            {"bpp_header", b.bpp_header},
            {"bpp_per_group", b.bpp_per_group},
            {"bpp_per_segment", segments}};
}

// ---------------------------------------------------------------- encode

struct EncodeArgs {
    std::string input;
    std::string output;
    std::string profile = "layer_4";
    std::size_t roi_depth = 3;
    std::string masks;
    bool object = false;
    std::string binding;
    std::string report;
    CodecFlags codec;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out)
{
    const EncodeOptions opts = a.codec.options();
    const GroupProfile profile = resolve_profile(a.profile, opts.block_size, a.codec.region_scales);
    const Image img = load_image(a.input);
    const MaskPyramid pyramid = make_pyramid(img, a.roi_depth, a.masks);

    std::vector<std::uint8_t> bytes;
    std::optional<ObjectBinding> binding;
    if (a.object) {
        binding = parse_binding(a.binding, profile.groups.size(), pyramid.region_count());
        bytes = encode_object_mode(img, profile, pyramid, *binding, opts);
    } else {
        bytes = encode(img, profile, &pyramid, opts);
    }
    write_atomic(a.output, bytes);

    const Image decoded = decode(bytes, opts.threads);
    const BppBreakdown bpp = bpp_breakdown(bytes);
    const QualityReport q = measure_quality(img, decoded, bpp.bpp_total, pyramid.label_map, pyramid.region_count());

    json regions = json::array();
    for (const auto& r : q.per_region) {
        regions.push_back({{"label", r.label},
                           {"region", region_name(r.label, pyramid.depth())},
                           {"pixels", r.pixel_count},
                           {"psnr", optional_number(r.psnr)}});
    }
    json report = bpp_json(bpp, profile.groups.size());
    report["input"] = a.input;
    report["output"] = a.output;
    report["width"] = img.width;
    report["height"] = img.height;
    report["group_count"] = profile.groups.size();
    report["region_count"] = pyramid.region_count();
    report["roi_depth"] = pyramid.depth();
    report["psnr"] = number_or_inf(q.psnr);
    report["msssim"] = optional_number(q.msssim);
    report["lpips"] = nullptr;
    report["psnr_per_region"] = regions;
    if (binding) {
        report["binding"] = binding->region_of_group;
    }
    json config = a.codec.to_json();
    config["subcommand"] = "encode";
    config["profile"] = profile_json(profile);
    config["profile_source"] = a.profile;
    config["roi_depth_requested"] = a.masks.empty() ? json(a.roi_depth) : json(nullptr);
    config["masks"] = split(a.masks, ',');
    config["object_mode"] = a.object;
    config["region_scales_effective"] = effective_region_scales(profile.region_scales, pyramid.depth());
    report["config"] = config;

    const fs::path report_path = a.report.empty() ? fs::path(a.output + ".json") : fs::path(a.report);
    write_atomic(report_path, report.dump(2) + "\n");
    out << a.output << ": " << bpp.file_bytes << " bytes, " << bpp.bpp_total << " bpp, PSNR "
        << (std::isinf(q.psnr) ? std::string("inf") : std::to_string(q.psnr)) << " dB\n";
    return kOk;
}

// ---------------------------------------------------------------- decode

struct DecodeArgs {
    std::string input;
    std::string output;
    std::size_t upto_group = 0;
    std::string groups;
    std::string report;
    unsigned threads = 0;
};

int cmd_decode(const DecodeArgs& a, std::ostream& out, std::ostream& err)
{
    const auto bytes = read_bytes(a.input);
    json warnings = json::array();
    const unsigned threads = thread_budget(a.threads);
    Image img;
    json mode;
    if (a.upto_group != 0) {
        img = decode_progressive(bytes, a.upto_group, threads);
        mode = {{"mode", "progressive"}, {"upto_group", a.upto_group}};
    } else if (!a.groups.empty()) {
        std::vector<std::size_t> groups;
        for (const auto& g : split(a.groups, ',')) {
            const std::size_t idx = parse_index(g, "group");
            if (idx == 0) {
                throw InvalidArgument("groups are numbered from 1");
            }
            groups.push_back(idx - 1);
        }
        img = decode_object(bytes, groups, threads);
        if (!parse_header(bytes).object_mode()) {
            warnings.push_back("stream was not encoded in object mode; groups are not region-masked");
            err << "warning: " << a.input << " was not encoded in object mode\n";
        }
        mode = {{"mode", "object"}, {"groups", split(a.groups, ',')}};
    } else {
        img = decode(bytes, threads);
        mode = {{"mode", "full"}};
    }
    save_image(img, a.output);

    if (!a.report.empty()) {
        const StreamHeader h = parse_header(bytes);
        json report = bpp_json(bpp_breakdown(bytes), h.group_count());
        report["input"] = a.input;
        report["output"] = a.output;
        report["width"] = h.width;
        report["height"] = h.height;
        report["group_count"] = h.group_count();
        report["region_count"] = h.region_count();
        report["object_mode"] = h.object_mode();
        report["warnings"] = warnings;
        report["config"] = mode;
        report["config"]["subcommand"] = "decode";
        report["config"]["threads"] = threads;
        write_atomic(a.report, report.dump(2) + "\n");
    }
    out << a.output << ": " << img.width << "x" << img.height << "\n";
    return kOk;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
    std::string input_dir;
    std::string output_dir = ".";
    std::vector<std::string> profiles = {"layer_1", "layer_2", "layer_3", "layer_4"};
    std::size_t roi_depth = 3;
    CodecFlags codec;
};

struct StatsRow {
    std::string profile;
    double bpp = 0.0;
    double psnr = 0.0;
    std::optional<double> msssim;
};

struct ImageStats {
    std::string file;
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t roi_depth = 0;
    std::vector<StatsRow> rows;
    LatentHistograms hist;
    std::string error;
};

std::string csv_number(double v)
{
    if (std::isinf(v)) {
        return "inf";
    }
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream& err)
{
    if (!fs::is_directory(a.input_dir)) {
        throw IoError(a.input_dir + " is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.input_dir)) {
        if (e.is_regular_file()) {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw IoError("no files in " + a.input_dir);
    }

    EncodeOptions opts = a.codec.options();
    const unsigned workers = opts.threads;
    opts.threads = 1;
    std::vector<GroupProfile> profiles;
    for (const auto& p : a.profiles) {
        profiles.push_back(resolve_profile(p, opts.block_size, a.codec.region_scales));
    }

    std::vector<ImageStats> results(files.size());
    parallel_for(files.size(), workers, [&](std::size_t i) {
        ImageStats& s = results[i];
        s.file = files[i].filename().string();
        Image img;
        try {
            img = load_image(files[i]);
        } catch (const Error& e) {
            s.error = e.what();
            return;
        }
        s.width = img.width;
        s.height = img.height;
        const MaskPyramid pyramid = make_pyramid(img, a.roi_depth, "");
        s.roi_depth = pyramid.depth();
        s.hist = latent_histograms(quantizer_inputs(img, profiles.front(), &pyramid, opts));
        for (const auto& profile : profiles) {
            const auto bytes = encode(img, profile, &pyramid, opts);
            const Image dec = decode(bytes, 1);
            const QualityReport q =
                measure_quality(img, dec, bpp_breakdown(bytes).bpp_total, pyramid.label_map, pyramid.region_count());
            s.rows.push_back({profile.name, q.bpp, q.psnr, q.msssim});
        }
    });

    json rows = json::array();
    json skipped = json::array();
    std::ostringstream csv;
    csv << "image,profile,width,height,roi_depth,bpp,psnr,msssim\n";
    std::map<std::string, std::vector<const StatsRow*>> by_profile;
    LatentHistograms hist;
    std::size_t used = 0;
    for (const auto& s : results) {
        if (!s.error.empty()) {
            skipped.push_back({{"file", s.file}, {"error", s.error}});
            err << "warning: skipping " << s.file << ": " << s.error << "\n";
            continue;
        }
        ++used;
        hist.merge(s.hist);
        for (const auto& r : s.rows) {
            by_profile[r.profile].push_back(&r);
            rows.push_back({{"image", s.file},
                            {"profile", r.profile},
                            {"width", s.width},
                            {"height", s.height},
                            {"roi_depth", s.roi_depth},
                            {"bpp", r.bpp},
                            {"psnr", number_or_inf(r.psnr)},
                            {"msssim", optional_number(r.msssim)}});
            csv << s.file << ',' << r.profile << ',' << s.width << ',' << s.height << ',' << s.roi_depth << ','
                << csv_number(r.bpp) << ',' << csv_number(r.psnr) << ','
                << (r.msssim ? csv_number(*r.msssim) : std::string()) << '\n';
        }
    }
    if (used == 0) {
        throw IoError("no readable images in " + a.input_dir);
    }

    json means = json::object();
    std::ostringstream mean_csv;
    mean_csv << "profile,images,mean_bpp,mean_psnr,mean_msssim\n";
    std::map<std::string, double> mean_psnr;
    std::vector<double> mean_bpp;
    for (const auto& profile : profiles) {
        const auto& list = by_profile[profile.name];
        double bpp = 0.0;
        double psnr_sum = 0.0;
        double ms = 0.0;
        std::size_t ms_count = 0;
        for (const StatsRow* r : list) {
            bpp += r->bpp;
            psnr_sum += r->psnr;
            if (r->msssim) {
                ms += *r->msssim;
                ++ms_count;
            }
        }
        const double n = static_cast<double>(list.size());
        const double ms_mean = ms_count > 0 ? ms / static_cast<double>(ms_count) : 0.0;
        means[profile.name] = {{"images", list.size()},
                               {"bpp", bpp / n},
                               {"psnr", number_or_inf(psnr_sum / n)},
                               {"msssim", ms_count > 0 ? json(ms_mean) : json(nullptr)}};
        mean_csv << profile.name << ',' << list.size() << ',' << csv_number(bpp / n) << ','
                 << csv_number(psnr_sum / n) << ',' << (ms_count > 0 ? csv_number(ms_mean) : std::string()) << '\n';
        mean_psnr[profile.name] = psnr_sum / n;
        mean_bpp.push_back(bpp / n);
    }

    json summary;
    summary["rows"] = rows;
    summary["means"] = means;
    summary["skipped"] = skipped;
    summary["images"] = used;
    if (mean_psnr.count("layer_1") && mean_psnr.count("layer_4")) {
        summary["psnr_drop_layer_1_to_layer_4"] = number_or_inf(mean_psnr["layer_1"] - mean_psnr["layer_4"]);
    }
    summary["mean_bpp_strictly_decreasing"] =
        std::adjacent_find(mean_bpp.begin(), mean_bpp.end(), std::less_equal<>()) == mean_bpp.end();
    json config = a.codec.to_json();
    config["subcommand"] = "stats";
    config["input_dir"] = a.input_dir;
    config["roi_depth_requested"] = a.roi_depth;
    config["profiles"] = json::array();
    for (const auto& p : profiles) {
        config["profiles"].push_back(profile_json(p));
    }
    summary["config"] = config;

    const fs::path dir = a.output_dir;
    fs::create_directories(dir);
    write_atomic(dir / "stats.csv", csv.str());
    write_atomic(dir / "stats_means.csv", mean_csv.str());
    write_atomic(dir / "stats.json", summary.dump(2) + "\n");
    write_atomic(dir / "histograms.csv", hist.to_csv());
    write_atomic(dir / "histograms.json", hist.to_json() + "\n");

    out << mean_csv.str();
    return kOk;
}

// ---------------------------------------------------------------- roi

struct RoiArgs {
    std::string input;
    std::string output_dir;
    std::size_t depth = 3;
    std::string masks;
};

constexpr std::uint32_t kRegionColors[] = {0xFFD700, 0xFF7F00, 0xE0218A};

int cmd_roi(const RoiArgs& a, std::ostream& out, std::ostream& err)
{
    if (a.masks.empty() && a.depth == 0) {
        throw InvalidArgument("roi depth must be 1, 2 or 3");
    }
    const Image img = load_image(a.input);
    const MaskPyramid pyr = make_pyramid(img, a.depth, a.masks);
    const fs::path dir = a.output_dir;
    fs::create_directories(dir);

    auto save_mask = [&](const BinaryMask& m, const std::string& name) {
        Image mask(m.width, m.height, ColorSpace::Gray);
        for (std::size_t i = 0; i < m.bits.size(); ++i) {
            mask.planes[0].samples[i] = m.bits[i] ? 255.0 : 0.0;
        }
        save_image(mask, dir / name);
    };
    for (std::size_t i = 0; i < pyr.depth(); ++i) {
        save_mask(pyr.foreground[i], "f" + std::to_string(i + 1) + ".png");
    }
    save_mask(pyr.background, "bg.png");

    std::vector<std::uint32_t> palette;
    for (std::size_t i = 0; i < pyr.depth(); ++i) {
        palette.push_back(kRegionColors[i]);
    }
    palette.push_back(0x000000);
    save_indexed_png(pyr.label_map, pyr.width, pyr.height, palette, dir / "labels.png");

    Image overlay = img.colorspace == ColorSpace::RGB ? img : convert_colorspace(img, ColorSpace::RGB);
    for (std::size_t i = 0; i < pyr.label_map.size(); ++i) {
        const std::size_t label = pyr.label_map[i];
        if (label == pyr.depth()) {
            continue;
        }
        const std::uint32_t c = kRegionColors[label];
        for (std::size_t p = 0; p < 3; ++p) {
            const double tint = static_cast<double>((c >> (8 * (2 - p))) & 0xFF);
            overlay.planes[p].samples[i] = 0.5 * overlay.planes[p].samples[i] + 0.5 * tint;
        }
    }
    save_image(overlay, dir / "overlay.png");

    if (pyr.depth() == 0) {
        err << "warning: no salient region found in " << a.input << "; output is background only\n";
    }
    out << "regions: " << pyr.region_count() << " (depth " << pyr.depth() << ")\n";
    for (std::size_t l = 0; l < pyr.region_count(); ++l) {
        out << "  " << region_name(l, pyr.depth()) << ": "
            << std::count(pyr.label_map.begin(), pyr.label_map.end(), static_cast<std::uint8_t>(l)) << " pixels\n";
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"hrc: hierarchical ROI still-image codec", "hrc"};
    app.require_subcommand(1);

    EncodeArgs enc;
    auto* encode_cmd = app.add_subcommand("encode", "Encode an image to an .hrc stream");
    encode_cmd->add_option("input", enc.input, "Input image (.png, .pgm, .ppm)")->required();
    encode_cmd->add_option("output", enc.output, "Output .hrc file")->required();
    encode_cmd->add_option("--profile", enc.profile, "Builtin profile name or JSON profile path")->capture_default_str();
    auto* depth_opt = encode_cmd->add_option("--roi-depth", enc.roi_depth, "Saliency pyramid depth (0 disables)")
                          ->check(CLI::Range(0, 3));
    auto* masks_opt = encode_cmd->add_option("--masks", enc.masks, "Comma-separated external mask images");
    masks_opt->excludes(depth_opt);
    auto* object_opt = encode_cmd->add_flag("--object", enc.object, "Object mode: bind channel groups to regions");
    encode_cmd->add_option("--binding", enc.binding, "group:region pairs, e.g. 0:0,1:1,2:2,3:3")->needs(object_opt);
    encode_cmd->add_option("--report", enc.report, "JSON report path (default: <output>.json)");
    enc.codec.add_to(*encode_cmd);

    DecodeArgs dec;
    auto* decode_cmd = app.add_subcommand("decode", "Decode an .hrc stream to an image");
    decode_cmd->add_option("input", dec.input, "Input .hrc file")->required();
    decode_cmd->add_option("output", dec.output, "Output image (.png, .pgm, .ppm)")->required();
    auto* upto_opt = decode_cmd->add_option("--upto-group", dec.upto_group, "Progressive: decode groups 1..g")
                         ->check(CLI::PositiveNumber);
    decode_cmd->add_option("--groups", dec.groups, "Object decode: comma-separated groups, numbered from 1")
        ->excludes(upto_opt);
    decode_cmd->add_option("--report", dec.report, "Optional JSON report path");
    decode_cmd->add_option("--threads", dec.threads, "Worker threads (0 = all cores)");

    StatsArgs st;
    auto* stats_cmd = app.add_subcommand("stats", "Encode a directory of images and tabulate rate and quality");
    stats_cmd->add_option("input_dir", st.input_dir, "Directory of images")->required();
    stats_cmd->add_option("--out-dir", st.output_dir, "Where to write stats.csv, stats.json and histograms")->capture_default_str();
    stats_cmd->add_option("--profiles", st.profiles, "Comma-separated profiles")->capture_default_str()->delimiter(',');
    stats_cmd->add_option("--roi-depth", st.roi_depth, "Saliency pyramid depth (0 disables)")->capture_default_str()
        ->check(CLI::Range(0, 3));
    st.codec.add_to(*stats_cmd);

    RoiArgs roi;
    auto* roi_cmd = app.add_subcommand("roi", "Write the region masks and an overlay for an image");
    roi_cmd->add_option("input", roi.input, "Input image")->required();
    roi_cmd->add_option("output_dir", roi.output_dir, "Directory for f1..fk.png, bg.png, overlay.png, labels.png")
        ->required();
    auto* roi_depth = roi_cmd->add_option("--depth", roi.depth, "Pyramid depth")->capture_default_str()->check(CLI::Range(1, 3));
    roi_cmd->add_option("--masks", roi.masks, "Comma-separated external mask images")->excludes(roi_depth);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*encode_cmd) {
            return cmd_encode(enc, out);
        }
        if (*decode_cmd) {
            return cmd_decode(dec, out, err);
        }
        if (*stats_cmd) {
            return cmd_stats(st, out, err);
        }
        return cmd_roi(roi, out, err);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const CorruptStream& e) {
        err << "error: corrupt stream: " << e.what() << "\n";
        return kCorrupt;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace hrc::cli
