#include "doctest.h"
#include "test_support.hpp"

#include "cli.hpp"
#include "hrc/codec.hpp"
#include "hrc/image.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace hrc;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

/// Three nested-priority masks over vertical stripes.
std::vector<std::string> write_masks(const test::TempDir& dir, std::size_t w, std::size_t h)
{
    std::vector<std::string> paths;
    for (std::size_t m = 0; m < 3; ++m) {
        Image mask(w, h, ColorSpace::Gray);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = m * w / 4; x < (m + 1) * w / 4; ++x) {
                mask.planes[0].at(x, y) = 255;
            }
        }
        const auto path = dir / ("m" + std::to_string(m + 1) + ".png");
        save_image(mask, path);
        paths.push_back(path.string());
    }
    return paths;
}

} // namespace

TEST_CASE("cli encode and decode")
{
    test::TempDir dir("cli");
    const auto input = (dir / "in.png").string();
    save_image(test::structured_image(128, 96), input);
    const auto hrc_path = (dir / "out.hrc").string();

    const Result enc = run({"encode", input, hrc_path, "--profile", "layer_1"});
    REQUIRE(enc.code == 0);
    const auto report = read_json(hrc_path + ".json");
    CHECK(report["group_count"] == 1);
    CHECK(report["bpp_per_group"].size() == 1);
    CHECK(report["lpips"].is_null());
    CHECK(report["config"]["profile"]["name"] == "layer_1");
    CHECK(report["bpp_total"].get<double>() ==
          doctest::Approx(8.0 * static_cast<double>(fs::file_size(hrc_path)) / (128 * 96)));
    CHECK_FALSE(fs::exists(hrc_path + ".json.tmp"));

    const auto rec = (dir / "rec.png").string();
    REQUIRE(run({"decode", hrc_path, rec}).code == 0);
    const Image decoded = load_image(rec);
    const std::string raw = read_text(hrc_path);
    const Image direct = decode(std::vector<std::uint8_t>(raw.begin(), raw.end()));
    CHECK(decoded.width == 128);
    for (std::size_t i = 0; i < direct.planes[1].samples.size(); ++i) {
        CHECK(decoded.planes[1].samples[i] == std::round(direct.planes[1].samples[i]));
    }
}

TEST_CASE("cli external masks, object mode and partial decodes")
{
    test::TempDir dir("cli_obj");
    const auto input = (dir / "in.ppm").string();
    save_image(test::structured_image(96, 64), input);
    const auto masks = write_masks(dir, 96, 64);
    const std::string mask_list = masks[0] + "," + masks[1] + "," + masks[2];
    const auto hrc_path = (dir / "obj.hrc").string();
    const auto report_path = (dir / "obj.json").string();

    const Result enc = run({"encode", input, hrc_path, "--masks", mask_list, "--object", "--binding",
                            "0:0,1:1,2:2,3:3", "--report", report_path});
    REQUIRE(enc.code == 0);
    const auto report = read_json(report_path);
    CHECK(report["region_count"] == 4);
    CHECK(report["binding"] == nlohmann::json::array({0, 1, 2, 3}));
    REQUIRE(report["bpp_per_group"].size() == 4);
    double sum = report["bpp_header"].get<double>();
    for (const auto& v : report["bpp_per_group"]) {
        sum += v.get<double>();
    }
    CHECK(sum == doctest::Approx(report["bpp_total"].get<double>()).epsilon(1e-12));
    CHECK(report["psnr_per_region"].size() == 4);
    CHECK(report["psnr_per_region"][3]["region"] == "background");

    CHECK(run({"decode", hrc_path, (dir / "g1.png").string(), "--upto-group", "1"}).code == 0);
    CHECK(run({"decode", hrc_path, (dir / "bg.png").string(), "--groups", "4", "--report",
               (dir / "dec.json").string()})
              .code == 0);
    const Image bg = load_image(dir / "bg.png");
    // Background-only reconstruction is flat gray over the first mask's stripe.
    CHECK(bg.planes[0].at(5, 30) == 128.0);
    CHECK(read_json(dir / "dec.json")["config"]["mode"] == "object");
}

TEST_CASE("cli usage and stream errors")
{
    test::TempDir dir("cli_err");
    const auto input = (dir / "in.png").string();
    save_image(test::structured_image(64, 48), input);
    const auto hrc_path = (dir / "x.hrc").string();

    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"encode", input}).code == cli::kUsage);
    CHECK(run({"encode", input, hrc_path, "--masks", input, "--roi-depth", "2"}).code == cli::kUsage);
    CHECK(run({"encode", input, hrc_path, "--binding", "0:0"}).code == cli::kUsage);
    CHECK(run({"encode", input, hrc_path, "--profile", "layer_9"}).code == cli::kUsage);
    CHECK(run({"encode", input, hrc_path, "--block-size", "12"}).code == cli::kUsage);
    CHECK(run({"encode", input, hrc_path, "--roi-depth", "1", "--object", "--binding", "0:0,1:1,2:2,3:9"}).code ==
          cli::kUsage);
    CHECK(run({"encode", (dir / "missing.png").string(), hrc_path}).code == cli::kIoError);
    CHECK(run({"--help"}).code == cli::kOk);

    REQUIRE(run({"encode", input, hrc_path}).code == 0);
    const Result plain = run({"decode", hrc_path, (dir / "p.png").string(), "--groups", "1,2", "--report",
                              (dir / "p.json").string()});
    CHECK(plain.code == 0);
    CHECK(plain.err.find("not encoded in object mode") != std::string::npos);
    CHECK(read_json(dir / "p.json")["warnings"].size() == 1);
    CHECK(run({"decode", hrc_path, (dir / "a.png").string(), "--upto-group", "1", "--groups", "1"}).code ==
          cli::kUsage);
    CHECK(run({"decode", hrc_path, (dir / "a.png").string(), "--upto-group", "9"}).code == cli::kUsage);
    CHECK(run({"decode", hrc_path, (dir / "a.png").string(), "--groups", "0"}).code == cli::kUsage);

    auto bytes = read_text(hrc_path);
    bytes[1] = 'X';
    std::ofstream(dir / "bad.hrc", std::ios::binary) << bytes;
    const Result bad = run({"decode", (dir / "bad.hrc").string(), (dir / "b.png").string()});
    CHECK(bad.code == cli::kCorrupt);
    CHECK(bad.err.find("corrupt") != std::string::npos);
}

TEST_CASE("cli stats")
{
    test::TempDir dir("cli_stats");
    const fs::path images = dir / "images";
    fs::create_directories(images);
    const fs::path out = dir / "out";

    CHECK(run({"stats", images.string(), "--out-dir", out.string()}).code == cli::kIoError);

    save_image(test::structured_image(160, 128), images / "a.png");
    const Result one = run({"stats", images.string(), "--out-dir", out.string(), "--profiles", "layer_4"});
    REQUIRE(one.code == 0);
    CHECK(line_count(read_text(out / "stats.csv")) == 2);

    Image gray(192, 160, ColorSpace::Gray);
    gray.planes[0] = luma(test::structured_image(192, 160));
    save_image(gray, images / "b.pgm");
    std::ofstream(images / "notes.txt") << "not an image";
    const Result two =
        run({"stats", images.string(), "--out-dir", out.string(), "--profiles", "layer_1,layer_4"});
    REQUIRE(two.code == 0);
    CHECK(two.err.find("notes.txt") != std::string::npos);
    CHECK(line_count(read_text(out / "stats.csv")) == 1 + 2 * 2);
    const auto summary = read_json(out / "stats.json");
    CHECK(summary["images"] == 2);
    CHECK(summary["skipped"].size() == 1);
    CHECK(summary["skipped"][0]["file"] == "notes.txt");
    CHECK(summary.contains("psnr_drop_layer_1_to_layer_4"));
    CHECK(summary["means"]["layer_4"]["bpp"].get<double>() < summary["means"]["layer_1"]["bpp"].get<double>());
    CHECK(summary["rows"][0]["image"] == "a.png");
    CHECK(fs::exists(out / "histograms.csv"));
    CHECK(read_json(out / "histograms.json").contains("abs"));
}

TEST_CASE("cli stats is independent of the thread budget")
{
    test::TempDir dir("cli_threads");
    const fs::path images = dir / "images";
    fs::create_directories(images);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 3; ++i) {
        save_image(test::random_image(48, 32, ColorSpace::RGB, rng), images / ("img" + std::to_string(i) + ".png"));
    }
    REQUIRE(run({"stats", images.string(), "--out-dir", (dir / "t1").string(), "--threads", "1"}).code == 0);
    ::setenv("HRC_THREADS", "2", 1);
    REQUIRE(run({"stats", images.string(), "--out-dir", (dir / "t4").string(), "--threads", "4"}).code == 0);
    ::unsetenv("HRC_THREADS");
    CHECK(read_text(dir / "t1" / "stats.csv") == read_text(dir / "t4" / "stats.csv"));
    CHECK(read_json(dir / "t4" / "stats.json")["config"]["threads"] == 2);
}

TEST_CASE("cli roi")
{
    test::TempDir dir("cli_roi");
    const auto input = (dir / "in.png").string();
    save_image(test::structured_image(160, 120), input);

    const Result deep = run({"roi", input, (dir / "deep").string(), "--depth", "3"});
    REQUIRE(deep.code == 0);
    CHECK(fs::exists(dir / "deep" / "f1.png"));
    CHECK(fs::exists(dir / "deep" / "bg.png"));
    CHECK(fs::exists(dir / "deep" / "overlay.png"));
    CHECK(fs::exists(dir / "deep" / "labels.png"));

    const Result shallow = run({"roi", input, (dir / "shallow").string(), "--depth", "1"});
    REQUIRE(shallow.code == 0);
    CHECK(fs::exists(dir / "shallow" / "f1.png"));
    CHECK_FALSE(fs::exists(dir / "shallow" / "f2.png"));
    const Image f1 = load_image(dir / "shallow" / "f1.png");
    const Image bg = load_image(dir / "shallow" / "bg.png");
    for (std::size_t i = 0; i < f1.pixel_count(); ++i) {
        CHECK(f1.planes[0].samples[i] + bg.planes[0].samples[i] == 255.0);
    }

    save_image(Image(32, 32, ColorSpace::RGB, 90.0), dir / "flat.png");
    const Result flat = run({"roi", (dir / "flat.png").string(), (dir / "flat").string()});
    CHECK(flat.code == 0);
    CHECK(flat.err.find("warning") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "flat" / "f1.png"));
    CHECK(load_image(dir / "flat" / "bg.png").planes[0].samples[0] == 255.0);
}
