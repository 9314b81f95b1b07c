#include "doctest.h"
#include "test_support.hpp"

#include "hrc/error.hpp"
#include "hrc/image.hpp"

#include <fstream>
#include <iterator>
#include <numeric>

using namespace hrc;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes)
{
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("load_image: single-pixel PGM")
{
    test::TempDir dir("img");
    write_bytes(dir / "one.pgm", std::string("P5\n1 1\n255\n") + '\x80');
    const Image img = load_image(dir / "one.pgm");
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    CHECK(img.colorspace == ColorSpace::Gray);
    REQUIRE(img.plane_count() == 1);
    CHECK(img.planes[0].samples[0] == 128.0);
}

TEST_CASE("load_image: all-zero PPM with comments")
{
    test::TempDir dir("img");
    write_bytes(dir / "zero.ppm", std::string("P6\n# made by hand\n2 2\n255\n") + std::string(12, '\0'));
    const Image img = load_image(dir / "zero.ppm");
    CHECK(img.width == 2);
    CHECK(img.colorspace == ColorSpace::RGB);
    REQUIRE(img.plane_count() == 3);
    for (const auto& p : img.planes) {
        CHECK(std::all_of(p.samples.begin(), p.samples.end(), [](double v) { return v == 0.0; }));
    }
}

TEST_CASE("load_image: 768x512 PNG matches an independent decoder")
{
    // Dimensions and per-plane sums computed with Pillow/numpy when the fixture was written.
    const Image img = load_image(test::data_dir() / "gradient_768x512.png");
    CHECK(img.width == 768);
    CHECK(img.height == 512);
    CHECK(img.colorspace == ColorSpace::RGB);
    const std::array<double, 3> sums = {49938944.0, 49939200.0, 50135040.0};
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& s = img.planes[c].samples;
        CHECK(std::accumulate(s.begin(), s.end(), 0.0) == sums[c]);
    }
}

TEST_CASE("load_image: error paths")
{
    test::TempDir dir("img");
    CHECK_THROWS_AS(load_image(dir / "missing.png"), IoError);

    write_bytes(dir / "text.txt", "hello world");
    CHECK_THROWS_AS(load_image(dir / "text.txt"), FormatError);

    write_bytes(dir / "zero.pgm", "P5\n0 4\n255\n");
    CHECK_THROWS_AS(load_image(dir / "zero.pgm"), FormatError);

    write_bytes(dir / "deep.pgm", "P5\n1 1\n65535\n\x01\x02");
    CHECK_THROWS_AS(load_image(dir / "deep.pgm"), FormatError);

    write_bytes(dir / "short.ppm", "P6\n4 4\n255\n\x01\x02");
    CHECK_THROWS_AS(load_image(dir / "short.ppm"), FormatError);
}

TEST_CASE("save then load is lossless for 8-bit data")
{
    std::mt19937_64 rng(7);
    test::TempDir dir("img");
    for (auto cs : {ColorSpace::Gray, ColorSpace::RGB}) {
        const Image img = test::random_image(37, 19, cs, rng);
        for (const char* ext : {".png", cs == ColorSpace::Gray ? ".pgm" : ".ppm"}) {
            const auto path = dir / (std::string("rt") + ext);
            save_image(img, path);
            const Image back = load_image(path);
            REQUIRE(back.plane_count() == img.plane_count());
            for (std::size_t p = 0; p < img.plane_count(); ++p) {
                CHECK(test::max_abs_diff(back.planes[p], img.planes[p]) == 0.0);
            }
        }
    }
}

TEST_CASE("PNM load then save reproduces the file byte for byte")
{
    test::TempDir dir("img");
    std::string raster;
    for (int i = 0; i < 5 * 3 * 3; ++i) {
        raster.push_back(static_cast<char>(i * 5));
    }
    const std::string original = "P6\n5 3\n255\n" + raster;
    write_bytes(dir / "a.ppm", original);
    save_image(load_image(dir / "a.ppm"), dir / "b.ppm");
    CHECK(read_bytes(dir / "b.ppm") == original);
}

TEST_CASE("save_image clamps and rounds")
{
    test::TempDir dir("img");
    Image img(3, 1, ColorSpace::Gray);
    img.planes[0].samples = {-4.0, 127.5, 300.0};
    save_image(img, dir / "c.pgm");
    const Image back = load_image(dir / "c.pgm");
    CHECK(back.planes[0].samples == std::vector<double>{0.0, 128.0, 255.0});
    CHECK_THROWS_AS(save_image(img, dir / "c.ppm"), InvalidArgument);
    CHECK_THROWS_AS(save_image(img, dir / "c.bmp"), FormatError);
}

TEST_CASE("convert_colorspace: BT.601 full-range anchors")
{
    Image white(1, 1, ColorSpace::RGB, 255.0);
    const Image yw = convert_colorspace(white, ColorSpace::YCbCr601);
    CHECK(yw.planes[0].samples[0] == doctest::Approx(255.0).epsilon(1e-12));
    CHECK(yw.planes[1].samples[0] == doctest::Approx(128.0).epsilon(1e-12));
    CHECK(yw.planes[2].samples[0] == doctest::Approx(128.0).epsilon(1e-12));

    Image black(1, 1, ColorSpace::RGB, 0.0);
    const Image yb = convert_colorspace(black, ColorSpace::YCbCr601);
    CHECK(yb.planes[0].samples[0] == doctest::Approx(0.0));
    CHECK(yb.planes[1].samples[0] == doctest::Approx(128.0));
    CHECK(yb.planes[2].samples[0] == doctest::Approx(128.0));

    // Pure red: Y = 0.299 * 255, Cr at its maximum 255.5 - 0.5 = 255.
    Image red(1, 1, ColorSpace::RGB);
    red.planes[0].samples[0] = 255.0;
    const Image yr = convert_colorspace(red, ColorSpace::YCbCr601);
    CHECK(yr.planes[0].samples[0] == doctest::Approx(76.245));
    CHECK(yr.planes[2].samples[0] == doctest::Approx(255.5));
}

TEST_CASE("convert_colorspace: round trip of random images stays within 0.51")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Image img = test::random_image(31, 17, ColorSpace::RGB, rng, false);
        const Image back = convert_colorspace(convert_colorspace(img, ColorSpace::YCbCr601), ColorSpace::RGB);
        CHECK(back.colorspace == ColorSpace::RGB);
        for (std::size_t p = 0; p < 3; ++p) {
            const double err = test::max_abs_diff(back.planes[p], img.planes[p]);
            CHECK(err <= 0.51);
            CHECK(err < 1e-9);
        }
    }
    Image gray(2, 2, ColorSpace::Gray, 9.0);
    CHECK(convert_colorspace(gray, ColorSpace::YCbCr601).colorspace == ColorSpace::Gray);
}

TEST_CASE("pad_to_multiple replicates edges and crop undoes it")
{
    Plane p(3, 2);
    p.samples = {1, 2, 3, 4, 5, 6};
    const Plane padded = pad_to_multiple(p, 4);
    CHECK(padded.width == 4);
    CHECK(padded.height == 4);
    CHECK(padded.at(3, 0) == 3);
    CHECK(padded.at(3, 3) == 6);
    CHECK(padded.at(0, 3) == 4);
    CHECK(crop(padded, 3, 2).samples == p.samples);
    CHECK(pad_to_multiple(padded, 4).samples == padded.samples);
}

TEST_CASE("Image::validate catches inconsistent planes")
{
    Image img(4, 4, ColorSpace::RGB);
    CHECK_NOTHROW(img.validate());
    img.planes.pop_back();
    CHECK_THROWS_AS(img.validate(), InvalidArgument);
}
