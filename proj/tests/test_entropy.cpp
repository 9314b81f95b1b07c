#include "doctest.h"
#include "test_support.hpp"

#include "hrc/entropy.hpp"
#include "hrc/error.hpp"

#include <cmath>
#include <map>

using namespace hrc;

namespace {

std::vector<std::int32_t> iid(std::size_t n, int lo, int hi, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(lo, hi);
    std::vector<std::int32_t> v(n);
    for (auto& s : v) {
        s = dist(rng);
    }
    return v;
}

// Two-sided geometric symbols: zero with probability p0, magnitudes geometric.
std::vector<std::int32_t> laplacian(std::size_t n, double p0, double decay, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution zero(p0);
    std::bernoulli_distribution negative(0.5);
    std::geometric_distribution<int> mag(decay);
    std::vector<std::int32_t> v(n);
    for (auto& s : v) {
        if (!zero(rng)) {
            const int m = 1 + mag(rng);
            s = negative(rng) ? -m : m;
        }
    }
    return v;
}

std::vector<std::int32_t> round_trip(const std::vector<std::int32_t>& v, const SegmentShape& shape,
                                     const ContextConfig& ctx = {})
{
    const Segment seg = encode_segment(v, shape, ctx);
    return decode_segment(seg, v.size(), shape, ctx);
}

SegmentShape line(std::size_t n)
{
    return {1, 1, n};
}

} // namespace

TEST_CASE("range coder: bits and direct bits round trip")
{
    std::mt19937_64 rng(4);
    std::bernoulli_distribution skew(0.9);
    std::vector<unsigned> bits(50000);
    for (auto& b : bits) {
        b = skew(rng);
    }
    rc::Encoder enc;
    std::vector<rc::BitModel> models(4);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        enc.encode(models[i % 4], bits[i]);
        if (i % 1000 == 0) {
            enc.encode_direct(static_cast<std::uint32_t>(i), 20);
        }
    }
    const auto bytes = enc.finish();
    rc::Decoder dec(bytes);
    std::vector<rc::BitModel> dmodels(4);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        REQUIRE(dec.decode(dmodels[i % 4]) == bits[i]);
        if (i % 1000 == 0) {
            REQUIRE(dec.decode_direct(20) == (i & 0xFFFFF));
        }
    }
    CHECK(dec.consumed() == bytes.size());
}

TEST_CASE("bit model stays strictly inside (0, 1)")
{
    rc::BitModel m;
    for (int i = 0; i < 10000; ++i) {
        m.update(0);
    }
    CHECK(m.p0() < rc::BitModel::kOne);
    for (int i = 0; i < 10000; ++i) {
        m.update(1);
    }
    CHECK(m.p0() > 0u);
}

TEST_CASE("encode_segment: empty and all-zero inputs")
{
    const Segment empty = encode_segment({}, line(0), {});
    CHECK(empty.payload.empty());
    CHECK(decode_segment(empty, 0, line(0), {}).empty());

    const std::vector<std::int32_t> zeros(4096, 0);
    const Segment seg = encode_segment(zeros, line(4096), {});
    CHECK(seg.payload.size() <= 4096 / 4);
    CHECK(round_trip(zeros, line(4096)) == zeros);
}

TEST_CASE("encode_segment: near-constant source adapts to the skew")
{
    std::vector<std::int32_t> v(4096, 0);
    v[100] = 1;
    v[3000] = -2;
    EncodeStats stats;
    const Segment seg = encode_segment(v, line(v.size()), {}, &stats);
    CHECK(seg.payload.size() <= v.size() / 4);
    // Payload matches the adaptive model's own cost up to the fixed flush and check overhead.
    CHECK(seg.payload.size() * 8.0 <= stats.model_bits + 8 * 8);
    CHECK(round_trip(v, line(v.size())) == v);
}

TEST_CASE("encode_segment: single +1 symbol")
{
    const std::vector<std::int32_t> v = {1};
    const Segment seg = encode_segment(v, line(1), {});
    CHECK(seg.payload.size() <= 8);
    CHECK(decode_segment(seg, 1, line(1), {}) == v);
}

TEST_CASE("encode_segment: uniform {-3..3} costs about log2(7) bits per symbol")
{
    const std::size_t n = 100000;
    const auto v = iid(n, -3, 3, 21);
    // Empirical entropy of the sample, computed directly from symbol frequencies.
    std::map<int, std::size_t> freq;
    for (auto s : v) {
        ++freq[s];
    }
    double h = 0.0;
    for (const auto& [s, c] : freq) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    CHECK(h == doctest::Approx(std::log2(7.0)).epsilon(0.01));
    const Segment seg = encode_segment(v, {4, 100, 250}, {});
    const double ideal = n * std::log2(7.0) / 8.0;
    CHECK(std::fabs(seg.payload.size() - ideal) / ideal <= 0.05);
    CHECK(decode_segment(seg, n, {4, 100, 250}, {}) == v);
}

TEST_CASE("encode_segment: one million random symbols round trip")
{
    const auto v = laplacian(1000000, 0.6, 0.3, 99);
    const SegmentShape shape{16, 250, 250};
    CHECK(round_trip(v, shape, {2, 4}) == v);
}

TEST_CASE("encode_segment: large magnitudes use the Exp-Golomb escape")
{
    std::vector<std::int32_t> v = {5, -6, 1000, -65536, 2147483646, -2147483646, 4, 0, 3};
    CHECK(round_trip(v, line(v.size())) == v);
}

TEST_CASE("encode_segment is deterministic")
{
    const auto v = laplacian(20000, 0.7, 0.4, 5);
    const SegmentShape shape{5, 40, 100};
    const Segment a = encode_segment(v, shape, {1, 3});
    const Segment b = encode_segment(v, shape, {1, 3});
    CHECK(a.payload == b.payload);
    CHECK(a.group == 1);
    CHECK(a.symbol_count == v.size());
}

TEST_CASE("encode_segment: payload within 10% of the adaptive model cost on skewed sources")
{
    for (double p0 : {0.5, 0.7, 0.9, 0.97}) {
        const auto v = laplacian(200000, p0, 0.5, static_cast<std::uint64_t>(p0 * 1000));
        EncodeStats stats;
        const Segment seg = encode_segment(v, {8, 100, 250}, {}, &stats);
        CAPTURE(p0);
        CHECK(seg.payload.size() * 8.0 <= 1.10 * stats.model_bits);
        CHECK(seg.payload.size() * 8.0 >= 0.99 * stats.model_bits);
    }
}

TEST_CASE("decode_segment: corruption is detected")
{
    const auto v = laplacian(5000, 0.6, 0.4, 8);
    const SegmentShape shape{5, 10, 100};
    const Segment seg = encode_segment(v, shape, {});

    SUBCASE("truncation")
    {
        Segment cut = seg;
        cut.payload.resize(cut.payload.size() / 2);
        CHECK_THROWS_AS(decode_segment(cut, v.size(), shape, {}), CorruptStream);
        cut.payload = seg.payload;
        cut.payload.pop_back();
        CHECK_THROWS_AS(decode_segment(cut, v.size(), shape, {}), CorruptStream);
    }
    SUBCASE("single byte flips")
    {
        // A flip either raises or, in low-order flush bits, leaves the symbols intact.
        std::size_t silent = 0;
        std::size_t detected = 0;
        for (std::size_t pos = 0; pos < seg.payload.size(); pos += 7) {
            Segment bad = seg;
            bad.payload[pos] ^= 0x5A;
            try {
                silent += decode_segment(bad, v.size(), shape, {}) != v;
            } catch (const CorruptStream&) {
                ++detected;
            }
        }
        CHECK(silent == 0);
        CHECK(detected > 0);
    }
    SUBCASE("count mismatch")
    {
        CHECK_THROWS_AS(decode_segment(seg, v.size() - 1, shape, {}), CorruptStream);
        Segment wrong = seg;
        wrong.symbol_count = 3;
        CHECK_THROWS_AS(decode_segment(wrong, v.size(), shape, {}), CorruptStream);
    }
}

TEST_CASE("segments are independent of one another")
{
    const auto a = laplacian(3000, 0.5, 0.3, 1);
    const auto b = laplacian(3000, 0.8, 0.6, 2);
    const SegmentShape shape{3, 10, 100};
    const Segment sa = encode_segment(a, shape, {0, 2});
    const Segment sb = encode_segment(b, shape, {1, 2});
    // Decode in reverse order, each from a fresh model.
    CHECK(decode_segment(sb, b.size(), shape, {1, 2}) == b);
    CHECK(decode_segment(sa, a.size(), shape, {0, 2}) == a);
}

TEST_CASE("encode_segment argument checks")
{
    const std::vector<std::int32_t> v(10, 1);
    CHECK_THROWS_AS(encode_segment(v, line(9), {}), InvalidArgument);
    CHECK_THROWS_AS(encode_segment(v, line(10), {3, 2}), InvalidArgument);
}

TEST_CASE("segment_bpp")
{
    Segment seg;
    seg.payload.resize(1000);
    CHECK(segment_bpp(seg, 768 * 512) == doctest::Approx(8000.0 / 393216.0));
    CHECK(segment_bpp(seg, 768 * 512) == doctest::Approx(0.02035).epsilon(1e-3));
    CHECK(segment_bpp(Segment{}, 100) == 0.0);
    CHECK_THROWS_AS(segment_bpp(seg, 0), InvalidArgument);
}
