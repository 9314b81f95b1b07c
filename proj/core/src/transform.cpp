#include "hrc/transform.hpp"

#include "hrc/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hrc {

namespace {

// basis[k * n + x] = alpha(k) * cos(pi * (2x + 1) * k / 2n)
std::vector<double> make_basis(std::size_t n)
{
    std::vector<double> basis(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        const double alpha = k == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
        for (std::size_t x = 0; x < n; ++x) {
            basis[k * n + x] = alpha * std::cos(std::numbers::pi * static_cast<double>((2 * x + 1) * k) /
                                                static_cast<double>(2 * n));
        }
    }
    return basis;
}

std::vector<std::pair<std::size_t, std::size_t>> make_zigzag(std::size_t n)
{
    std::vector<std::pair<std::size_t, std::size_t>> order;
    order.reserve(n * n);
    for (std::size_t s = 0; s + 1 < 2 * n; ++s) {
        const std::size_t lo = s < n ? 0 : s - n + 1;
        const std::size_t hi = s < n ? s : n - 1;
        if (s % 2 == 1) {
            for (std::size_t r = lo; r <= hi; ++r) {
                order.emplace_back(r, s - r);
            }
        } else {
            for (std::size_t r = hi + 1; r-- > lo;) {
                order.emplace_back(r, s - r);
            }
        }
    }
    return order;
}

struct BlockTables {
    std::size_t n;
    std::vector<double> basis;
    std::vector<std::pair<std::size_t, std::size_t>> zigzag;
};

const BlockTables& tables(std::size_t block_size)
{
    static const BlockTables t8{8, make_basis(8), make_zigzag(8)};
    static const BlockTables t16{16, make_basis(16), make_zigzag(16)};
    if (block_size == 8) {
        return t8;
    }
    if (block_size == 16) {
        return t16;
    }
    throw InvalidArgument("unsupported block size " + std::to_string(block_size) + " (expected 8 or 16)");
}

} // namespace

bool is_supported_block_size(std::size_t block_size)
{
    return block_size == 8 || block_size == 16;
}

const std::vector<std::pair<std::size_t, std::size_t>>& zigzag_order(std::size_t block_size)
{
    return tables(block_size).zigzag;
}

LatentTensor analyze(const Plane& plane, std::size_t block_size)
{
    const auto& t = tables(block_size);
    const std::size_t n = t.n;
    if (plane.width == 0 || plane.height == 0 || plane.width % n != 0 || plane.height % n != 0) {
        throw InvalidArgument("plane dimensions must be nonzero multiples of the block size");
    }
    LatentTensor lat(n * n, plane.height / n, plane.width / n);
    std::vector<double> rows(n * n);
    for (std::size_t bi = 0; bi < lat.height; ++bi) {
        for (std::size_t bj = 0; bj < lat.width; ++bj) {
            // rows = block * basis^T (transform along x)
            for (std::size_t y = 0; y < n; ++y) {
                const double* src = &plane.samples[(bi * n + y) * plane.width + bj * n];
                for (std::size_t v = 0; v < n; ++v) {
                    const double* b = &t.basis[v * n];
                    double acc = 0.0;
                    for (std::size_t x = 0; x < n; ++x) {
                        acc += src[x] * b[x];
                    }
                    rows[y * n + v] = acc;
                }
            }
            // coefficient (u, v) = sum_y basis[u][y] * rows[y][v]
            for (std::size_t k = 0; k < n * n; ++k) {
                const auto [u, v] = t.zigzag[k];
                const double* b = &t.basis[u * n];
                double acc = 0.0;
                for (std::size_t y = 0; y < n; ++y) {
                    acc += b[y] * rows[y * n + v];
                }
                lat.at(k, bi, bj) = acc;
            }
        }
    }
    return lat;
}

Plane synthesize(const LatentTensor& lat, std::size_t block_size)
{
    const auto& t = tables(block_size);
    const std::size_t n = t.n;
    if (lat.channels != n * n || lat.data.size() != lat.channels * lat.height * lat.width) {
        throw InvalidArgument("latent tensor does not match block size");
    }
    Plane out(lat.width * n, lat.height * n);
    std::vector<double> coeff(n * n);
    std::vector<double> cols(n * n);
    for (std::size_t bi = 0; bi < lat.height; ++bi) {
        for (std::size_t bj = 0; bj < lat.width; ++bj) {
            for (std::size_t k = 0; k < n * n; ++k) {
                const auto [u, v] = t.zigzag[k];
                coeff[u * n + v] = lat.at(k, bi, bj);
            }
            // cols[y][v] = sum_u basis[u][y] * coeff[u][v]
            for (std::size_t y = 0; y < n; ++y) {
                for (std::size_t v = 0; v < n; ++v) {
                    double acc = 0.0;
                    for (std::size_t u = 0; u < n; ++u) {
                        acc += t.basis[u * n + y] * coeff[u * n + v];
                    }
                    cols[y * n + v] = acc;
                }
            }
            for (std::size_t y = 0; y < n; ++y) {
                double* dst = &out.samples[(bi * n + y) * out.width + bj * n];
                for (std::size_t x = 0; x < n; ++x) {
                    double acc = 0.0;
                    for (std::size_t v = 0; v < n; ++v) {
                        acc += cols[y * n + v] * t.basis[v * n + x];
                    }
                    dst[x] = acc;
                }
            }
        }
    }
    return out;
}

} // namespace hrc
