#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "jsd/image.hpp"

namespace jsd {

// 8x8 block, row-major; spatial or frequency domain depending on context.
using Block = std::array<double, 64>;

// Natural (row-major) index of the i-th zig-zag position.
inline constexpr std::array<int, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

// Unnormalized DCT-II: X_k = sum_n x_n cos(pi/N (n+1/2) k).
inline std::vector<double> dct1d(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += x[i] * std::cos(std::numbers::pi / n * (i + 0.5) * k);
        out[k] = acc;
    }
    return out;
}

namespace detail {

struct DctBasis {
    // c[k][n] = s_k * cos(pi (2n+1) k / 16), orthonormal 1-D rows
    double c[8][8];
    DctBasis() {
        for (int k = 0; k < 8; ++k) {
            double s = (k == 0) ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int n = 0; n < 8; ++n)
                c[k][n] = s * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
        }
    }
};

inline const DctBasis& dct_basis() {
    static const DctBasis b;
    return b;
}

// out = C * in * C^T (forward) or C^T * in * C (inverse); fixed summation
// order keeps results reproducible across runs.
inline Block dct_apply(const Block& in, bool forward) {
    const auto& c = dct_basis().c;
    Block tmp{}, out{};
    for (int r = 0; r < 8; ++r)
        for (int k = 0; k < 8; ++k) {
            double acc = 0.0;
            for (int n = 0; n < 8; ++n)
                acc += (forward ? c[k][n] : c[n][k]) * in[r * 8 + n];
            tmp[r * 8 + k] = acc;
        }
    for (int k = 0; k < 8; ++k)
        for (int col = 0; col < 8; ++col) {
            double acc = 0.0;
            for (int n = 0; n < 8; ++n)
                acc += (forward ? c[k][n] : c[n][k]) * tmp[n * 8 + col];
            out[k * 8 + col] = acc;
        }
    return out;
}

}  // namespace detail

// Orthonormal 2-D DCT-II, JPEG block convention.
inline Block dct2d(const Block& b) { return detail::dct_apply(b, true); }
inline Block idct2d(const Block& b) { return detail::dct_apply(b, false); }

// Midtread quantizer: index = floor(c/q + 1/2).
inline long quantize(double coeff, double step) {
    return static_cast<long>(std::floor(coeff / step + 0.5));
}
inline double dequantize(long index, double step) { return index * step; }

// Non-overlapping 8x8 tiling on the coding-block lattice. Images whose
// dimensions are not multiples of 8 are padded by edge replication.
struct BlockGrid {
    int bw = 0;          // blocks per row
    int bh = 0;          // blocks per column
    int orig_w = 0;      // pre-padding image size
    int orig_h = 0;
    std::vector<Block> blocks;  // row-major

    Block& at(int bx, int by) { return blocks[static_cast<size_t>(by) * bw + bx]; }
    const Block& at(int bx, int by) const {
        return blocks[static_cast<size_t>(by) * bw + bx];
    }
};

inline BlockGrid extract_blocks(const PixelImage& img) {
    BlockGrid g;
    g.orig_w = img.width;
    g.orig_h = img.height;
    g.bw = (img.width + 7) / 8;
    g.bh = (img.height + 7) / 8;
    g.blocks.resize(static_cast<size_t>(g.bw) * g.bh);
    for (int by = 0; by < g.bh; ++by)
        for (int bx = 0; bx < g.bw; ++bx) {
            Block& b = g.at(bx, by);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) {
                    int sx = std::min(bx * 8 + x, img.width - 1);
                    int sy = std::min(by * 8 + y, img.height - 1);
                    b[y * 8 + x] = img.at(sx, sy);
                }
        }
    return g;
}

// Inverse of extract_blocks on the padded canvas; pass crop=true to drop
// the replicated padding again.
inline PixelImage assemble_blocks(const BlockGrid& g, bool crop = true) {
    PixelImage padded(g.bw * 8, g.bh * 8);
    for (int by = 0; by < g.bh; ++by)
        for (int bx = 0; bx < g.bw; ++bx) {
            const Block& b = g.at(bx, by);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    padded.at(bx * 8 + x, by * 8 + y) = b[y * 8 + x];
        }
    if (!crop || (padded.width == g.orig_w && padded.height == g.orig_h))
        return padded;
    PixelImage out(g.orig_w, g.orig_h);
    for (int y = 0; y < g.orig_h; ++y)
        for (int x = 0; x < g.orig_w; ++x) out.at(x, y) = padded.at(x, y);
    return out;
}

}  // namespace jsd
