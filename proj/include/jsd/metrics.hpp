#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "jsd/errors.hpp"
#include "jsd/image.hpp"

namespace jsd {

namespace detail {

inline PixelImage luma_of(const PixelImage& img) {
    if (img.channels == 1) return img;
    PixelImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                           0.114 * img.at(x, y, 2);
    return out;
}

inline void check_geometry(const PixelImage& a, const PixelImage& b) {
    if (a.width != b.width || a.height != b.height ||
        a.channels != b.channels)
        throw GeometryMismatchError("metric inputs differ in geometry");
}

}  // namespace detail

inline double mse(const PixelImage& a, const PixelImage& b,
                  bool luma_only = true) {
    detail::check_geometry(a, b);
    const PixelImage& x = luma_only ? detail::luma_of(a) : a;
    const PixelImage& y = luma_only ? detail::luma_of(b) : b;
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x.samples[i] - y.samples[i];
        acc += d * d;
    }
    return acc / x.size();
}

// 10 log10(255^2 / MSE); +inf for identical images.
inline double psnr(const PixelImage& a, const PixelImage& b,
                   bool luma_only = true) {
    double m = mse(a, b, luma_only);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

namespace detail {

// SSIM on one channel: 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03, L=255, mean over window positions fully inside the image.
inline double ssim_plane(const PixelImage& x, const PixelImage& y) {
    constexpr int kRadius = 5;
    constexpr double kSigma = 1.5, kL = 255.0;
    constexpr double c1 = (0.01 * kL) * (0.01 * kL);
    constexpr double c2 = (0.03 * kL) * (0.03 * kL);

    double w[2 * kRadius + 1][2 * kRadius + 1];
    double sum = 0.0;
    for (int j = -kRadius; j <= kRadius; ++j)
        for (int i = -kRadius; i <= kRadius; ++i) {
            w[j + kRadius][i + kRadius] =
                std::exp(-(i * i + j * j) / (2.0 * kSigma * kSigma));
            sum += w[j + kRadius][i + kRadius];
        }
    for (auto& row : w)
        for (double& v : row) v /= sum;

    if (x.width < 2 * kRadius + 1 || x.height < 2 * kRadius + 1)
        throw GeometryMismatchError("image smaller than the SSIM window");

    double acc = 0.0;
    long count = 0;
    for (int cy = kRadius; cy < x.height - kRadius; ++cy)
        for (int cx = kRadius; cx < x.width - kRadius; ++cx) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int j = -kRadius; j <= kRadius; ++j)
                for (int i = -kRadius; i <= kRadius; ++i) {
                    double wv = w[j + kRadius][i + kRadius];
                    double xv = x.at(cx + i, cy + j);
                    double yv = y.at(cx + i, cy + j);
                    mx += wv * xv;
                    my += wv * yv;
                    sxx += wv * xv * xv;
                    syy += wv * yv * yv;
                    sxy += wv * xv * yv;
                }
            sxx -= mx * mx;
            syy -= my * my;
            sxy -= mx * my;
            acc += ((2 * mx * my + c1) * (2 * sxy + c2)) /
                   ((mx * mx + my * my + c1) * (sxx + syy + c2));
            ++count;
        }
    return acc / count;
}

}  // namespace detail

inline double ssim(const PixelImage& a, const PixelImage& b,
                   bool luma_only = true) {
    detail::check_geometry(a, b);
    if (luma_only || a.channels == 1)
        return detail::ssim_plane(detail::luma_of(a), detail::luma_of(b));
    double acc = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        PixelImage pa(a.width, a.height), pb(b.width, b.height);
        for (int y = 0; y < a.height; ++y)
            for (int x = 0; x < a.width; ++x) {
                pa.at(x, y) = a.at(x, y, c);
                pb.at(x, y) = b.at(x, y, c);
            }
        acc += detail::ssim_plane(pa, pb);
    }
    return acc / a.channels;
}

}  // namespace jsd
