#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jsd/errors.hpp"

namespace jsd {

// Real-valued raster. Samples are interleaved row-major, nominal range
// [0,255]; intermediate processing may leave them outside that range,
// quantization to 8 bits happens only on export.
struct PixelImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> samples;

    PixelImage() = default;
    PixelImage(int w, int h, int c = 1, double fill = 0.0)
        : width(w), height(h), channels(c),
          samples(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c = 0) {
        return samples[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return samples[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t size() const { return samples.size(); }
};

inline uint8_t to_u8(double v) {
    double r = v < 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5);
    return static_cast<uint8_t>(std::clamp(r, 0.0, 255.0));
}

inline std::vector<uint8_t> export_u8(const PixelImage& img) {
    std::vector<uint8_t> out(img.size());
    for (size_t i = 0; i < img.size(); ++i) out[i] = to_u8(img.samples[i]);
    return out;
}

// 8-bit re-import: round/clamp in place, as if written out and read back.
inline PixelImage quantize_u8(const PixelImage& img) {
    PixelImage out = img;
    for (double& v : out.samples) v = to_u8(v);
    return out;
}

namespace detail {

inline int pnm_token(std::istream& in) {
    // skips whitespace and '#' comments
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v;
    if (!(in >> v)) throw IoError("malformed PNM header");
    return v;
}

}  // namespace detail

inline PixelImage load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char p, t;
    in.get(p);
    in.get(t);
    if (p != 'P' || (t != '5' && t != '6'))
        throw IoError(path + ": not a binary PGM/PPM (P5/P6)");
    int channels = (t == '5') ? 1 : 3;
    int w = detail::pnm_token(in);
    int h = detail::pnm_token(in);
    int maxval = detail::pnm_token(in);
    if (maxval <= 0 || maxval > 255)
        throw IoError(path + ": only 8-bit PNM supported");
    in.get();  // single whitespace before raster
    PixelImage img(w, h, channels);
    std::vector<uint8_t> raw(img.size());
    in.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (static_cast<size_t>(in.gcount()) != raw.size())
        throw IoError(path + ": truncated raster");
    for (size_t i = 0; i < raw.size(); ++i) img.samples[i] = raw[i];
    return img;
}

inline void save_pnm(const PixelImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    auto raw = export_u8(img);
    out.write(reinterpret_cast<const char*>(raw.data()), raw.size());
    if (!out) throw IoError("short write to " + path);
}

// JFIF YCbCr (BT.601 full range).
inline void rgb_to_ycbcr(double r, double g, double b,
                         double& y, double& cb, double& cr) {
    y = 0.299 * r + 0.587 * g + 0.114 * b;
    cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0;
    cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0;
}

inline void ycbcr_to_rgb(double y, double cb, double cr,
                         double& r, double& g, double& b) {
    r = y + 1.402 * (cr - 128.0);
    g = y - 0.344136286 * (cb - 128.0) - 0.714136286 * (cr - 128.0);
    b = y + 1.772 * (cb - 128.0);
}

// Separable Gaussian with replicated edges on a single-channel image.
inline PixelImage gaussian_blur(const PixelImage& img, double sigma,
                                int radius) {
    if (sigma <= 0.0 || radius < 1) return img;
    std::vector<double> k(radius + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        k[i] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += (i == 0) ? k[i] : 2.0 * k[i];
    }
    for (double& v : k) v /= sum;

    const int w = img.width, h = img.height;
    PixelImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = k[0] * img.at(x, y);
            for (int i = 1; i <= radius; ++i)
                acc += k[i] * (img.at(std::max(x - i, 0), y) +
                               img.at(std::min(x + i, w - 1), y));
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = k[0] * tmp.at(x, y);
            for (int i = 1; i <= radius; ++i)
                acc += k[i] * (tmp.at(x, std::max(y - i, 0)) +
                               tmp.at(x, std::min(y + i, h - 1)));
            out.at(x, y) = acc;
        }
    return out;
}

}  // namespace jsd
