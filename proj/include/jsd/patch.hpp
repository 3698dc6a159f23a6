#pragma once

// Non-local similar-patch grouping with coding-block phase awareness.
// Candidates that sit at the same position relative to the 8x8 coding
// lattice as an edge-anchored patch carry the same quantization artifact,
// so they are kept out of the group; candidates sharing the row/column of
// an axis-aligned edge get their similarity penalized instead.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "jsd/errors.hpp"
#include "jsd/image.hpp"

namespace jsd {

struct PatchSpec {
    int patch_side = 8;    // p, patch dimension m = p*p
    int group_size = 60;   // M, patches per group
    int stride = 4;        // anchor grid step
    int window_normal = 61;  // odd, candidate window side
    int window_smooth = 11;  // odd, shrunk window for flat anchors
    double smooth_var_threshold = 3.0;
    double edge_energy_floor = 900.0;  // mean squared gradient per pixel
    double edge_eigen_ratio = 4.0;     // structure tensor anisotropy
    double row_col_penalty = 1.5;      // same-row/column distance factor
    double prefilter_sigma = 0.8;      // first-iteration low-pass
    int prefilter_radius = 1;
};

enum class PatchClass { smooth, edge, texture };
enum class EdgeOrientation { none, horizontal, vertical, diagonal, antidiagonal };

struct PatchClassification {
    PatchClass cls = PatchClass::texture;
    EdgeOrientation orientation = EdgeOrientation::none;
    double variance = 0.0;
};

// Classifies the p x p patch anchored at (x,y): flat patches by sample
// variance (strict <, boundary counts as texture), edges by structure
// tensor built from forward differences.
inline PatchClassification classify_patch(const PixelImage& img, int x,
                                          int y, const PatchSpec& spec) {
    const int p = spec.patch_side;
    PatchClassification out;

    double mean = 0.0;
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) mean += img.at(x + i, y + j);
    mean /= p * p;
    double var = 0.0;
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) {
            double d = img.at(x + i, y + j) - mean;
            var += d * d;
        }
    var /= p * p;
    out.variance = var;
    if (var < spec.smooth_var_threshold) {
        out.cls = PatchClass::smooth;
        return out;
    }

    // undivided central differences; border pixels of the patch contribute
    // nothing so the tensor only sees in-patch structure
    double jxx = 0, jyy = 0, jxy = 0;
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) {
            double gx = (i >= 1 && i + 1 < p)
                            ? img.at(x + i + 1, y + j) - img.at(x + i - 1, y + j)
                            : 0.0;
            double gy = (j >= 1 && j + 1 < p)
                            ? img.at(x + i, y + j + 1) - img.at(x + i, y + j - 1)
                            : 0.0;
            jxx += gx * gx;
            jyy += gy * gy;
            jxy += gx * gy;
        }
    double energy = (jxx + jyy) / (p * p);
    double tr = jxx + jyy;
    double det = std::sqrt((jxx - jyy) * (jxx - jyy) + 4.0 * jxy * jxy);
    double l1 = 0.5 * (tr + det), l2 = 0.5 * (tr - det);
    bool anisotropic = l1 > spec.edge_eigen_ratio * std::max(l2, 1e-12);
    if (anisotropic && energy > spec.edge_energy_floor) {
        out.cls = PatchClass::edge;
        // dominant gradient angle; the edge runs perpendicular to it.
        // In image coordinates (y down): diagonal = along (1,1),
        // antidiagonal = along (1,-1).
        double theta = 0.5 * std::atan2(2.0 * jxy, jxx - jyy);
        double edge_deg = theta * 180.0 / 3.14159265358979323846 + 90.0;
        edge_deg = std::fmod(edge_deg + 180.0, 180.0);
        int bucket = static_cast<int>(std::floor(edge_deg / 45.0 + 0.5)) % 4;
        static constexpr EdgeOrientation kBuckets[4] = {
            EdgeOrientation::horizontal, EdgeOrientation::diagonal,
            EdgeOrientation::vertical, EdgeOrientation::antidiagonal};
        out.orientation = kBuckets[bucket];
    }
    return out;
}

struct PatchGroup {
    int ax = 0, ay = 0;  // anchor top-left
    std::vector<std::pair<int, int>> coords;  // members, anchor first
    Eigen::MatrixXd patches;  // m x |coords|, column = vectorized patch
    PatchClass anchor_class = PatchClass::texture;
    EdgeOrientation orientation = EdgeOrientation::none;
    bool relaxed = false;  // exclusions/window had to be relaxed to fill M
};

namespace detail {

struct Candidate {
    double dist;
    int64_t scan;  // deterministic tie break
    int x, y;
};

inline double patch_ssd(const PixelImage& img, int ax, int ay, int cx,
                        int cy, int p, double bail) {
    double acc = 0.0;
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < p; ++i) {
            double d = img.at(ax + i, ay + j) - img.at(cx + i, cy + j);
            acc += d * d;
        }
        if (acc > bail) return acc;
    }
    return acc;
}

inline void gather_candidates(const PixelImage& dist_img, int ax, int ay,
                              int window, const PatchSpec& spec,
                              EdgeOrientation orient, bool penalize,
                              std::vector<Candidate>& out) {
    const int p = spec.patch_side;
    const int half = (window - 1) / 2;
    const int x0 = std::max(0, ax - half);
    const int x1 = std::min(dist_img.width - p, ax + half);
    const int y0 = std::max(0, ay - half);
    const int y1 = std::min(dist_img.height - p, ay + half);
    out.clear();
    out.reserve(static_cast<size_t>(x1 - x0 + 1) * (y1 - y0 + 1));
    for (int cy = y0; cy <= y1; ++cy)
        for (int cx = x0; cx <= x1; ++cx) {
            if (cx == ax && cy == ay) continue;
            double d = patch_ssd(dist_img, ax, ay, cx, cy, p, 1e300);
            if (penalize &&
                ((orient == EdgeOrientation::horizontal && cy == ay) ||
                 (orient == EdgeOrientation::vertical && cx == ax)))
                d *= spec.row_col_penalty;
            out.push_back({d, static_cast<int64_t>(cy) * dist_img.width + cx,
                           cx, cy});
        }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.scan < b.scan;
    });
}

inline Eigen::MatrixXd vectorize_patches(
    const PixelImage& img, const std::vector<std::pair<int, int>>& coords,
    int p) {
    Eigen::MatrixXd m(p * p, static_cast<Eigen::Index>(coords.size()));
    for (size_t c = 0; c < coords.size(); ++c)
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i)
                m(j * p + i, static_cast<Eigen::Index>(c)) =
                    img.at(coords[c].first + i, coords[c].second + j);
    return m;
}

}  // namespace detail

// Collects the M most similar patches for the anchor at (ax,ay).
// Distances are measured on `img` except in the first iteration, where a
// low-pass filtered copy decouples the match from compression noise
// (pass it as `prefiltered`, or let the function compute it).
// Edge anchors never take two members with the same block phase; if the
// rules leave fewer than M members, they are relaxed and the group is
// flagged.
inline PatchGroup find_similar(const PixelImage& img, int ax, int ay,
                               const PatchSpec& spec, int iteration,
                               const PixelImage* prefiltered = nullptr) {
    const int p = spec.patch_side;
    const int M = spec.group_size;

    PixelImage blurred;
    const PixelImage* dist_img = &img;
    if (iteration == 1) {
        if (prefiltered) {
            dist_img = prefiltered;
        } else {
            blurred = gaussian_blur(img, spec.prefilter_sigma,
                                    spec.prefilter_radius);
            dist_img = &blurred;
        }
    }

    PatchGroup g;
    g.ax = ax;
    g.ay = ay;
    auto cls = classify_patch(img, ax, ay, spec);
    g.anchor_class = cls.cls;
    g.orientation = cls.orientation;

    const bool is_edge = cls.cls == PatchClass::edge;
    int window = (cls.cls == PatchClass::smooth) ? spec.window_smooth
                                                 : spec.window_normal;

    std::vector<detail::Candidate> cands;
    auto select = [&](bool exclude_phase, bool distinct_phase) {
        g.coords.clear();
        g.coords.emplace_back(ax, ay);
        std::vector<uint8_t> used(64, 0);
        used[(ay % 8) * 8 + (ax % 8)] = 1;
        for (const auto& c : cands) {
            if (static_cast<int>(g.coords.size()) >= M) break;
            int phase = (c.y % 8) * 8 + (c.x % 8);
            if (exclude_phase && phase == (ay % 8) * 8 + (ax % 8)) continue;
            if (distinct_phase && used[phase]) continue;
            used[phase] = 1;
            g.coords.emplace_back(c.x, c.y);
        }
    };

    detail::gather_candidates(*dist_img, ax, ay, window, spec,
                              cls.orientation, is_edge, cands);
    select(is_edge, is_edge);

    if (static_cast<int>(g.coords.size()) < M) {
        g.relaxed = true;
        if (is_edge) {
            select(true, false);  // keep anchor-phase exclusion only
            if (static_cast<int>(g.coords.size()) < M) select(false, false);
        }
        if (static_cast<int>(g.coords.size()) < M &&
            window != spec.window_normal) {
            detail::gather_candidates(*dist_img, ax, ay, spec.window_normal,
                                      spec, cls.orientation, is_edge, cands);
            select(false, false);
        }
        // fewer positions than M exist in the whole window: keep them all
    }

    g.patches = detail::vectorize_patches(img, g.coords, p);
    return g;
}

// A group after denoising: member coordinates plus patch estimates.
struct DenoisedGroup {
    std::vector<std::pair<int, int>> coords;
    Eigen::MatrixXd patches;  // m x |coords|
};

// Streaming uniform-average aggregation; per-pixel sums accumulate in
// group/member order, so results do not depend on how work was scheduled.
class PatchAccumulator {
public:
    PatchAccumulator(int width, int height, int patch_side)
        : w_(width), h_(height), p_(patch_side),
          sum_(static_cast<size_t>(width) * height, 0.0),
          count_(static_cast<size_t>(width) * height, 0) {}

    void add(const DenoisedGroup& g) {
        for (size_t c = 0; c < g.coords.size(); ++c) {
            auto [x0, y0] = g.coords[c];
            for (int j = 0; j < p_; ++j)
                for (int i = 0; i < p_; ++i) {
                    size_t idx = static_cast<size_t>(y0 + j) * w_ + (x0 + i);
                    sum_[idx] += g.patches(j * p_ + i,
                                           static_cast<Eigen::Index>(c));
                    count_[idx] += 1;
                }
        }
    }

    PixelImage finalize() const {
        PixelImage out(w_, h_);
        for (size_t i = 0; i < sum_.size(); ++i) {
            if (count_[i] == 0)
                throw CoverageHoleError("pixel not covered by any patch");
            out.samples[i] = sum_[i] / count_[i];
        }
        return out;
    }

private:
    int w_, h_, p_;
    std::vector<double> sum_;
    std::vector<int32_t> count_;
};

inline PixelImage aggregate(std::span<const DenoisedGroup> groups, int width,
                            int height, int patch_side) {
    PatchAccumulator acc(width, height, patch_side);
    for (const auto& g : groups) acc.add(g);
    return acc.finalize();
}

// Anchor grid with the given stride, always covering the last row/column.
inline std::vector<std::pair<int, int>> anchor_grid(int width, int height,
                                                    const PatchSpec& spec) {
    std::vector<int> xs, ys;
    for (int x = 0;; x += spec.stride) {
        if (x >= width - spec.patch_side) {
            xs.push_back(width - spec.patch_side);
            break;
        }
        xs.push_back(x);
    }
    for (int y = 0;; y += spec.stride) {
        if (y >= height - spec.patch_side) {
            ys.push_back(height - spec.patch_side);
            break;
        }
        ys.push_back(y);
    }
    std::vector<std::pair<int, int>> out;
    out.reserve(xs.size() * ys.size());
    for (int y : ys)
        for (int x : xs) out.emplace_back(x, y);
    return out;
}

}  // namespace jsd
