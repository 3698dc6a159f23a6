#pragma once

// Per-group low-rank estimation: singular value thresholding in soft and
// hard variants, the threshold rule lambda = C * eps * sqrt(max(M,m)),
// and estimation of the compression RMSE eps -- either against a known
// original or blindly from the quantized coefficient statistics.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "jsd/errors.hpp"
#include "jsd/image.hpp"
#include "jsd/jpeg.hpp"

namespace jsd {

struct SvdFactors {
    Eigen::MatrixXd u;      // m x rank, orthonormal columns
    Eigen::VectorXd sigma;  // descending, non-negative
    Eigen::MatrixXd v;      // M x rank, orthonormal columns
};

inline SvdFactors svd(const Eigen::MatrixXd& y) {
    if (!y.allFinite()) throw NonFiniteError("matrix has non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXd> s(y, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
    return {s.matrixU(), s.singularValues(), s.matrixV()};
}

inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& sigma,
                                      double lambda) {
    return (sigma.array() - lambda).max(0.0);
}

// Keep-or-kill: survivors keep their magnitude (strict > at the boundary).
inline Eigen::VectorXd hard_threshold(const Eigen::VectorXd& sigma,
                                      double lambda) {
    return (sigma.array() > lambda).select(sigma, 0.0);
}

enum class ThresholdMode { soft, hard };

// U T(Sigma) V^T computed through the Gram matrix of the smaller side;
// equivalent to thresholding the SVD but one dense eigensolve instead of
// a full decomposition. Soft mode is the exact minimizer of
// |Y - X|_F^2 + lambda |X|_*.
inline Eigen::MatrixXd denoise_group(const Eigen::MatrixXd& y, double lambda,
                                     ThresholdMode mode) {
    if (!y.allFinite()) throw NonFiniteError("matrix has non-finite entries");
    const bool rows_small = y.rows() <= y.cols();
    Eigen::MatrixXd gram =
        rows_small ? (y * y.transpose()).eval() : (y.transpose() * y).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);

    const Eigen::Index n = gram.rows();
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = std::sqrt(std::max(eig.eigenvalues()[i], 0.0));
        if (mode == ThresholdMode::hard) {
            scale[i] = s > lambda ? 1.0 : 0.0;
        } else {
            scale[i] = s > lambda ? (s - lambda) / s : 0.0;
        }
    }
    Eigen::MatrixXd basis = eig.eigenvectors();  // orthonormal
    Eigen::MatrixXd proj = basis * scale.asDiagonal() * basis.transpose();
    return rows_small ? (proj * y).eval() : (y * proj).eval();
}

// lambda = C_lambda * eps * sqrt(max(M, m))
inline double lambda_from_epsilon(double eps, int m, int group_size,
                                  double c_lambda) {
    return c_lambda * eps * std::sqrt(static_cast<double>(std::max(group_size, m)));
}

// Per-iteration singular value threshold: halved every iteration, with the
// final iteration pinned to lambda1/4 once there are more than three
// iterations so the last smoothing pass stays gentle.
struct ThresholdPlan {
    double c_lambda = 2.0;
    double epsilon = 0.0;
    int iterations = 4;
    double lambda_initial = 0.0;

    double lambda_for(int k) const {  // k is 1-based
        if (iterations > 3 && k == iterations) return lambda_initial / 4.0;
        return lambda_initial / static_cast<double>(1 << (k - 1));
    }
};

inline ThresholdPlan make_threshold_plan(double eps, int m, int group_size,
                                         double c_lambda, int iterations) {
    ThresholdPlan plan;
    plan.c_lambda = c_lambda;
    plan.epsilon = eps;
    plan.iterations = iterations;
    plan.lambda_initial = lambda_from_epsilon(eps, m, group_size, c_lambda);
    return plan;
}

// RMSE between a decoded image and its known original.
inline double oracle_epsilon(const PixelImage& decoded,
                             const PixelImage& reference) {
    if (decoded.size() != reference.size())
        throw GeometryMismatchError("epsilon inputs differ in geometry");
    double acc = 0.0;
    for (size_t i = 0; i < decoded.size(); ++i) {
        double d = decoded.samples[i] - reference.samples[i];
        acc += d * d;
    }
    return std::sqrt(acc / decoded.size());
}

namespace detail {

// E[(X - q*round(X/q))^2] for X ~ Laplace(0, b), including the dead zone.
// Written in s = q/(2b) so both small and large s stay stable.
inline double laplace_cell_mse(double b, double q) {
    if (b <= 0.0) return 0.0;
    double s = q / (2.0 * b);
    if (s > 350.0) return 2.0 * b * b;  // everything in the dead zone
    double e1 = std::exp(-s), e2 = std::exp(-2.0 * s), e3 = std::exp(-3.0 * s);
    double a_plus = s * s + 2.0 * s + 2.0;
    double a_minus = s * s - 2.0 * s + 2.0;
    double dead = 2.0 - e1 * a_plus;
    double tails = (e1 * a_minus - e3 * a_plus) / (1.0 - e2);
    return b * b * (dead + tails);
}

// Laplacian scale from the quantized histogram of one frequency:
// n0 zeros, np nonzeros with magnitude sum s_abs (in index units).
// Concave 1-D likelihood, solved by bisection on theta = q/b.
inline double laplace_scale_mle(long n0, long np, double s_abs, double q) {
    auto dll = [&](double th) {
        double e = std::exp(-0.5 * th);
        double zero_term = n0 > 0 ? n0 * 0.5 * e / (1.0 - e) : 0.0;
        double coth = 1.0 / std::tanh(0.5 * th);
        return zero_term + 0.5 * np * coth - s_abs;
    };
    double lo = 1e-8, hi = 800.0;
    if (dll(hi) > 0.0) return q / hi;
    if (dll(lo) < 0.0) return q / lo;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (dll(mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-12 * hi) break;
    }
    return q / (0.5 * (lo + hi));
}

}  // namespace detail

// Blind spatial-domain RMSE of one coded component. Per AC frequency a
// Laplacian scale is fitted to the quantized histogram and the expected
// in-cell squared error evaluated in closed form; frequencies with too few
// nonzero samples borrow a log-linear fit of the scale over u+v. The DC
// error is modeled as uniform. The transform is unitary, so the mean over
// the 64 frequencies is the per-pixel spatial MSE.
inline double estimate_epsilon(const Component& comp, const QuantTable& table) {
    const long nblocks = static_cast<long>(comp.blocks.size());
    if (nblocks == 0) return 0.0;

    std::array<long, 64> zero{}, nonzero{};
    std::array<double, 64> mag_sum{};
    for (const auto& blk : comp.blocks)
        for (int z = 0; z < 64; ++z) {
            if (blk[z] == 0)
                ++zero[z];
            else {
                ++nonzero[z];
                mag_sum[z] += std::abs(blk[z]);
            }
        }

    const long min_samples = std::max<long>(6, nblocks / 200);
    std::array<double, 64> scale{};
    std::array<bool, 64> fitted{};
    for (int z = 1; z < 64; ++z) {
        if (nonzero[z] < min_samples) continue;
        scale[z] = detail::laplace_scale_mle(zero[z], nonzero[z], mag_sum[z],
                                             table.step_zz(z));
        fitted[z] = true;
    }

    // log-linear decay of the scale over u+v for starved frequencies
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    double max_scale = 0.0;
    for (int z = 1; z < 64; ++z) {
        if (!fitted[z]) continue;
        int nat = kZigzag[z];
        double f = (nat % 8) + (nat / 8);
        double w = static_cast<double>(nonzero[z]);
        double ly = std::log(std::max(scale[z], 1e-6));
        sw += w;
        sx += w * f;
        sy += w * ly;
        sxx += w * f * f;
        sxy += w * f * ly;
        max_scale = std::max(max_scale, scale[z]);
    }
    double alpha = 0.0, beta = 0.0;
    bool have_fit = sw > 0.0 && (sw * sxx - sx * sx) > 1e-9;
    if (have_fit) {
        beta = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
        beta = std::min(beta, 0.0);  // scales only decay with frequency
        alpha = (sy - beta * sx) / sw;
    } else if (sw > 0.0) {
        alpha = sy / sw;
    }

    double total = table.step_zz(0) * table.step_zz(0) / 12.0;  // DC, uniform
    for (int z = 1; z < 64; ++z) {
        double b;
        if (fitted[z]) {
            b = scale[z];
        } else if (sw > 0.0) {
            int nat = kZigzag[z];
            double f = (nat % 8) + (nat / 8);
            b = std::min(std::exp(alpha + beta * f), max_scale);
        } else {
            b = 0.0;
        }
        total += detail::laplace_cell_mse(b, table.step_zz(z));
    }
    return std::sqrt(total / 64.0);
}

// Blind estimate for the first (luma) component of a parsed stream.
inline double estimate_epsilon(const CoefficientImage& ci) {
    if (ci.components.empty()) return 0.0;
    const auto& comp = ci.components.front();
    return estimate_epsilon(comp, ci.table_for(comp));
}

}  // namespace jsd
