#pragma once

// Closed-form DCT spectra of simple 1-D signals (linear ramp, two-step,
// Gaussian-blurred step), the amplitude bound under which a ramp loses all
// AC content to quantization, truncated-spectrum reconstruction via the
// sine integral, and a perceptual classification of per-frequency
// quantization error. CSV emission reproduces the model curves.

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "jsd/dct.hpp"
#include "jsd/errors.hpp"
#include "jsd/jpeg.hpp"

namespace jsd {

// sin(pi x)/(pi x) with series fallback near zero.
inline double sinc(double x) {
    double px = std::numbers::pi * x;
    if (std::abs(px) < 1e-4) return 1.0 - px * px / 6.0;
    return std::sin(px) / px;
}

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(double a, double b, double fa, double fm,
                               double fb, double whole, double tol,
                               int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = sinc(lm), frm = sinc(rm);
    double left = simpson(a, m, fa, flm, fm);
    double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

// Si(z) = integral of sinc over [0,z]; Si(inf) = 1/2. Adaptive Simpson,
// absolute tolerance 1e-9, integrated per unit interval so the oscillatory
// tail stays resolved.
inline double sine_integral(double z) {
    if (std::isinf(z)) return z > 0 ? 0.5 : -0.5;
    if (z < 0) return -sine_integral(-z);
    double acc = 0.0;
    double pos = 0.0;
    while (pos < z) {
        double next = std::min(pos + 1.0, z);
        double fa = sinc(pos), fb = sinc(next), fm = sinc(0.5 * (pos + next));
        double whole = detail::simpson(pos, next, fa, fm, fb);
        acc += detail::adaptive_simpson(pos, next, fa, fm, fb, whole,
                                        1e-10, 48);
        pos = next;
    }
    return acc;
}

enum class SignalKind { ramp, step, blurred_step };

// 1-D test signal sampled at t_n = (n+1/2)/N.
//   ramp:         x_n = a (1 - t_n)                (decreasing line)
//   step:         x_n = a for t_n < r, else 0      (r = m/N)
//   blurred_step: step convolved with a discrete Gaussian, std sigma in
//                 the same normalized units as r
struct ModelSignal {
    SignalKind kind = SignalKind::ramp;
    int n = 8;
    double a = 1.0;
    double r = 0.5;
    double sigma = 0.0;

    std::vector<double> sample() const {
        std::vector<double> x(n);
        switch (kind) {
            case SignalKind::ramp:
                for (int i = 0; i < n; ++i)
                    x[i] = a * (1.0 - (i + 0.5) / n);
                break;
            case SignalKind::step:
                for (int i = 0; i < n; ++i)
                    x[i] = ((i + 0.5) / n < r) ? a : 0.0;
                break;
            case SignalKind::blurred_step: {
                // symmetric extension (even around 0, zero beyond |t|=1)
                // padded with another N zeros so the kernel tail is clean
                int pad = n;
                std::vector<double> ext(4 * n, 0.0);
                for (int i = 0; i < 4 * n; ++i) {
                    double t = (i - n - pad + 0.5) / n;
                    if (std::abs(t) < r) ext[i] = a;
                }
                if (sigma > 0.0) {
                    double ss = sigma * n;
                    int radius = static_cast<int>(std::ceil(6.0 * ss)) + 1;
                    std::vector<double> g(2 * radius + 1);
                    double sum = 0.0;
                    for (int j = -radius; j <= radius; ++j) {
                        g[j + radius] = std::exp(-0.5 * j * j / (ss * ss));
                        sum += g[j + radius];
                    }
                    for (double& v : g) v /= sum;
                    std::vector<double> out(4 * n, 0.0);
                    for (int i = 0; i < 4 * n; ++i) {
                        double acc = 0.0;
                        for (int j = -radius; j <= radius; ++j) {
                            int src = i + j;
                            if (src >= 0 && src < 4 * n)
                                acc += g[j + radius] * ext[src];
                        }
                        out[i] = acc;
                    }
                    ext = std::move(out);
                }
                for (int i = 0; i < n; ++i) x[i] = ext[n + pad + i];
                break;
            }
        }
        return x;
    }
};

// X_k ~ (aN/2) sinc^2(k/2): continuous-domain approximation of the ramp
// spectrum; exact zeros at even k > 0.
inline double ramp_spectrum_approx(double a, int n, int k) {
    double s = sinc(k / 2.0);
    return a * n / 2.0 * s * s;
}

// Largest ramp amplitude whose k0-th coefficient quantizes to zero:
// a < pi^2 k0^2 q / (4N), valid for odd k0 where the spectrum is nonzero.
inline double ramp_zero_ac_bound(int k0, double q_k0, int n) {
    if (k0 < 1 || k0 % 2 == 0)
        throw NonOddK0Error("zero-AC bound is defined for odd k0");
    return std::numbers::pi * std::numbers::pi * k0 * k0 * q_k0 / (4.0 * n);
}

// Brute-force version of the same bound: scans amplitudes and quantizes
// the exact spectrum instead of the closed form.
inline double ramp_zero_ac_bound_search(int k0, double q_k0, int n) {
    if (k0 < 1 || k0 % 2 == 0)
        throw NonOddK0Error("zero-AC bound is defined for odd k0");
    double formula = ramp_zero_ac_bound(k0, q_k0, n);
    double hi = 3.0 * formula, da = formula / 2000.0;
    double best = 0.0;
    for (double a = da; a <= hi; a += da) {
        ModelSignal sig{SignalKind::ramp, n, a, 0.0, 0.0};
        double xk = dct1d(sig.sample())[k0];
        if (quantize(xk, q_k0) == 0) best = a;
    }
    return best;
}

namespace detail {

// Si(b*u) as b -> inf is a step in the sign of u.
inline double si_scaled(double b, double u) {
    if (std::isinf(b)) return u > 0 ? 0.5 : (u < 0 ? -0.5 : 0.0);
    return sine_integral(b * u);
}

}  // namespace detail

// Reconstruction of the two-step signal when only frequencies below b
// survive: x_t = a [Si(br - bt) + Si(br + bt)].
inline double step_reconstruction(double a, double r, double b, double t) {
    return a * (detail::si_scaled(b, r - t) + detail::si_scaled(b, r + t));
}

// Same sequence re-aligned so t=0 sits on the edge.
inline double step_reconstruction_aligned(double a, double r, double b,
                                          double t) {
    return a * (detail::si_scaled(b, -t) + detail::si_scaled(b, 2.0 * r + t));
}

// Y_k ~ a r N sinc(rk) exp(-pi^2 sigma^2 k^2 / 2).
inline double blurred_step_spectrum(double a, double r, double sigma, int n,
                                    int k) {
    return a * r * n * sinc(r * k) *
           std::exp(-std::numbers::pi * std::numbers::pi * sigma * sigma * k *
                    k / 2.0);
}

enum class ErrorBand { negligible, hidden, visible };

// Perceptual classification of the quantization error of coefficient Y_k:
// an absolute error below c_eps does not matter, a relative error below
// 1/3 (|Y_k| >= 3q_k/4) is masked by the signal, anything between shows.
inline ErrorBand classify_error_band(double y_k, double q_k, double c_eps) {
    double mag = std::abs(y_k);
    if (mag < c_eps) return ErrorBand::negligible;
    if (mag > 0.75 * q_k) return ErrorBand::hidden;
    return ErrorBand::visible;
}

inline const char* to_string(ErrorBand b) {
    switch (b) {
        case ErrorBand::negligible: return "negligible";
        case ErrorBand::hidden: return "hidden";
        default: return "visible";
    }
}

// One row per frequency: k, exact spectrum (defining sum), closed-form
// approximation, quantized-and-dequantized exact value, band of the model
// value. q_k is taken from the first row of the table for k < 8 and the
// last row entry beyond; c_eps defaults to q_k/8.
inline void emit_model_csv(const ModelSignal& sig, const QuantTable& table,
                           std::ostream& out, double c_eps_factor = 0.125) {
    auto x = sig.sample();
    auto exact = dct1d(x);
    out << "k,exact,approx,quantized,band\n";
    for (int k = 0; k < sig.n; ++k) {
        double q = table.step_nat(std::min(k, 7));
        double approx = 0.0;
        switch (sig.kind) {
            case SignalKind::ramp:
                approx = ramp_spectrum_approx(sig.a, sig.n, k);
                break;
            case SignalKind::step:
                approx = blurred_step_spectrum(sig.a, sig.r, 0.0, sig.n, k);
                break;
            case SignalKind::blurred_step:
                approx = blurred_step_spectrum(sig.a, sig.r, sig.sigma,
                                               sig.n, k);
                break;
        }
        double dq = dequantize(quantize(exact[k], q), q);
        ErrorBand band = classify_error_band(approx, q, c_eps_factor * q);
        out << k << "," << exact[k] << "," << approx << "," << dq << ","
            << to_string(band) << "\n";
    }
}

inline void emit_model_csv(const ModelSignal& sig, const QuantTable& table,
                           const std::string& path,
                           double c_eps_factor = 0.125) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    emit_model_csv(sig, table, out, c_eps_factor);
    if (!out) throw IoError("short write to " + path);
}

}  // namespace jsd
