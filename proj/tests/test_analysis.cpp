#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "jsd/analysis.hpp"

using namespace jsd;

namespace {

// Brute-force Riemann sum of sinc over [0,z].
double si_oracle(double z, long points = 10'000'000) {
    double sign = z < 0 ? -1.0 : 1.0;
    z = std::abs(z);
    double h = z / points, acc = 0.0;
    for (long i = 0; i < points; ++i) acc += sinc((i + 0.5) * h);
    return sign * acc * h;
}

}  // namespace

TEST_CASE("sine integral") {
    CHECK(sine_integral(0.0) == 0.0);
    CHECK(sine_integral(-2.0) == Catch::Approx(-sine_integral(2.0)));
    CHECK(sine_integral(std::numeric_limits<double>::infinity()) == 0.5);
    for (double z : {0.3, 1.0, 2.7, 6.0, 14.5}) {
        CHECK(sine_integral(z) ==
              Catch::Approx(si_oracle(z, 2'000'000)).margin(1e-8));
    }
}

TEST_CASE("ramp spectrum approximation") {
    CHECK(ramp_spectrum_approx(3.0, 8, 0) == Catch::Approx(3.0 * 8 / 2.0));
    CHECK(ramp_spectrum_approx(3.0, 8, 2) == Catch::Approx(0.0).margin(1e-12));
    CHECK(ramp_spectrum_approx(3.0, 8, 4) == Catch::Approx(0.0).margin(1e-12));

    // vs the defining sum, 5% at k=1 for N=8, tightening as N grows
    double prev = 1.0;
    for (int n : {8, 16, 32}) {
        ModelSignal sig{SignalKind::ramp, n, 8.0, 0.0, 0.0};
        double exact = dct1d(sig.sample())[1];
        double approx = ramp_spectrum_approx(8.0, n, 1);
        double rel = std::abs(approx - exact) / std::abs(exact);
        if (n == 8) CHECK(rel < 0.05);
        CHECK(rel < prev);
        prev = rel;
    }
}

TEST_CASE("ramp zero-AC amplitude bound") {
    int n = 8;
    double q = 4.0 * n / (std::numbers::pi * std::numbers::pi);
    CHECK(ramp_zero_ac_bound(1, q, n) == Catch::Approx(1.0));
    CHECK_THROWS_AS(ramp_zero_ac_bound(2, 10.0, 8), NonOddK0Error);
    CHECK_THROWS_AS(ramp_zero_ac_bound(0, 10.0, 8), NonOddK0Error);

    // QF=25 luminance, k0=1: formula within one quantizer cell of the
    // exhaustive search over amplitudes (cell width = q / |dX1/da|)
    QuantTable t25 = luma_quant_table(25);
    double q1 = t25.step_nat(1);
    CHECK(q1 == 22.0);
    double formula = ramp_zero_ac_bound(1, q1, n);
    double brute = ramp_zero_ac_bound_search(1, q1, n);
    ModelSignal unit{SignalKind::ramp, n, 1.0, 0.0, 0.0};
    double slope = std::abs(dct1d(unit.sample())[1]);
    CHECK(std::abs(formula - brute) <= q1 / slope);

    // the same bound for a 2-D horizontal gradient under the orthonormal
    // block transform is 1/sqrt(2) of the 1-D exact value (~4.83)
    double bound2d = brute / std::sqrt(2.0);
    CHECK(bound2d == Catch::Approx(4.83).margin(0.1));
}

TEST_CASE("step reconstruction") {
    double a = 50, r = 0.3, b = 6;
    CHECK(step_reconstruction_aligned(a, r, b, 0.0) ==
          Catch::Approx(a * sine_integral(2 * b * r)));
    double inf = std::numeric_limits<double>::infinity();
    CHECK(step_reconstruction_aligned(a, r, inf, 0.0) == Catch::Approx(a / 2));

    double got = step_reconstruction(a, r, b, 0.1);
    double want = a * (si_oracle(b * (r - 0.1)) + si_oracle(b * (r + 0.1)));
    CHECK(got == Catch::Approx(want).margin(1e-6));
}

TEST_CASE("blurred step spectrum") {
    CHECK(blurred_step_spectrum(5, 0.25, 0.0, 16, 0) ==
          Catch::Approx(5 * 0.25 * 16));
    CHECK(blurred_step_spectrum(5, 0.5, 0.0, 16, 2) ==
          Catch::Approx(0.0).margin(1e-12));

    // vs the discrete-convolution oracle at N=64, r on the sample grid
    int n = 64;
    double a = 50, r = 20.0 / 64.0;
    for (double sigma : {0.0, 0.05, 0.1}) {
        ModelSignal sig{SignalKind::blurred_step, n, a, r, sigma};
        auto exact = dct1d(sig.sample());
        for (int k = 1; k <= 7; ++k) {
            double approx = blurred_step_spectrum(a, r, sigma, n, k);
            CHECK(std::abs(approx - exact[k]) / std::abs(exact[k]) < 0.10);
        }
    }
}

TEST_CASE("blurred spectrum magnitude is non-increasing in sigma") {
    int n = 32;
    double a = 20, r = 10.0 / 32.0;
    for (int k = 1; k < 8; ++k) {
        double prev = std::abs(blurred_step_spectrum(a, r, 0.0, n, k));
        for (double sigma : {0.02, 0.05, 0.1, 0.2, 0.4}) {
            double cur = std::abs(blurred_step_spectrum(a, r, sigma, n, k));
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("aligned ringing is nearly phase independent") {
    double a = 50, b = 16;
    double worst = 0.0;
    for (int ti = 0; ti <= 30; ++ti) {
        double t = 0.3 * ti / 30.0;
        double lo = 1e30, hi = -1e30;
        for (int ri = 0; ri <= 40; ++ri) {
            double r = 0.3 + 0.4 * ri / 40.0;
            double v = step_reconstruction_aligned(a, r, b, t);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        worst = std::max(worst, (hi - lo) / a);
    }
    CHECK(worst < 0.02);
}

TEST_CASE("error band classification") {
    double q = 16.0;
    CHECK(classify_error_band(q, q, q / 8) == ErrorBand::hidden);
    CHECK(classify_error_band(0.0, q, q / 8) == ErrorBand::negligible);
    CHECK(classify_error_band(-q, q, q / 8) == ErrorBand::hidden);

    // boundaries sit exactly at c_eps and 3q/4
    double eps = q / 8;
    CHECK(classify_error_band(std::nextafter(eps, 0.0), q, eps) ==
          ErrorBand::negligible);
    CHECK(classify_error_band(eps, q, eps) == ErrorBand::visible);
    CHECK(classify_error_band(0.75 * q, q, eps) == ErrorBand::visible);
    CHECK(classify_error_band(std::nextafter(0.75 * q, q), q, eps) ==
          ErrorBand::hidden);

    int flips = 0;
    ErrorBand last = classify_error_band(0.0, q, eps);
    for (double y = 0.0; y <= 2 * q; y += q / 512) {
        ErrorBand cur = classify_error_band(y, q, eps);
        if (cur != last) ++flips;
        last = cur;
    }
    CHECK(flips == 2);
}

TEST_CASE("model csv") {
    ModelSignal sig{SignalKind::ramp, 8, 8.0, 0.0, 0.0};
    std::ostringstream out;
    emit_model_csv(sig, luma_quant_table(50), out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,exact,approx,quantized,band");
    auto exact = dct1d(sig.sample());
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');
        CHECK(std::stoi(tok) == rows);
        std::getline(ls, tok, ',');
        CHECK(std::stod(tok) == Catch::Approx(exact[rows]).margin(1e-4));
        ++rows;
    }
    CHECK(rows == 8);
}
