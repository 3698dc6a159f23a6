#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "jsd/lowrank.hpp"
#include "jsd/metrics.hpp"

using namespace jsd;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, uint32_t seed, double scale = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> d(0.0, scale);
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = d(rng);
    return m;
}

// Cyclic Jacobi eigensolver for symmetric matrices; test-only oracle,
// shares nothing with the library implementation path.
void jacobi_eig(Eigen::MatrixXd a, Eigen::VectorXd& values) {
    const int n = static_cast<int>(a.rows());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-22 * a.norm() * a.norm()) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (tau >= 0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n);
                j(p, p) = c;
                j(q, q) = c;
                j(p, q) = s;
                j(q, p) = -s;
                a = j.transpose() * a * j;
            }
    }
    values = a.diagonal();
    std::sort(values.data(), values.data() + n, std::greater<double>());
}

Eigen::MatrixXd random_orthogonal(int n, uint32_t seed) {
    Eigen::MatrixXd m = random_matrix(n, n, seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ();
}

double nnm_objective(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                     double lambda) {
    Eigen::JacobiSVD<Eigen::MatrixXd> s(x);
    return (y - x).squaredNorm() + lambda * s.singularValues().sum();
}

}  // namespace

TEST_CASE("svd of simple matrices") {
    Eigen::MatrixXd d = Eigen::Vector3d(5.0, 2.0, 0.5).asDiagonal();
    auto f = svd(d);
    CHECK(f.sigma[0] == Catch::Approx(5.0));
    CHECK(f.sigma[1] == Catch::Approx(2.0));
    CHECK(f.sigma[2] == Catch::Approx(0.5));

    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, -2.0, 1.0);
    auto f1 = svd(u * v.transpose());
    CHECK(f1.sigma[0] == Catch::Approx(u.norm() * v.norm()));
    for (int i = 1; i < f1.sigma.size(); ++i)
        CHECK(f1.sigma[i] == Catch::Approx(0.0).margin(1e-10));

    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd(bad), NonFiniteError);
}

TEST_CASE("svd matches an independent eigensolver on the Gram matrix") {
    Eigen::MatrixXd y = random_matrix(64, 60, 101, 40.0);
    auto f = svd(y);

    Eigen::VectorXd eigs;
    jacobi_eig(y.transpose() * y, eigs);
    REQUIRE(f.sigma.size() == 60);
    for (int i = 0; i < 60; ++i)
        CHECK(f.sigma[i] ==
              Catch::Approx(std::sqrt(std::max(eigs[i], 0.0))).margin(1e-6));

    // contract: factors reproduce the matrix, orthonormal factors
    Eigen::MatrixXd rec = f.u * f.sigma.asDiagonal() * f.v.transpose();
    CHECK((y - rec).norm() <= 1e-7 * y.norm());
    Eigen::MatrixXd iu = f.u.transpose() * f.u -
                         Eigen::MatrixXd::Identity(60, 60);
    Eigen::MatrixXd iv = f.v.transpose() * f.v -
                         Eigen::MatrixXd::Identity(60, 60);
    CHECK(iu.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(iv.cwiseAbs().maxCoeff() <= 1e-8);
    for (int i = 1; i < f.sigma.size(); ++i) {
        CHECK(f.sigma[i] <= f.sigma[i - 1]);
        CHECK(f.sigma[i] >= 0.0);
    }
}

TEST_CASE("threshold operators") {
    Eigen::VectorXd s(3);
    s << 5.0, 2.0, 0.5;

    auto soft = soft_threshold(s, 1.0);
    CHECK(soft[0] == 4.0);
    CHECK(soft[1] == 1.0);
    CHECK(soft[2] == 0.0);
    CHECK(soft_threshold(s, 0.0) == s);
    CHECK(soft_threshold(s, 10.0).isZero());

    auto hard = hard_threshold(s, 1.0);
    CHECK(hard[0] == 5.0);
    CHECK(hard[1] == 2.0);
    CHECK(hard[2] == 0.0);
    Eigen::VectorXd b(1);
    b << 1.0;
    CHECK(hard_threshold(b, 1.0)[0] == 0.0);  // strict >
}

TEST_CASE("hard and soft thresholding give the same rank") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    for (int t = 0; t < 2000; ++t) {
        Eigen::VectorXd s(8);
        for (int i = 0; i < 8; ++i) s[i] = d(rng);
        std::sort(s.data(), s.data() + 8, std::greater<double>());
        double lambda = d(rng);
        int rh = (hard_threshold(s, lambda).array() > 0.0).count();
        int rs = (soft_threshold(s, lambda).array() > 0.0).count();
        CHECK(rh == rs);
    }
}

TEST_CASE("hard keeps more energy than soft") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd s(12);
        for (int i = 0; i < 12; ++i) s[i] = d(rng);
        double lambda = d(rng);
        CHECK(hard_threshold(s, lambda).norm() >=
              soft_threshold(s, lambda).norm());
    }
}

TEST_CASE("denoise_group equals thresholding the SVD factors") {
    Eigen::MatrixXd y = random_matrix(24, 18, 9, 5.0);
    auto f = svd(y);
    for (auto mode : {ThresholdMode::soft, ThresholdMode::hard}) {
        double lambda = f.sigma[4];
        Eigen::VectorXd ts = mode == ThresholdMode::soft
                                 ? soft_threshold(f.sigma, lambda)
                                 : hard_threshold(f.sigma, lambda);
        Eigen::MatrixXd want = f.u * ts.asDiagonal() * f.v.transpose();
        Eigen::MatrixXd got = denoise_group(y, lambda, mode);
        CHECK((want - got).norm() <= 1e-7 * y.norm());
    }
}

TEST_CASE("denoise_group on a dominant rank-1 matrix") {
    Eigen::VectorXd u = Eigen::VectorXd::Ones(16) * 3.0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(12);
    Eigen::MatrixXd y = u * v.transpose();
    double lambda = 1.0;
    Eigen::MatrixXd soft = denoise_group(y, lambda, ThresholdMode::soft);
    CHECK((y - soft).norm() <= lambda + 1e-9);
    Eigen::MatrixXd hard = denoise_group(y, lambda, ThresholdMode::hard);
    CHECK((y - hard).norm() <= 1e-9);
}

TEST_CASE("soft mode minimizes the nuclear-norm objective") {
    std::mt19937 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> lam(0.5, 8.0);
    for (int t = 0; t < 25; ++t) {
        Eigen::MatrixXd y = random_matrix(16, 12, 1000 + t, 3.0);
        double lambda = lam(rng);
        Eigen::MatrixXd x = denoise_group(y, lambda, ThresholdMode::soft);
        double fx = nnm_objective(y, x, lambda);
        CHECK(fx <= nnm_objective(y, y, lambda) + 1e-9);
        CHECK(fx <= nnm_objective(y, Eigen::MatrixXd::Zero(16, 12), lambda) + 1e-9);
        for (int p = 0; p < 100; ++p) {
            Eigen::MatrixXd pert(16, 12);
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 12; ++j) pert(i, j) = g(rng);
            pert *= 0.03 * std::max(1.0, x.norm());
            CHECK(fx <= nnm_objective(y, x + pert, lambda) + 1e-9);
        }
    }
}

TEST_CASE("residual energy equals the dropped singular values") {
    Eigen::MatrixXd y = random_matrix(32, 24, 12, 10.0);
    auto f = svd(y);
    double lambda = f.sigma[6];
    Eigen::MatrixXd x = denoise_group(y, lambda, ThresholdMode::hard);
    double want = 0.0;
    for (int i = 0; i < f.sigma.size(); ++i)
        if (f.sigma[i] <= lambda) want += f.sigma[i] * f.sigma[i];
    double got = (y - x).squaredNorm();
    CHECK(got == Catch::Approx(want).epsilon(1e-6));
}

TEST_CASE("thresholding commutes with orthogonal transforms") {
    Eigen::MatrixXd y = random_matrix(14, 10, 13, 4.0);
    Eigen::MatrixXd q = random_orthogonal(14, 14), r = random_orthogonal(10, 15);
    for (auto mode : {ThresholdMode::soft, ThresholdMode::hard}) {
        Eigen::MatrixXd a = denoise_group(q * y * r, 2.0, mode);
        Eigen::MatrixXd b = q * denoise_group(y, 2.0, mode) * r;
        CHECK((a - b).norm() <= 1e-8 * std::max(1.0, y.norm()));
    }
}

TEST_CASE("lambda rule") {
    CHECK(lambda_from_epsilon(2.0, 64, 60, 1.0) == Catch::Approx(16.0));
    CHECK(lambda_from_epsilon(0.0, 64, 60, 1.5) == 0.0);
    CHECK(lambda_from_epsilon(4.0, 64, 60, 1.25) ==
          Catch::Approx(2.0 * lambda_from_epsilon(2.0, 64, 60, 1.25)));
}

TEST_CASE("threshold schedule") {
    auto plan = make_threshold_plan(2.0, 64, 60, 1.0, 4);
    CHECK(plan.lambda_initial == Catch::Approx(16.0));
    CHECK(plan.lambda_for(1) == Catch::Approx(16.0));
    CHECK(plan.lambda_for(2) == Catch::Approx(8.0));
    CHECK(plan.lambda_for(3) == Catch::Approx(4.0));
    CHECK(plan.lambda_for(4) == Catch::Approx(4.0));  // final pinned to /4

    auto plan3 = make_threshold_plan(2.0, 64, 60, 1.0, 3);
    CHECK(plan3.lambda_for(3) == Catch::Approx(4.0));  // plain halving
}

TEST_CASE("oracle epsilon") {
    PixelImage x(16, 16, 1, 90.0);
    CHECK(oracle_epsilon(x, x) == 0.0);
    PixelImage y = x;
    for (double& v : y.samples) v += 16.0;
    CHECK(oracle_epsilon(y, x) == Catch::Approx(16.0));
}

TEST_CASE("laplace cell mse limits") {
    // fine quantization: uniform q^2/12; coarse: whole mass in dead zone
    CHECK(detail::laplace_cell_mse(100.0, 1.0) ==
          Catch::Approx(1.0 / 12.0).epsilon(1e-3));
    CHECK(detail::laplace_cell_mse(1.0, 1e4) == Catch::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("blind epsilon tracks the oracle on a real image") {
    auto img = load_pnm(std::string(JSD_TEST_DATA_DIR) + "/calib/hopper.pgm");
    for (int qf : {25, 50, 80}) {
        auto ci = parse_jpeg(encode_jpeg(img, qf));
        double blind = estimate_epsilon(ci);
        double oracle = oracle_epsilon(hard_decode(ci), img);
        CAPTURE(qf, blind, oracle);
        CHECK(std::abs(blind - oracle) / oracle < 0.30);
    }
}
