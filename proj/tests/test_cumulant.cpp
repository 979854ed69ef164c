#include "ttkl/cumulant.hpp"
#include "ttkl/kernels.hpp"
#include "ttkl/validate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ttkl;

namespace {

double sine_mode(int k, double x) { return std::sqrt(2.0) * std::sin((2 * k - 1) * std::numbers::pi * x / 2.0); }

FunctionMatrix sine_modes(int n) {
    std::vector<AdaptiveFunction> fs;
    for (int k = 1; k <= n; ++k) fs.push_back(approximate([k](double x) { return sine_mode(k, x); }));
    return FunctionMatrix(1, static_cast<std::size_t>(n), std::move(fs));
}

DirectionalModes exact_modes_1d(int n) {
    DirectionalModes d;
    d.m = 1;
    d.f = sine_modes(n);
    d.eig_f.resize(n);
    for (int k = 1; k <= n; ++k) d.eig_f(k - 1) = 4.0 / (std::numbers::pi * std::numbers::pi * (2 * k - 1) * (2 * k - 1));
    return d;
}

Tensor3 random_tensor(std::size_t a, std::size_t b, std::size_t c, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Tensor3 t(a, b, c);
    for (double& v : t.data()) v = nd(rng);
    return t;
}

LatentCumulant3 random_latent(std::size_t n, std::size_t r, std::mt19937_64& rng) {
    LatentCumulant3 lc;
    lc.cores[0] = random_tensor(1, n, r, rng);
    lc.cores[1] = random_tensor(r, n, r, rng);
    lc.cores[2] = random_tensor(r, n, 1, rng);
    return lc;
}

Eigen::MatrixXd unfold_mode1(const Tensor3& t) {
    const std::size_t n = t.dim(0);
    Eigen::MatrixXd u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t.dim(1) * t.dim(2)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j)
            for (std::size_t k = 0; k < t.dim(2); ++k) u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j * t.dim(2) + k)) = t(i, j, k);
    return u;
}

double max_diff(const Tensor3& a, const Tensor3& b) {
    double d = 0.0;
    for (std::size_t e = 0; e < a.data().size(); ++e) d = std::max(d, std::abs(a.data()[e] - b.data()[e]));
    return d;
}

Target kernel_target(const ParametricKernel& k) {
    return [&k](std::span<const double> u) { return k(u); };
}

} // namespace

TEST(Projection, RankOneKernelGivesSingleEntry) {
    const double lambda = 0.7;
    const AdaptiveFunction f1 = approximate([](double x) { return sine_mode(1, x); });
    const AdaptiveFunction f1s = approximate([lambda](double x) { return lambda * sine_mode(1, x); });
    std::vector<FunctionMatrix> cores{FunctionMatrix(1, 1, {f1s}), FunctionMatrix(1, 1, {f1}), FunctionMatrix(1, 1, {f1})};
    const FunctionTrain train(std::move(cores));
    const auto lc = project_third_cumulant(train, exact_modes_1d(3));
    const Tensor3 t = lc.dense();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(t(i, j, k), (i + j + k == 0) ? lambda : 0.0, 1e-13);
}

TEST(Projection, MatchesQuadratureOracleOnSpectralKernel) {
    auto geom = std::make_shared<const NurbsGeometry>(geometries::unit_interval());
    const ParametricKernel c3(geom, kernels::spectral_series(3, 4), VariableOrdering::blocked(1, 3));
    CrossConfig cfg;
    cfg.tol = 1e-10;
    cfg.mk = 200;
    cfg.m0 = 200;
    cfg.seed = 5;
    const auto res = cross_decompose(kernel_target(c3), 3, cfg);
    const auto modes = exact_modes_1d(6);
    const Tensor3 got = project_third_cumulant(res.train, modes).dense();
    const Tensor3 ref = dense_cumulant3_oracle(c3, modes);
    EXPECT_LT(max_diff(got, ref), 1e-8);
    EXPECT_LT(supersymmetry_defect(got), 1e-8);
    // sum_l lambda_l delta_il delta_jl delta_kl on the exact modes
    EXPECT_NEAR(got(0, 0, 0), 4.0 / (std::numbers::pi * std::numbers::pi), 1e-8);
    EXPECT_NEAR(got(0, 1, 2), 0.0, 1e-8);
}

TEST(Gram, NestedSumsMatchDenseUnfolding) {
    std::mt19937_64 rng(11);
    const auto lc = random_latent(7, 4, rng);
    const Eigen::MatrixXd u = unfold_mode1(lc.dense());
    const Eigen::MatrixXd dense = u * u.transpose();
    EXPECT_LT((gram_mode1(lc) - dense).norm(), 1e-10 * dense.norm());
}

TEST(Transform, MatchesDenseThreeModeProduct) {
    std::mt19937_64 rng(12);
    const auto lc = random_latent(6, 3, rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(6, 6)).householderQ();
    const Eigen::MatrixXd u3 = q.leftCols(4);
    const Tensor3 a = transform_cores(lc, u3).dense();
    const Tensor3 b = three_mode_product(lc.dense(), u3);
    EXPECT_LT(max_diff(a, b), 1e-12 * lc.dense().frobenius());
}

TEST(Transform, IdentityLeavesCoresUnchanged) {
    std::mt19937_64 rng(13);
    const auto lc = random_latent(5, 2, rng);
    const auto out = transform_cores(lc, Eigen::MatrixXd::Identity(5, 5));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(max_diff(out.cores[i], lc.cores[i]), 0.0);
}

TEST(Transform, SquareOrthogonalPreservesFrobeniusNorm) {
    std::mt19937_64 rng(14);
    const auto lc = random_latent(6, 3, rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(6, 6)).householderQ();
    EXPECT_NEAR(transform_cores(lc, q).dense().frobenius(), lc.dense().frobenius(), 1e-12 * lc.dense().frobenius());
}

TEST(Hosvd, RetainedCountIsMonotoneInTolerance) {
    std::mt19937_64 rng(15);
    const auto lc = random_latent(10, 3, rng);
    Eigen::VectorXd l2(10);
    for (int k = 0; k < 10; ++k) l2(k) = std::pow(0.5, k);
    const Eigen::MatrixXd g = gram_mode1(lc);
    for (auto ratio : {SpectrumRatio::Energy, SpectrumRatio::Projected}) {
        std::size_t last = 0;
        for (double tol3 : {0.5, 0.8, 0.9, 0.99, 0.999, 0.999999}) {
            const auto c = hosvd_truncate(g, l2, tol3, ratio);
            EXPECT_GE(c.retained(), last);
            last = c.retained();
            EXPECT_LT((c.u3.transpose() * c.u3 - Eigen::MatrixXd::Identity(c.u3.cols(), c.u3.cols())).norm(), 1e-12);
        }
        EXPECT_LE(last, 10u);
    }
}

TEST(Hosvd, RejectsToleranceOutsideUnitInterval) {
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(3, 3);
    EXPECT_THROW(hosvd_truncate(g, Eigen::VectorXd::Ones(3), 1.0), ConfigError);
    EXPECT_THROW(hosvd_truncate(g, Eigen::VectorXd::Ones(3), 0.0), ConfigError);
}

TEST(Final, ReducedEvaluationMatchesDenseContraction) {
    std::mt19937_64 rng(16);
    const auto modes = exact_modes_1d(5);
    const auto lc = random_latent(5, 3, rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(5, 5)).householderQ();
    Compression c;
    c.u3 = q.leftCols(3);
    const auto fe = assemble_final(modes, c, lc);
    const Tensor3 dense = lc.dense();
    const double p[3] = {0.13, 0.58, 0.91};
    Eigen::RowVectorXd v[3];
    for (int i = 0; i < 3; ++i) v[i] = modes.row(std::span<const double>(&p[i], 1)) * c.u3 * c.u3.transpose();
    double ref = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            for (std::size_t k = 0; k < 5; ++k) ref += dense(i, j, k) * v[0](i) * v[1](j) * v[2](k);
    const double got = eval_cumulant3_reduced(fe, std::span<const double>(&p[0], 1), std::span<const double>(&p[1], 1),
                                              std::span<const double>(&p[2], 1));
    EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::abs(ref)));
}

TEST(Final, ReducedCovarianceIsPositiveSemidefinite) {
    const auto modes = exact_modes_1d(8);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(8, 8)).householderQ();
    Compression c;
    c.u3 = q.leftCols(5);
    const auto fe = assemble_final(modes, c, std::nullopt);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fe.cum2);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
    EXPECT_LT((fe.cum2 - fe.cum2.transpose()).norm(), 1e-15);
}

TEST(Final, UncompressedCovarianceReproducesKernel) {
    const auto modes = exact_modes_1d(80);
    const auto fe = assemble_final(modes, std::nullopt, std::nullopt);
    const auto k = kernels::spectral_series(2, 80);
    for (double x : {0.1, 0.45, 0.9})
        for (double y : {0.2, 0.7}) {
            const Point3 pts[2] = {{x, 0, 0}, {y, 0, 0}};
            EXPECT_NEAR(eval_cumulant2_reduced(fe, std::span<const double>(&x, 1), std::span<const double>(&y, 1)),
                        k(std::span<const Point3>(pts, 2)), 1e-12);
        }
}
