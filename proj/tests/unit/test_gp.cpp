#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "driftcal/gp.hpp"

using namespace driftcal;

namespace {

Eigen::MatrixXd random_inputs(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
    return x;
}

// Scalar double loop, independent of the library's vectorised kernel.
double brute_kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, const KernelParams& p) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < a.size(); ++d) {
        const double r = (a[d] - b[d]) / p.lengthscales[d];
        s += r * r;
    }
    return p.variance_scale * std::exp(-s);
}

Eigen::MatrixXd brute_gram(const Eigen::MatrixXd& x, const KernelParams& p) {
    Eigen::MatrixXd k(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.rows(); ++j) k(i, j) = brute_kernel(x.row(i), x.row(j), p);
    k.diagonal().array() += p.nugget;
    return k;
}

KernelParams params2(double v, double l0, double l1, double nugget = 0.0) {
    KernelParams p;
    p.variance_scale = v;
    p.lengthscales = Eigen::Vector2d(l0, l1);
    p.nugget = nugget;
    return p;
}

}  // namespace

TEST(BuildCovariance, ZeroDistanceGivesVariance) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1);
    const auto k = build_covariance(a, KernelParams::isotropic(1.0, 1.0, 1));
    EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
}

TEST(BuildCovariance, SingleEntryMatchesClosedForm) {
    const double rho = 0.7, lambda = 0.4, x = 0.3;
    Eigen::MatrixXd a(1, 1), b(1, 1);
    a << 0.0;
    b << x;
    const auto k = build_covariance(a, b, KernelParams::isotropic(rho, lambda, 1));
    EXPECT_NEAR(k(0, 0), rho * std::exp(-x * x / (lambda * lambda)), 1e-15);
}

TEST(BuildCovariance, MatchesDoubleLoop) {
    const auto a = random_inputs(5, 2, 1);
    const auto b = random_inputs(4, 2, 2);
    const auto p = params2(1.3, 0.3, 0.7);
    const auto k = build_covariance(a, b, p);
    ASSERT_EQ(k.rows(), 5);
    ASSERT_EQ(k.cols(), 4);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(k(i, j), brute_kernel(a.row(i), b.row(j), p), 1e-12);
}

TEST(BuildCovariance, NuggetOnlyOnSelfCovariance) {
    const auto a = random_inputs(4, 2, 3);
    const auto p = params2(1.0, 0.5, 0.5, 0.25);
    const auto self = build_covariance(a, p);
    const auto cross = build_covariance(a, a, p);
    EXPECT_TRUE(self.isApprox(self.transpose(), 0.0));
    for (Eigen::Index i = 0; i < 4; ++i) {
        EXPECT_NEAR(self(i, i), 1.25, 1e-15);
        EXPECT_NEAR(cross(i, i), 1.0, 1e-15);
    }
}

TEST(BuildCovariance, RejectsBadShapesAndParameters) {
    const auto a = random_inputs(3, 2, 4);
    EXPECT_THROW(build_covariance(a, KernelParams::isotropic(1.0, 0.5, 3)), DimensionError);
    EXPECT_THROW(build_covariance(a, random_inputs(2, 3, 5), params2(1.0, 0.5, 0.5)), DimensionError);
    EXPECT_THROW(build_covariance(a, params2(0.0, 0.5, 0.5)), DomainError);
    EXPECT_THROW(build_covariance(a, params2(1.0, -0.5, 0.5)), DomainError);
    EXPECT_THROW(build_covariance(a, params2(1.0, 0.5, 0.5, -1e-3)), DomainError);
}

TEST(BuildCovariance, RandomGramMatricesFactor) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = random_inputs(8, 3, 100 + seed);
        const auto k = build_covariance(x, KernelParams::isotropic(0.5 + seed * 0.1, 0.2 + 0.05 * seed, 3, 1e-8));
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        EXPECT_EQ(llt.info(), Eigen::Success);
    }
}

TEST(Standardizer, RoundTripIsExact) {
    Eigen::VectorXd y(5);
    y << 12.5, -3.0, 7.25, 1e3, 0.001;
    const auto t = Standardizer::fit(y);
    const Eigen::VectorXd back = t.inverse(t.forward(y));
    for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_NEAR(back[i], y[i], 1e-12 * std::max(1.0, std::abs(y[i])));
    const Eigen::VectorXd z = t.forward(y);
    EXPECT_NEAR(z.mean(), 0.0, 1e-12);
}

TEST(Standardizer, FlatTargetsKeepUnitScale) {
    const auto t = Standardizer::fit(Eigen::VectorXd::Constant(4, 2.5));
    EXPECT_EQ(t.scale, 1.0);
    EXPECT_EQ(t.forward(2.5), 0.0);
}

TEST(FitGp, SinglePointInterpolates) {
    Eigen::MatrixXd x(1, 1);
    x << 0.5;
    Eigen::VectorXd y(1);
    y << 2.0;
    const auto m = fit_gp(TrainingSet::from_raw(x, y), KernelParams::isotropic(0.8, 0.3, 1, 1e-8));
    const auto pd = predict(m, x);
    EXPECT_NEAR(pd.mean[0], 2.0, 1e-12);
}

TEST(FitGp, NoiseFreeInterpolation) {
    Eigen::MatrixXd x(10, 1);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = i / 9.0;
        y[i] = std::sin(4.0 * x(i, 0)) + 0.5 * x(i, 0);
    }
    const auto m = fit_gp(TrainingSet::from_raw(x, y), KernelParams::isotropic(1.0, 0.3, 1, 1e-8));
    const auto pd = predict(m, x);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(pd.mean[i], y[i], 1e-6);
}

TEST(FitGp, CholeskyReconstructsKernel) {
    const auto x = random_inputs(7, 2, 9);
    Eigen::VectorXd y = x.col(0) + x.col(1).array().square().matrix();
    const auto p = params2(1.0, 0.4, 0.6, 1e-8);
    const auto m = fit_gp(TrainingSet::from_raw(x, y), p);
    const Eigen::MatrixXd k = brute_gram(x, KernelParams{p.variance_scale, p.lengthscales, m.nugget()});
    const Eigen::MatrixXd rec = m.chol() * m.chol().transpose();
    EXPECT_LE((rec - k).norm() / k.norm(), 1e-8);
}

TEST(FitGp, DuplicateRowsWithZeroNuggetAreSingular) {
    Eigen::MatrixXd x(3, 1);
    x << 0.2, 0.2, 0.8;
    Eigen::VectorXd y(3);
    y << 1.0, 1.0, 2.0;
    try {
        fit_gp(TrainingSet::from_raw(x, y), KernelParams::isotropic(1.0, 0.3, 1, 0.0));
        FAIL() << "expected SingularKernelError";
    } catch (const SingularKernelError& e) {
        EXPECT_EQ(e.nugget(), 0.0);
    }
}

TEST(FitGp, DuplicateRowsEscalatePositiveNugget) {
    Eigen::MatrixXd x(3, 1);
    x << 0.2, 0.2, 0.8;
    Eigen::VectorXd y(3);
    y << 1.0, 1.0, 2.0;
    const auto m = fit_gp(TrainingSet::from_raw(x, y), KernelParams::isotropic(1.0, 0.3, 1, 1e-12));
    EXPECT_GE(m.nugget(), 1e-12);
    EXPECT_LE(m.nugget(), kNuggetCeiling * (1.0 + 1e-12));
}

TEST(Predict, AtTrainingInputHasTinyVariance) {
    const auto x = random_inputs(6, 2, 11);
    Eigen::VectorXd y = (3.0 * x.col(0)).array().sin().matrix() + x.col(1);
    const auto p = params2(1.0, 0.5, 0.5, 1e-10);
    const auto m = fit_gp(TrainingSet::from_raw(x, y), p);
    const auto pd = predict(m, x.topRows(1));
    EXPECT_NEAR(pd.mean[0], y[0], 1e-6);
    const double s2 = m.train().transform.scale * m.train().transform.scale;
    EXPECT_LE(pd.variance[0] / s2, 1e-8 * p.variance_scale);
}

TEST(Predict, FarQueryRevertsToPrior) {
    const auto x = random_inputs(6, 1, 12);
    Eigen::VectorXd y = 5.0 + x.col(0).array().square();
    const auto p = KernelParams::isotropic(0.9, 0.1, 1, 1e-8);
    const auto m = fit_gp(TrainingSet::from_raw(x, y), p);
    Eigen::MatrixXd q(1, 1);
    q << 50.0;
    const auto pd = predict(m, q);
    const auto& t = m.train().transform;
    EXPECT_NEAR(pd.mean[0], y.mean(), 1e-9);
    EXPECT_NEAR(pd.variance[0] / (t.scale * t.scale), p.variance_scale, 0.01 * p.variance_scale);
}

TEST(Predict, MatchesDenseInverseOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed % 6);  // N <= 8
        const auto x = random_inputs(n, 2, 200 + seed);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = std::cos(2.0 * x(i, 0)) - x(i, 1);
        const auto p = params2(1.2, 0.35, 0.8, 1e-6);
        const auto train = TrainingSet::from_raw(x, y);
        const auto m = fit_gp(train, p);
        const auto q = random_inputs(4, 2, 300 + seed);
        const auto pd = predict(m, q, true);

        const Eigen::MatrixXd kinv = brute_gram(x, KernelParams{p.variance_scale, p.lengthscales, m.nugget()}).inverse();
        const auto& t = train.transform;
        Eigen::MatrixXd ks(n, 4);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < 4; ++j) ks(i, j) = brute_kernel(x.row(i), q.row(j), p);
        Eigen::MatrixXd kss(4, 4);
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 4; ++j) kss(i, j) = brute_kernel(q.row(i), q.row(j), p);
        const Eigen::VectorXd mean = ks.transpose() * kinv * train.targets;
        const Eigen::MatrixXd cov = kss - ks.transpose() * kinv * ks;
        for (Eigen::Index j = 0; j < 4; ++j) {
            EXPECT_NEAR(pd.mean[j], t.inverse(mean[j]), 1e-10 * std::max(1.0, std::abs(pd.mean[j])));
            EXPECT_NEAR(pd.variance[j], std::max(0.0, cov(j, j)) * t.scale * t.scale, 1e-10);
            for (Eigen::Index k = 0; k < 4; ++k)
                EXPECT_NEAR((*pd.covariance)(j, k), cov(j, k) * t.scale * t.scale, 1e-10);
        }
    }
}

TEST(Predict, VarianceBoundedByPrior) {
    const auto x = random_inputs(8, 2, 21);
    Eigen::VectorXd y = x.col(0) - x.col(1);
    const auto p = params2(0.7, 0.2, 0.3, 1e-8);
    const auto m = fit_gp(TrainingSet::from_raw(x, y), p);
    const auto pd = predict(m, random_inputs(50, 2, 22));
    const double s2 = m.train().transform.scale * m.train().transform.scale;
    for (Eigen::Index i = 0; i < 50; ++i) {
        EXPECT_GE(pd.variance[i], 0.0);
        EXPECT_LE(pd.variance[i] / s2, p.variance_scale + m.nugget() + 1e-8);
    }
}

TEST(Predict, DimensionMismatchThrows) {
    const auto m = fit_gp(TrainingSet::from_raw(random_inputs(4, 2, 1), Eigen::VectorXd::LinSpaced(4, 0, 1)),
                          params2(1.0, 0.5, 0.5, 1e-8));
    EXPECT_THROW(predict(m, random_inputs(2, 3, 2)), DimensionError);
}

TEST(LogMarginalLikelihood, StandardNormalAtZero) {
    Eigen::MatrixXd x(1, 1);
    x << 0.3;
    TrainingSet t;
    t.inputs = x;
    t.targets = Eigen::VectorXd::Zero(1);
    const auto m = fit_gp(t, KernelParams::isotropic(1.0, 1.0, 1));
    EXPECT_NEAR(log_marginal_likelihood(m), -0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(log_marginal_likelihood(m), -0.9189, 1e-4);
}

TEST(LogMarginalLikelihood, MatchesDeterminantOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 7);
        const auto x = random_inputs(n, 2, 400 + seed);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = std::exp(x(i, 0)) * x(i, 1);
        const auto p = params2(0.9, 0.5, 0.3, 1e-6);
        const auto train = TrainingSet::from_raw(x, y);
        const auto m = fit_gp(train, p);
        const Eigen::MatrixXd k = brute_gram(x, KernelParams{p.variance_scale, p.lengthscales, m.nugget()});
        const double oracle = -0.5 * train.targets.dot(k.inverse() * train.targets) - 0.5 * std::log(k.determinant()) -
                              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
        EXPECT_NEAR(log_marginal_likelihood(m), oracle, 1e-10);
    }
}

TEST(OptimizeEmulator, NeverWorseThanInit) {
    const auto x = random_inputs(20, 2, 31);
    Eigen::VectorXd y = (5.0 * x.col(0)).array().sin().matrix() + 0.3 * x.col(1);
    const auto train = TrainingSet::from_raw(x, y);
    const auto init = params2(1.0, 2.0, 2.0, 1e-8);
    const auto tuned = optimize_emulator(train, init, 100);
    EXPECT_GE(log_marginal_likelihood(fit_gp(train, tuned)), log_marginal_likelihood(fit_gp(train, init)));
}

TEST(OptimizeEmulator, RecoversGeneratingLengthscale) {
    // draw 30 points from a GP with lengthscale 0.2 using the same kernel convention
    const Eigen::Index n = 30;
    Eigen::MatrixXd x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const auto truth = KernelParams::isotropic(1.0, 0.2, 1, 1e-8);
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(brute_gram(x, truth)).matrixL();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd e(n);
    for (auto& v : e) v = z(rng);
    const Eigen::VectorXd y = l * e;

    OptimizerOptions opt;
    opt.budget = 300;
    opt.seed = 3;
    const auto tuned = optimize_emulator(TrainingSet::from_raw(x, y), KernelParams::isotropic(1.0, 0.5, 1, 1e-8), opt);
    EXPECT_GE(tuned.lengthscales[0], 0.1);
    EXPECT_LE(tuned.lengthscales[0], 0.4);
}

TEST(OptimizeEmulator, ZeroBudgetRejected) {
    const auto train = TrainingSet::from_raw(random_inputs(4, 1, 1), Eigen::VectorXd::LinSpaced(4, 0, 1));
    EXPECT_THROW(optimize_emulator(train, KernelParams::isotropic(1.0, 0.3, 1, 1e-8), 0), DomainError);
}

TEST(OptimizeEmulator, FlatTargetsShrinkVariance) {
    const auto x = random_inputs(8, 1, 41);
    const auto train = TrainingSet::from_raw(x, Eigen::VectorXd::Constant(8, 3.0));
    const auto init = KernelParams::isotropic(1.0, 0.3, 1, 1e-8);
    KernelParams tuned;
    ASSERT_NO_THROW(tuned = optimize_emulator(train, init, 200));
    EXPECT_LT(tuned.variance_scale, 1e-3);
}

TEST(OptimizeEmulator, DeterministicForSeed) {
    const auto x = random_inputs(15, 2, 51);
    Eigen::VectorXd y = x.col(0).array().square().matrix() - x.col(1);
    const auto train = TrainingSet::from_raw(x, y);
    OptimizerOptions opt;
    opt.seed = 99;
    const auto a = optimize_emulator(train, params2(1.0, 0.5, 0.5, 1e-8), opt);
    const auto b = optimize_emulator(train, params2(1.0, 0.5, 0.5, 1e-8), opt);
    EXPECT_EQ(a.variance_scale, b.variance_scale);
    EXPECT_EQ(a.lengthscales, b.lengthscales);
}

TEST(NelderMead, MinimisesBoundedQuadratic) {
    auto f = [](const Eigen::VectorXd& v) { return (v[0] - 0.3) * (v[0] - 0.3) + 4.0 * (v[1] + 2.0) * (v[1] + 2.0); };
    const auto r = detail::nelder_mead(f, Eigen::Vector2d(0.0, 0.0), 0.5, Eigen::Vector2d(-1.0, -1.0),
                                       Eigen::Vector2d(1.0, 1.0), 500);
    EXPECT_NEAR(r.argmin[0], 0.3, 1e-3);
    EXPECT_NEAR(r.argmin[1], -1.0, 1e-9);  // clamped at the lower bound
    EXPECT_LE(r.evaluations, 500u);
}
