#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "driftcal/design.hpp"
#include "driftcal/gp.hpp"
#include "driftcal/prior.hpp"

using namespace driftcal;

namespace {

bool stratified(const Eigen::MatrixXd& u) {
    const Eigen::MatrixXi bins = lhs_bins(u);
    for (Eigen::Index c = 0; c < bins.cols(); ++c) {
        std::vector<int> col(bins.col(c).data(), bins.col(c).data() + bins.rows());
        std::sort(col.begin(), col.end());
        for (std::size_t k = 0; k < col.size(); ++k)
            if (col[k] != static_cast<int>(k)) return false;
    }
    return (u.array() >= 0.0).all() && (u.array() < 1.0).all();
}

DesignSpec lc_spec() {
    DesignSpec s;
    s.domain_bounds = {{0.56, 2.88}};
    s.theta_priors = {Prior::normal(0.0, 1.0), Prior::uniform(40.0, 60.0)};
    s.n_samples = 4;
    return s;
}

}  // namespace

TEST(LatinHypercube, FourBinsOneColumn) {
    const auto u = latin_hypercube(4, 1, 17);
    const auto b = lhs_bins(u);
    std::vector<int> col(b.data(), b.data() + 4);
    std::sort(col.begin(), col.end());
    EXPECT_EQ(col, (std::vector<int>{0, 1, 2, 3}));
}

TEST(LatinHypercube, FortyThreeRunsFourColumns) {
    const auto u = latin_hypercube(43, 4, 2024);
    EXPECT_EQ(u.rows(), 43);
    EXPECT_EQ(u.cols(), 4);
    EXPECT_TRUE(stratified(u));
}

TEST(LatinHypercube, SeedsDifferBothStratified) {
    const auto a = latin_hypercube(20, 3, 1);
    const auto b = latin_hypercube(20, 3, 2);
    EXPECT_FALSE(a.isApprox(b));
    EXPECT_TRUE(stratified(a));
    EXPECT_TRUE(stratified(b));
    EXPECT_EQ(a, latin_hypercube(20, 3, 1));
}

TEST(LatinHypercube, StratifiedAcrossShapes) {
    for (std::size_t n : {1u, 2u, 7u, 50u, 101u})
        for (std::size_t d : {1u, 3u, 6u})
            for (std::uint64_t seed : {0ull, 5ull, 123456789ull}) EXPECT_TRUE(stratified(latin_hypercube(n, d, seed)));
}

TEST(LatinHypercube, EmptyShapesRejected) {
    EXPECT_THROW(latin_hypercube(0, 2, 1), DomainError);
    EXPECT_THROW(latin_hypercube(3, 0, 1), DomainError);
}

TEST(ScaleDesign, MidpointOfCoreWidthBounds) {
    Eigen::MatrixXd u(1, 3);
    u << 0.5, 0.5, 0.5;
    const auto p = scale_design(u, lc_spec());
    EXPECT_NEAR(p(0, 0), 1.72, 1e-12);
    EXPECT_NEAR(p(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(p(0, 2), 50.0, 1e-12);
}

TEST(ScaleDesign, LowerEndpoint) {
    Eigen::MatrixXd u(1, 3);
    u << 0.0, 0.3, 0.0;
    const auto p = scale_design(u, lc_spec());
    EXPECT_DOUBLE_EQ(p(0, 0), 0.56);
    EXPECT_DOUBLE_EQ(p(0, 2), 40.0);
}

TEST(ScaleDesign, OutOfRangeRejected) {
    Eigen::MatrixXd u(1, 3);
    u << 1.0, 0.3, 0.3;
    EXPECT_THROW(scale_design(u, lc_spec()), DomainError);
    u << -0.1, 0.3, 0.3;
    EXPECT_THROW(scale_design(u, lc_spec()), DomainError);
    EXPECT_THROW(scale_design(Eigen::MatrixXd::Constant(1, 2, 0.5), lc_spec()), DimensionError);
}

TEST(ScaleDesign, MonotoneAndInvertible) {
    const auto spec = lc_spec();
    const auto u = latin_hypercube(30, 3, 9);
    const auto p = scale_design(u, spec);
    const auto back = unscale_design(p, spec);
    EXPECT_LE((back - u).cwiseAbs().maxCoeff(), 1e-9);
    for (Eigen::Index c = 0; c < 3; ++c)
        for (Eigen::Index i = 0; i < 30; ++i)
            for (Eigen::Index j = 0; j < 30; ++j)
                if (u(i, c) < u(j, c)) EXPECT_LT(p(i, c), p(j, c));
}

TEST(Prior, DegenerateUniformIsPointMass) {
    Rng rng(1);
    const auto p = Prior::uniform(2.0, 2.0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_prior(p, rng), 2.0);
    EXPECT_THROW(Prior::uniform(3.0, 2.0), DomainError);
}

TEST(Prior, InvalidParametersRejected) {
    EXPECT_THROW(Prior::normal(0.0, 0.0), DomainError);
    EXPECT_THROW(Prior::inverse_gamma(0.0, 1.0), DomainError);
    EXPECT_THROW(Prior::inverse_gamma(1.0, -1.0), DomainError);
    EXPECT_THROW(Prior::log_normal(0.0, 0.0), DomainError);
}

TEST(Prior, NormalSampleMean) {
    Rng rng(42);
    const auto p = Prior::normal(3.0, 0.5);
    double s = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) s += sample_prior(p, rng);
    EXPECT_NEAR(s / n, 3.0, 0.005);
}

TEST(Prior, InverseGammaSampleMean) {
    Rng rng(43);
    const auto p = Prior::inverse_gamma(3.0, 2.0);
    double s = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double v = sample_prior(p, rng);
        ASSERT_GT(v, 0.0);
        s += v;
    }
    EXPECT_NEAR(s / n, 1.0, 0.02);
}

TEST(Prior, LogDensityClosedForms) {
    EXPECT_NEAR(Prior::uniform(0.0, 4.0).log_density(1.0), -std::log(4.0), 1e-15);
    EXPECT_EQ(Prior::uniform(0.0, 4.0).log_density(5.0), -std::numeric_limits<double>::infinity());
    EXPECT_NEAR(Prior::normal(1.0, 2.0).log_density(3.0), -0.5 - std::log(2.0) - 0.5 * std::log(2.0 * M_PI), 1e-14);
    // IG(a,b): a log b - lgamma(a) - (a+1) log x - b/x
    const double a = 3.0, b = 2.0, x = 0.7;
    EXPECT_NEAR(Prior::inverse_gamma(a, b).log_density(x),
                a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x, 1e-13);
    EXPECT_EQ(Prior::inverse_gamma(a, b).log_density(0.0), -std::numeric_limits<double>::infinity());
    const double mu = -1.0, sg = 0.5;
    EXPECT_NEAR(Prior::log_normal(mu, sg).log_density(x),
                -std::log(x * sg) - 0.5 * std::log(2.0 * M_PI) - 0.5 * std::pow((std::log(x) - mu) / sg, 2), 1e-13);
}

TEST(Prior, QuantileInvertsCdf) {
    const std::vector<Prior> priors = {Prior::uniform(-1.0, 2.0), Prior::normal(3.0, 0.5),
                                       Prior::inverse_gamma(3.0, 2.0), Prior::log_normal_median(0.3, 0.5)};
    for (const auto& p : priors)
        for (double u : {0.01, 0.2, 0.5, 0.77, 0.99}) EXPECT_NEAR(p.cdf(p.quantile(u)), u, 1e-10) << p.name();
    EXPECT_NEAR(Prior::log_normal_median(0.3, 0.5).quantile(0.5), 0.3, 1e-12);
}

TEST(Prior, SameSeedSameDraws) {
    Rng a(7), b(7);
    const auto p = Prior::log_normal(0.0, 1.0);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_prior(p, a), sample_prior(p, b));
}
