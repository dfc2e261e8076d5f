#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "driftcal/diagnostics.hpp"
#include "driftcal/gp.hpp"

using namespace driftcal;

namespace {

std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double shift = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> x(n);
    double v = z(rng) / std::sqrt(1.0 - phi * phi);
    for (auto& e : x) {
        v = phi * v + z(rng);
        e = v + shift;
    }
    return x;
}

// Classic between/within ratio over the halves, written out longhand.
double rhat_oracle(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> halves;
    for (const auto& c : chains) {
        const std::size_t h = c.size() / 2;
        halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
        halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(h), c.end());
    }
    const double n = static_cast<double>(halves[0].size());
    const double m = static_cast<double>(halves.size());
    std::vector<double> means;
    double w = 0.0;
    for (const auto& s : halves) {
        double mu = 0.0;
        for (double v : s) mu += v;
        mu /= n;
        means.push_back(mu);
        double ss = 0.0;
        for (double v : s) ss += (v - mu) * (v - mu);
        w += ss / (n - 1.0);
    }
    w /= m;
    double grand = 0.0;
    for (double mu : means) grand += mu;
    grand /= m;
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= n / (m - 1.0);
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

}  // namespace

TEST(SplitRhat, MatchesLonghandFormula) {
    const std::vector<std::vector<double>> chains = {{1.0, 2.0, 3.0, 4.0, 2.5, 1.5},
                                                     {2.0, 3.5, 3.0, 5.0, 4.0, 4.5}};
    EXPECT_NEAR(split_rhat(chains), rhat_oracle(chains), 1e-12);
}

TEST(SplitRhat, IndependentChainsNearOne) {
    const auto a = ar1(20000, 0.0, 1), b = ar1(20000, 0.0, 2);
    EXPECT_NEAR(split_rhat({a, b}), 1.0, 0.01);
}

TEST(SplitRhat, DetectsSeparatedChains) {
    const auto a = ar1(2000, 0.5, 3), b = ar1(2000, 0.5, 4, 3.0);
    EXPECT_GT(split_rhat({a, b}), 1.5);
}

TEST(SplitRhat, DetectsTrendWithinOneChain) {
    std::vector<double> c(1000);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<double>(i) / 100.0;
    EXPECT_GT(split_rhat({c}), 1.5);
}

TEST(SplitRhat, ConstantChainsAreConverged) {
    EXPECT_EQ(split_rhat({{2.0, 2.0, 2.0, 2.0}, {2.0, 2.0, 2.0, 2.0}}), 1.0);
}

TEST(SplitRhat, RejectsShortOrRaggedChains) {
    EXPECT_THROW(split_rhat({{1.0, 2.0, 3.0}}), DomainError);
    EXPECT_THROW(split_rhat({{1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0, 4.0, 5.0}}), DimensionError);
}

TEST(EffectiveSampleSize, IidCloseToCount) {
    const auto a = ar1(20000, 0.0, 5);
    EXPECT_NEAR(effective_sample_size({a}) / 20000.0, 1.0, 0.1);
}

TEST(EffectiveSampleSize, Ar1MatchesAsymptoticFactor) {
    const double phi = 0.8;
    const auto a = ar1(50000, phi, 6), b = ar1(50000, phi, 7);
    const double expected = 100000.0 * (1.0 - phi) / (1.0 + phi);
    EXPECT_NEAR(effective_sample_size({a, b}) / expected, 1.0, 0.15);
}

TEST(BatchMeansMcse, IidMatchesStandardError) {
    const auto a = ar1(40000, 0.0, 8);
    EXPECT_NEAR(batch_means_mcse(a) * std::sqrt(40000.0), 1.0, 0.15);
}

TEST(BatchMeansMcse, Ar1InflatesByLongRunVariance) {
    const double phi = 0.7;
    const auto a = ar1(90000, phi, 9);
    // long-run sd of the AR(1) mean: sigma / (1 - phi)
    const double expected = 1.0 / (1.0 - phi) / std::sqrt(90000.0);
    EXPECT_NEAR(batch_means_mcse(a) / expected, 1.0, 0.2);
}
