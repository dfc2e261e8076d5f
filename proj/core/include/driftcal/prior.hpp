#pragma once

#include <random>
#include <string>
#include <utility>
#include <variant>

namespace driftcal {

/// Every random draw in the library goes through this engine type.
using Rng = std::mt19937_64;

struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};
struct Normal {
    double mean = 0.0;
    double sd = 1.0;
};
/// Density proportional to x^(-shape-1) exp(-scale/x).
struct InverseGamma {
    double shape = 1.0;
    double scale = 1.0;
};
/// log(x) ~ Normal(mu, sigma).
struct LogNormal {
    double mu = 0.0;
    double sigma = 1.0;
};

class Prior {
public:
    using Kind = std::variant<Uniform, Normal, InverseGamma, LogNormal>;

    Prior() : kind_(Uniform{}) {}
    /// Throws DomainError on invalid parameters. Uniform allows lo == hi (a point mass).
    Prior(Kind kind);  // NOLINT(google-explicit-constructor)

    static Prior uniform(double lo, double hi) { return Prior(Uniform{lo, hi}); }
    static Prior normal(double mean, double sd) { return Prior(Normal{mean, sd}); }
    static Prior inverse_gamma(double shape, double scale) { return Prior(InverseGamma{shape, scale}); }
    static Prior log_normal(double mu, double sigma) { return Prior(LogNormal{mu, sigma}); }
    /// Log-normal parameterised by its median.
    static Prior log_normal_median(double median, double sigma);

    const Kind& kind() const { return kind_; }
    std::string name() const;

    /// -inf outside the support.
    double log_density(double x) const;
    double sample(Rng& rng) const;
    /// Inverse CDF for u in [0,1); throws DomainError when u maps to an infinite value.
    double quantile(double u) const;
    double cdf(double x) const;
    /// (lo, hi) of the support, possibly infinite.
    std::pair<double, double> support() const;
    /// Mean of the distribution, +inf when it does not exist.
    double mean() const;

    template <typename T>
    const T* get_if() const { return std::get_if<T>(&kind_); }

private:
    Kind kind_;
};

/// Draw from an explicit prior with an explicit generator.
double sample_prior(const Prior& p, Rng& rng);

}  // namespace driftcal
