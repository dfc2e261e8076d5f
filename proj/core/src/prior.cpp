#include "driftcal/prior.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include "driftcal/gp.hpp"

namespace driftcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

Prior::Prior(Kind kind) : kind_(kind) {
    std::visit(overloaded{
                   [](const Uniform& u) {
                       if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || u.lo > u.hi)
                           throw DomainError("uniform prior needs finite lo <= hi");
                   },
                   [](const Normal& n) {
                       if (!std::isfinite(n.mean) || !positive(n.sd))
                           throw DomainError("normal prior needs sd > 0");
                   },
                   [](const InverseGamma& g) {
                       if (!positive(g.shape) || !positive(g.scale))
                           throw DomainError("inverse-gamma prior needs shape > 0 and scale > 0");
                   },
                   [](const LogNormal& l) {
                       if (!std::isfinite(l.mu) || !positive(l.sigma))
                           throw DomainError("log-normal prior needs sigma > 0");
                   },
               },
               kind_);
}

Prior Prior::log_normal_median(double median, double sigma) {
    if (!positive(median)) throw DomainError("log-normal median must be positive");
    return log_normal(std::log(median), sigma);
}

std::string Prior::name() const {
    return std::visit(overloaded{
                          [](const Uniform&) { return std::string("uniform"); },
                          [](const Normal&) { return std::string("normal"); },
                          [](const InverseGamma&) { return std::string("inverse_gamma"); },
                          [](const LogNormal&) { return std::string("log_normal"); },
                      },
                      kind_);
}

double Prior::log_density(double x) const {
    if (!std::isfinite(x)) return -kInf;
    return std::visit(
        overloaded{
            [x](const Uniform& u) {
                if (x < u.lo || x > u.hi) return -kInf;
                return u.hi > u.lo ? -std::log(u.hi - u.lo) : 0.0;
            },
            [x](const Normal& n) {
                const double z = (x - n.mean) / n.sd;
                return -0.5 * z * z - std::log(n.sd) - 0.5 * std::log(2.0 * std::numbers::pi);
            },
            [x](const InverseGamma& g) {
                if (x <= 0.0) return -kInf;
                return g.shape * std::log(g.scale) - std::lgamma(g.shape) -
                       (g.shape + 1.0) * std::log(x) - g.scale / x;
            },
            [x](const LogNormal& l) {
                if (x <= 0.0) return -kInf;
                const double lx = std::log(x);
                const double z = (lx - l.mu) / l.sigma;
                return -0.5 * z * z - std::log(l.sigma) - lx -
                       0.5 * std::log(2.0 * std::numbers::pi);
            },
        },
        kind_);
}

double Prior::sample(Rng& rng) const {
    return std::visit(overloaded{
                          [&rng](const Uniform& u) {
                              if (u.hi == u.lo) return u.lo;
                              return std::uniform_real_distribution<double>(u.lo, u.hi)(rng);
                          },
                          [&rng](const Normal& n) {
                              return std::normal_distribution<double>(n.mean, n.sd)(rng);
                          },
                          [&rng](const InverseGamma& g) {
                              double gam = 0.0;
                              do {
                                  gam = std::gamma_distribution<double>(g.shape, 1.0)(rng);
                              } while (!(gam > 0.0));
                              return g.scale / gam;
                          },
                          [&rng](const LogNormal& l) {
                              return std::exp(std::normal_distribution<double>(l.mu, l.sigma)(rng));
                          },
                      },
                      kind_);
}

double Prior::quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw DomainError("quantile argument must lie in [0,1)");
    return std::visit(
        overloaded{
            [u](const Uniform& p) { return p.lo + u * (p.hi - p.lo); },
            [u](const Normal& p) {
                if (u == 0.0) throw DomainError("normal prior quantile at 0 is -infinity");
                return boost::math::quantile(boost::math::normal(p.mean, p.sd), u);
            },
            [u](const InverseGamma& p) {
                if (u == 0.0) return 0.0;
                return boost::math::quantile(boost::math::inverse_gamma(p.shape, p.scale), u);
            },
            [u](const LogNormal& p) {
                if (u == 0.0) return 0.0;
                return boost::math::quantile(boost::math::lognormal(p.mu, p.sigma), u);
            },
        },
        kind_);
}

double Prior::cdf(double x) const {
    return std::visit(
        overloaded{
            [x](const Uniform& p) {
                if (x < p.lo) return 0.0;
                if (x >= p.hi) return 1.0;
                return (x - p.lo) / (p.hi - p.lo);
            },
            [x](const Normal& p) { return boost::math::cdf(boost::math::normal(p.mean, p.sd), x); },
            [x](const InverseGamma& p) {
                if (x <= 0.0) return 0.0;
                return boost::math::cdf(boost::math::inverse_gamma(p.shape, p.scale), x);
            },
            [x](const LogNormal& p) {
                if (x <= 0.0) return 0.0;
                return boost::math::cdf(boost::math::lognormal(p.mu, p.sigma), x);
            },
        },
        kind_);
}

std::pair<double, double> Prior::support() const {
    return std::visit(overloaded{
                          [](const Uniform& p) { return std::pair{p.lo, p.hi}; },
                          [](const Normal&) { return std::pair{-kInf, kInf}; },
                          [](const InverseGamma&) { return std::pair{0.0, kInf}; },
                          [](const LogNormal&) { return std::pair{0.0, kInf}; },
                      },
                      kind_);
}

double Prior::mean() const {
    return std::visit(overloaded{
                          [](const Uniform& p) { return 0.5 * (p.lo + p.hi); },
                          [](const Normal& p) { return p.mean; },
                          [](const InverseGamma& p) {
                              return p.shape > 1.0 ? p.scale / (p.shape - 1.0) : kInf;
                          },
                          [](const LogNormal& p) { return std::exp(p.mu + 0.5 * p.sigma * p.sigma); },
                      },
                      kind_);
}

double sample_prior(const Prior& p, Rng& rng) { return p.sample(rng); }

}  // namespace driftcal
