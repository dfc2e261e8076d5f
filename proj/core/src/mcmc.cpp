#include "driftcal/mcmc.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include "driftcal/gp.hpp"

namespace driftcal {

void McmcConfig::validate() const {
    std::string problems;
    if (!(iterations > burn_in)) problems += " iterations must exceed burn_in;";
    if (thin < 1) problems += " thin must be >= 1;";
    if (chains < 1) problems += " chains must be >= 1;";
    if (!(adapt_target > 0.0 && adapt_target < 1.0)) problems += " adapt_target must lie in (0,1);";
    if (!(initial_field_step > 0.0) || !(initial_hyper_step > 0.0) || !(initial_theta_step > 0.0))
        problems += " initial steps must be positive;";
    if (!problems.empty()) throw DomainError("invalid MCMC settings:" + problems);
}

std::size_t McmcConfig::stored_per_chain() const { return (iterations - burn_in) / thin; }

bool mh_accept(double log_post_new, double log_post_old, Rng& rng) {
    if (std::isnan(log_post_new) || log_post_new == -std::numeric_limits<double>::infinity()) return false;
    const double diff = log_post_new - log_post_old;
    if (diff >= 0.0) return true;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return u > 0.0 && std::log(u) < diff;
}

InverseGamma sigma2_conditional(const Eigen::VectorXd& residuals, const InverseGamma& prior) {
    return {prior.shape + 0.5 * static_cast<double>(residuals.size()),
            prior.scale + 0.5 * residuals.squaredNorm()};
}

double gibbs_sigma2(const Eigen::VectorXd& residuals, const InverseGamma& prior, Rng& rng) {
    if (!residuals.allFinite()) throw DomainError("gibbs_sigma2: residuals must be finite");
    return Prior(sigma2_conditional(residuals, prior)).sample(rng);
}

double StepAdapter::adapt(double step, bool accepted, std::size_t iteration) const {
    const double gain = std::pow(static_cast<double>(std::max<std::size_t>(iteration, 1)), -0.6);
    const double next = std::log(step) + gain * ((accepted ? 1.0 : 0.0) - target_);
    return std::exp(std::clamp(next, std::log(1e-6), std::log(50.0)));
}

void ExtrapolationStats::merge(const ExtrapolationStats& other) {
    evaluations += other.evaluations;
    extrapolated += other.extrapolated;
    non_finite += other.non_finite;
    max_distance = std::max(max_distance, other.max_distance);
}

}  // namespace driftcal
