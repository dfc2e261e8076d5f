#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/prior.hpp"

namespace driftcal {

struct McmcConfig {
    std::size_t iterations = 20000;
    std::size_t burn_in = 5000;
    std::size_t thin = 10;
    std::size_t chains = 2;
    std::uint64_t seed = 1;
    double adapt_target = 0.3;
    /// Recompute the cached log posterior from scratch every this many iterations (0 = never).
    std::size_t audit_interval = 1000;
    double initial_field_step = 0.5;
    double initial_hyper_step = 0.5;
    double initial_theta_step = 0.05;

    /// Throws DomainError listing the violated constraint.
    void validate() const;
    std::size_t stored_per_chain() const;
};

class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when the cached log posterior disagrees with a fresh evaluation.
class AuditError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Accept with probability min(1, exp(log_post_new - log_post_old)).
/// A uniform is drawn only when the proposal is worse than the current state.
bool mh_accept(double log_post_new, double log_post_old, Rng& rng);

/// Conjugate draw sigma^2 ~ IG(a0 + N/2, b0 + sum(r^2)/2).
double gibbs_sigma2(const Eigen::VectorXd& residuals, const InverseGamma& prior, Rng& rng);

/// Parameters of the conjugate inverse-gamma conditional.
InverseGamma sigma2_conditional(const Eigen::VectorXd& residuals, const InverseGamma& prior);

/// Robbins-Monro scaling of a proposal step toward a target acceptance rate.
class StepAdapter {
public:
    explicit StepAdapter(double target = 0.3) : target_(target) {}

    /// log(step) += t^-0.6 * (accepted - target), clamped to a sane range.
    double adapt(double step, bool accepted, std::size_t iteration) const;
    double target() const { return target_; }

private:
    double target_;
};

/// Running accept/propose counts for one block.
struct AcceptanceCounter {
    std::size_t proposed = 0;
    std::size_t accepted = 0;

    void record(bool ok) {
        ++proposed;
        accepted += ok ? 1 : 0;
    }
    double rate() const {
        return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
    }
};

/// Log-posterior evaluations that queried the emulator outside the unit box of its
/// training inputs, with the largest Euclidean distance to that box.
struct ExtrapolationStats {
    std::size_t evaluations = 0;
    std::size_t extrapolated = 0;
    double max_distance = 0.0;
    std::size_t non_finite = 0;

    void merge(const ExtrapolationStats& other);
};

}  // namespace driftcal
