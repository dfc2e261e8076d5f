#pragma once

#include <Eigen/Dense>

#include "driftcal/posterior.hpp"
#include "driftcal/sampler.hpp"

namespace driftcal {

/// Point in the additive-discrepancy model y = eta(x, theta) + delta_eta(x) + e.
struct KohState {
    Eigen::VectorXd theta;        // unit coordinates
    Eigen::VectorXd delta_knots;  // delta_eta at the observation inputs, standardized units
    double delta_variance = 0.1;
    double delta_lengthscale = 0.3;
    double noise_var = 1e-3;      // standardized units
    double log_post = 0.0;
};

/// Layout with a theta block and an additive field, and no input-side fields.
ModelLayout koh_layout();

/// Likelihood of y - eta(x, theta) - delta_eta(x), field prior, hyperparameter and theta
/// priors. Returns -inf for theta outside the prior support.
double koh_log_posterior(const KohState& state, const CalibrationProblem& problem,
                         const CalibrationPriors& priors);

/// Converts to the shared chain representation (knots at the observation inputs).
ChainState to_chain_state(const KohState& state, const CalibrationProblem& problem);

PosteriorSamples run_koh(const CalibrationProblem& problem, const CalibrationPriors& priors,
                         const McmcConfig& config, const Eigen::VectorXd& theta0 = {});

}  // namespace driftcal
