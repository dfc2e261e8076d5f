#pragma once

#include "driftcal/posterior.hpp"
#include "driftcal/sampler.hpp"

namespace driftcal {

/// Input-side fields only; theta stays at theta0 unless `sample_theta`.
ModelLayout integrated_delta_layout(bool sample_theta = false);

/// Input-side fields plus an additive discrepancy. Experimental.
ModelLayout combined_layout(bool sample_theta = false);

/// Log posterior of y_i = eta(x_i, theta*(x_i)) + e_i with the field, hyperparameter
/// and noise priors.
double embedded_log_posterior(const ChainState& state, const PosteriorModel& model);

PosteriorSamples run_integrated_delta(const CalibrationProblem& problem, const CalibrationPriors& priors,
                                      CalibratorOptions options);

PosteriorSamples run_combined(const CalibrationProblem& problem, const CalibrationPriors& priors,
                              CalibratorOptions options);

}  // namespace driftcal
