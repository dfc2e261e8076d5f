#include "driftcal/integrated_delta.hpp"

namespace driftcal {

ModelLayout integrated_delta_layout(bool sample_theta) {
    ModelLayout l;
    l.sample_theta = sample_theta;
    return l;
}

ModelLayout combined_layout(bool sample_theta) {
    ModelLayout l = integrated_delta_layout(sample_theta);
    l.additive = true;
    return l;
}

double embedded_log_posterior(const ChainState& state, const PosteriorModel& model) {
    return model.evaluate(state).total();
}

PosteriorSamples run_integrated_delta(const CalibrationProblem& problem, const CalibrationPriors& priors,
                                      CalibratorOptions options) {
    options.layout = integrated_delta_layout(options.layout.sample_theta);
    const PosteriorModel model(problem, priors, options.layout);
    return run_sampler(model, options, "integrated_delta");
}

PosteriorSamples run_combined(const CalibrationProblem& problem, const CalibrationPriors& priors,
                              CalibratorOptions options) {
    options.layout = combined_layout(options.layout.sample_theta);
    const PosteriorModel model(problem, priors, options.layout);
    return run_sampler(model, options, "combined");
}

}  // namespace driftcal
