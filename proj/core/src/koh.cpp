#include "driftcal/koh.hpp"

namespace driftcal {

ModelLayout koh_layout() {
    ModelLayout l;
    l.theta_fields = false;
    l.additive = true;
    l.sample_theta = true;
    return l;
}

ChainState to_chain_state(const KohState& state, const CalibrationProblem& problem) {
    if (static_cast<std::size_t>(state.theta.size()) != problem.theta_dim)
        throw DimensionError("KOH state theta has the wrong dimension");
    if (static_cast<std::size_t>(state.delta_knots.size()) != problem.n_obs())
        throw DimensionError("KOH state needs one discrepancy value per observation");
    if (!(state.noise_var > 0.0)) throw DomainError("noise variance must be positive");
    ChainState s;
    s.theta_star.base_theta = state.theta;
    s.additive.emplace(problem.obs_x, state.delta_knots, state.delta_variance, state.delta_lengthscale);
    s.noise_var = state.noise_var;
    return s;
}

double koh_log_posterior(const KohState& state, const CalibrationProblem& problem,
                         const CalibrationPriors& priors) {
    const PosteriorModel model(problem, priors, koh_layout());
    return model.evaluate(to_chain_state(state, problem)).total();
}

PosteriorSamples run_koh(const CalibrationProblem& problem, const CalibrationPriors& priors,
                         const McmcConfig& config, const Eigen::VectorXd& theta0) {
    const PosteriorModel model(problem, priors, koh_layout());
    CalibratorOptions opt;
    opt.layout = koh_layout();
    opt.mcmc = config;
    opt.theta0 = theta0;
    return run_sampler(model, opt, "koh");
}

}  // namespace driftcal
