#include "driftcal/posterior.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "driftcal/log.hpp"

namespace driftcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double prior_median(const Prior& p) {
    if (const auto* l = p.get_if<LogNormal>()) return std::exp(l->mu);
    return p.quantile(0.5);
}

}  // namespace

std::shared_ptr<const Emulator> make_simulator_emulator(const SyntheticSimulator& sim,
                                                        const CalibrationDataset& data) {
    const std::size_t dx = data.x_dim();
    const std::size_t dt = data.theta_dim();
    const Standardizer transform = Standardizer::fit(data.sim_targets());
    auto fn = [sim, data, dx, dt](std::span<const double> u) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(dx)), theta(static_cast<Eigen::Index>(dt));
        for (std::size_t i = 0; i < dx; ++i) x[static_cast<Eigen::Index>(i)] = data.domain_bounds[i].from_unit(u[i]);
        for (std::size_t i = 0; i < dt; ++i)
            theta[static_cast<Eigen::Index>(i)] = data.theta_bounds[i].from_unit(u[dx + i]);
        return eval_simulator(sim, x, theta);
    };
    return std::make_shared<FunctionEmulator>(dx + dt, std::move(fn), transform);
}

GPModel train_emulator(const CalibrationDataset& data, const EmulatorSettings& settings) {
    data.validate();
    TrainingSet train = TrainingSet::from_raw(data.sim_inputs_unit(), data.sim_targets());
    KernelParams init = settings.init;
    if (init.lengthscales.size() == 0) init.lengthscales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(train.dim()), 0.3);
    if (static_cast<std::size_t>(init.lengthscales.size()) != train.dim())
        throw DimensionError("emulator init has " + std::to_string(init.lengthscales.size()) +
                             " lengthscales but the design has " + std::to_string(train.dim()) + " inputs");
    OptimizerOptions opt;
    opt.budget = settings.budget;
    opt.restarts = settings.restarts;
    opt.seed = settings.seed;
    const KernelParams tuned = optimize_emulator(train, init, opt);
    return fit_gp(train, tuned);
}

CalibrationProblem CalibrationProblem::from_dataset(const CalibrationDataset& data,
                                                    std::shared_ptr<const Emulator> emulator) {
    data.validate();
    if (!emulator) throw DomainError("calibration problem needs an emulator");
    if (emulator->input_dim() != data.x_dim() + data.theta_dim())
        throw DimensionError("emulator input dimension does not match the dataset");
    CalibrationProblem p;
    p.obs_x = data.obs_inputs_unit();
    p.obs_y = emulator->target_transform().forward(data.obs_targets());
    p.emulator = std::move(emulator);
    p.theta_dim = data.theta_dim();
    p.theta_names = data.theta_names;
    if (p.theta_names.empty())
        for (std::size_t k = 0; k < p.theta_dim; ++k) p.theta_names.push_back("theta" + std::to_string(k + 1));
    return p;
}

CalibrationPriors CalibrationPriors::defaults(std::size_t theta_dim) {
    CalibrationPriors p;
    p.theta.assign(theta_dim, Prior::uniform(0.0, 1.0));
    p.fields.assign(theta_dim, FieldPrior{});
    return p;
}

void CalibrationPriors::validate(std::size_t theta_dim) const {
    if (theta.size() != theta_dim) throw DimensionError("need one theta prior per calibration parameter");
    if (fields.size() != theta_dim) throw DimensionError("need one field prior per calibration parameter");
    Prior(InverseGamma{noise});  // throws on invalid parameters
}

std::vector<Block> make_blocks(const ModelLayout& layout, const std::vector<std::string>& names) {
    std::vector<Block> blocks;
    if (layout.sample_theta) blocks.push_back({BlockKind::theta, 0, "theta"});
    if (layout.theta_fields)
        for (std::size_t k = 0; k < names.size(); ++k) blocks.push_back({BlockKind::field, k, "delta_" + names[k]});
    if (layout.additive) blocks.push_back({BlockKind::additive, 0, "delta_eta"});
    if (layout.update_hypers) {
        if (layout.theta_fields)
            for (std::size_t k = 0; k < names.size(); ++k)
                blocks.push_back({BlockKind::field_hyper, k, "hyper_" + names[k]});
        if (layout.additive) blocks.push_back({BlockKind::additive_hyper, 0, "hyper_delta_eta"});
    }
    if (layout.update_noise) blocks.push_back({BlockKind::noise, 0, "sigma2"});
    return blocks;
}

double PosteriorTerms::total() const {
    double t = likelihood + additive_prior + additive_hyper_prior + theta_prior + noise_prior;
    for (double v : field_prior) t += v;
    for (double v : field_hyper_prior) t += v;
    return std::isnan(t) ? kNegInf : t;
}

PosteriorModel::PosteriorModel(CalibrationProblem problem, CalibrationPriors priors, ModelLayout layout)
    : problem_(std::move(problem)), priors_(std::move(priors)), layout_(layout) {
    priors_.validate(problem_.theta_dim);
    if (!problem_.emulator) throw DomainError("posterior model needs an emulator");
    blocks_ = make_blocks(layout_, problem_.theta_names);
}

double PosteriorModel::likelihood(const ChainState& state, Eigen::VectorXd& residuals,
                                  Eigen::VectorXd& emu_var, ExtrapolationStats& extrapolation) const {
    const auto n = static_cast<Eigen::Index>(problem_.n_obs());
    const auto dx = static_cast<Eigen::Index>(problem_.x_dim());
    const auto dt = static_cast<Eigen::Index>(problem_.theta_dim);
    residuals.resize(n);
    emu_var.resize(n);
    std::vector<double> input(static_cast<std::size_t>(dx + dt));

    ++extrapolation.evaluations;
    double worst = 0.0;
    double ll = 0.0;
    bool finite = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd theta =
            layout_.theta_fields ? state.theta_star.at_knot(i) : state.theta_star.base_theta;
        for (Eigen::Index j = 0; j < dx; ++j) input[static_cast<std::size_t>(j)] = problem_.obs_x(i, j);
        double outside = 0.0;
        for (Eigen::Index k = 0; k < dt; ++k) {
            const double t = theta[k];
            input[static_cast<std::size_t>(dx + k)] = t;
            const double excess = t < 0.0 ? -t : (t > 1.0 ? t - 1.0 : 0.0);
            outside += excess * excess;
        }
        worst = std::max(worst, std::sqrt(outside));

        const PointPrediction p = problem_.emulator->predict(input);
        const double add = state.additive ? state.additive->values()[i] : 0.0;
        residuals[i] = problem_.obs_y[i] - p.mean - add;
        emu_var[i] = p.variance;
        const double var = state.noise_var + p.variance;
        if (!std::isfinite(p.mean) || !std::isfinite(p.variance) || !(var > 0.0)) {
            finite = false;
            continue;
        }
        ll += -0.5 * (std::log(2.0 * std::numbers::pi * var) + residuals[i] * residuals[i] / var);
    }
    if (worst > 0.0) {
        ++extrapolation.extrapolated;
        extrapolation.max_distance = std::max(extrapolation.max_distance, worst);
    }
    if (!finite) {
        ++extrapolation.non_finite;
        log_warning("emulator returned a non-finite prediction at distance " + std::to_string(worst) +
                    " from its training box; state rejected");
        return kNegInf;
    }
    return ll;
}

double PosteriorModel::field_hyper_log_prior(const DiscrepancyField& field, const FieldPrior& prior) const {
    const double v = field.variance();
    const double l = field.lengthscale();
    return prior.variance.log_density(v) + std::log(v) + prior.lengthscale.log_density(l) + std::log(l);
}

double PosteriorModel::theta_log_prior(const Eigen::VectorXd& theta) const {
    double lp = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) lp += priors_.theta[static_cast<std::size_t>(k)].log_density(theta[k]);
    return lp;
}

double PosteriorModel::noise_log_prior(double noise_var) const {
    return Prior(priors_.noise).log_density(noise_var);
}

PosteriorTerms PosteriorModel::evaluate(const ChainState& state) const {
    PosteriorTerms t;
    t.likelihood = likelihood(state, t.residuals, t.emu_var, t.extrapolation);
    if (layout_.theta_fields) {
        for (std::size_t k = 0; k < state.theta_star.fields.size(); ++k) {
            const auto& f = state.theta_star.fields[k];
            t.field_prior.push_back(f.log_prior());
            t.field_hyper_prior.push_back(field_hyper_log_prior(f, priors_.fields[k]));
        }
    }
    if (layout_.additive && state.additive) {
        t.additive_prior = state.additive->log_prior();
        t.additive_hyper_prior = field_hyper_log_prior(*state.additive, priors_.additive);
    }
    if (layout_.sample_theta) t.theta_prior = theta_log_prior(state.theta_star.base_theta);
    t.noise_prior = noise_log_prior(state.noise_var);
    return t;
}

ChainState PosteriorModel::initial_state(const Eigen::VectorXd& theta0, std::size_t knot_refinement,
                                         const McmcConfig& config) const {
    if (static_cast<std::size_t>(theta0.size()) != problem_.theta_dim)
        throw DimensionError("theta0 has " + std::to_string(theta0.size()) + " entries, expected " +
                             std::to_string(problem_.theta_dim));
    ChainState s;
    s.theta_star.base_theta = theta0;
    const Eigen::MatrixXd knots = make_knots(problem_.obs_x, knot_refinement);
    if (layout_.theta_fields)
        for (std::size_t k = 0; k < problem_.theta_dim; ++k)
            s.theta_star.fields.emplace_back(knots, prior_median(priors_.fields[k].variance),
                                             prior_median(priors_.fields[k].lengthscale));
    if (layout_.additive)
        s.additive.emplace(knots, prior_median(priors_.additive.variance),
                           prior_median(priors_.additive.lengthscale));
    const Prior noise(priors_.noise);
    const double m = noise.mean();
    s.noise_var = std::isfinite(m) ? m : priors_.noise.scale / (priors_.noise.shape + 1.0);

    for (const auto& b : blocks_) {
        switch (b.kind) {
            case BlockKind::theta: s.step_sizes.push_back(config.initial_theta_step); break;
            case BlockKind::field:
            case BlockKind::additive: s.step_sizes.push_back(config.initial_field_step); break;
            case BlockKind::field_hyper:
            case BlockKind::additive_hyper: s.step_sizes.push_back(config.initial_hyper_step); break;
            case BlockKind::noise: s.step_sizes.push_back(1.0); break;
        }
    }
    s.log_post = evaluate(s).total();
    if (!std::isfinite(s.log_post))
        throw InitializationError("log posterior is not finite at the initial state");
    return s;
}

}  // namespace driftcal
