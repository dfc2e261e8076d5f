#include "driftcal/orchestrate.hpp"

#include <chrono>
#include <fstream>

#include "driftcal/integrated_delta.hpp"
#include "driftcal/koh.hpp"
#include "driftcal/log.hpp"
#include "driftcal/predictive.hpp"
#include "json.hpp"

namespace driftcal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
    if (!os) throw std::runtime_error("error writing " + p.string());
}

std::string emulator_json(const Emulator& emulator, bool bypass) {
    nlohmann::ordered_json j;
    j["format"] = "driftcal-emulator v1";
    const Standardizer& t = emulator.target_transform();
    j["target_offset"] = t.offset;
    j["target_scale"] = t.scale;
    j["input_dim"] = emulator.input_dim();
    if (bypass) {
        j["kind"] = "simulator";
    } else if (const auto* gp = dynamic_cast<const GpEmulator*>(&emulator)) {
        const GPModel& m = gp->model();
        j["kind"] = "gp";
        j["variance"] = m.params().variance_scale;
        j["lengthscales"] = std::vector<double>(m.params().lengthscales.data(),
                                                m.params().lengthscales.data() + m.params().lengthscales.size());
        j["nugget"] = m.params().nugget;
        j["n_train"] = m.train().size();
        j["log_marginal_likelihood"] = log_marginal_likelihood(m);
    }
    return j.dump(2) + "\n";
}

std::string method_dir(RunMode m) { return to_string(m); }

void write_setup(const RunConfig& config, const CalibrationDataset& data) {
    std::filesystem::create_directories(config.output);
    write_text(config.output / "FORMAT", std::string(kRunFormatTag) + "\n");
    write_text(config.output / "config.json", config.echo);
    write_dataset(config.output / "dataset.csv", data);
}

}  // namespace

CalibrationDataset load_or_generate(const RunConfig& config) {
    if (config.dataset) return read_dataset(*config.dataset);
    if (!config.synthetic) throw DomainError("no dataset or synthetic specification");
    const SyntheticSpec& s = *config.synthetic;
    return generate_dataset(s.simulator, s.design(), s.truth(), s.plan, s.noise_seed);
}

std::shared_ptr<const Emulator> build_emulator(const RunConfig& config, const CalibrationDataset& data) {
    if (config.emulator_bypass) {
        if (!config.synthetic) throw DomainError("emulator bypass needs a synthetic simulator");
        return make_simulator_emulator(config.synthetic->simulator, data);
    }
    return std::make_shared<GpEmulator>(train_emulator(data, config.emulator));
}

std::optional<std::function<double(double)>> truth_curve(const RunConfig& config, const CalibrationDataset& data) {
    if (!config.synthetic || !data.truth || data.x_dim() != 1) return std::nullopt;
    const SyntheticSimulator sim = config.synthetic->simulator;
    const DriftTruth truth = *data.truth;
    const Interval xb = data.domain_bounds.front();
    const std::vector<Interval> tb = data.theta_bounds;
    return [sim, truth, xb, tb](double x_unit) {
        const Eigen::VectorXd u = truth.theta_unit(x_unit);
        Eigen::VectorXd theta(u.size());
        for (Eigen::Index k = 0; k < u.size(); ++k) theta[k] = tb[static_cast<std::size_t>(k)].from_unit(u[k]);
        Eigen::VectorXd x(1);
        x[0] = xb.from_unit(x_unit);
        return eval_simulator(sim, x, theta);
    };
}

PosteriorSamples run_method(RunMode method, const RunConfig& config, const CalibrationProblem& problem) {
    const CalibrationPriors priors = config.priors.build(problem.theta_dim);
    const CalibratorSettings s = config.calibrator(method);
    CalibratorOptions opt;
    opt.mcmc = config.mcmc;
    opt.theta0 = s.theta0;
    opt.knot_refinement = s.knot_refinement;
    opt.layout.sample_theta = s.sample_theta;
    switch (method) {
        case RunMode::koh: return run_koh(problem, priors, config.mcmc, s.theta0);
        case RunMode::integrated_delta: return run_integrated_delta(problem, priors, opt);
        case RunMode::combined: return run_combined(problem, priors, opt);
        default: throw DomainError("mode " + to_string(method) + " is not a calibrator");
    }
}

MethodReport score_method(const PosteriorSamples& samples, const RunConfig& config, const CalibrationDataset& data,
                          const Emulator& emulator,
                          const std::optional<std::function<double(double)>>& truth,
                          const std::filesystem::path& out_dir) {
    if (samples.draws() == 0) throw DomainError("no stored draws; increase iterations or reduce thin");
    const Standardizer& target = emulator.target_transform();
    const Eigen::MatrixXd grid = uniform_grid(config.report.grid_points);
    const Eigen::MatrixXd obs_x = data.obs_inputs_unit();
    const Eigen::VectorXd obs_y = data.obs_targets();
    const bool additive_only = samples.delta.empty();

    const PredictiveSummary on_grid = posterior_predictive(samples, emulator, grid);
    const PredictiveSummary at_obs = posterior_predictive(samples, emulator, obs_x);
    PredictiveSummary eta_grid = on_grid;
    PredictiveSummary eta_obs = at_obs;
    if (additive_only) {
        const Eigen::VectorXd theta_hat = posterior_mean_theta(samples);
        eta_grid = emulator_at_theta(emulator, grid, theta_hat);
        eta_obs = emulator_at_theta(emulator, obs_x, theta_hat);
    }

    MethodReport r;
    r.method = samples.method;
    r.draws = samples.draws();
    r.rmse = rmse(at_obs.mean, obs_y);
    r.eta_rmse = rmse(eta_obs.eta_mean, obs_y);
    const Eigen::VectorXd sd = at_obs.sd();
    std::size_t covered = 0;
    for (Eigen::Index i = 0; i < obs_y.size(); ++i)
        covered += std::abs(at_obs.mean[i] - obs_y[i]) <= 2.0 * sd[i] ? 1 : 0;
    r.coverage = static_cast<double>(covered) / static_cast<double>(obs_y.size());
    if (truth) {
        std::vector<double> est, ref;
        for (Eigen::Index i = 0; i < grid.rows(); ++i)
            if (grid(i, 0) <= 0.25 + 1e-12) {
                est.push_back(eta_grid.eta_mean[i]);
                ref.push_back((*truth)(grid(i, 0)));
            }
        if (!est.empty())
            r.eta_rmse_truth_low_x = rmse(Eigen::Map<Eigen::VectorXd>(est.data(), static_cast<Eigen::Index>(est.size())),
                                          Eigen::Map<Eigen::VectorXd>(ref.data(), static_cast<Eigen::Index>(ref.size())));
    }
    r.acceptance = samples.acceptance;
    r.extrapolation = samples.extrapolation;
    r.audits = samples.audits;
    chain_diagnostics(samples, r);

    std::filesystem::create_directories(out_dir);
    PredictiveSummary band = on_grid;
    band.eta_mean = eta_grid.eta_mean;
    band.eta_variance = eta_grid.eta_variance;
    emit_plot_data(samples, band, grid, data, target, out_dir, config.report.trajectories);
    write_samples(out_dir / "samples", samples, data, target);

    {
        std::ofstream os(out_dir / "predictive_obs.csv");
        if (!os) throw std::runtime_error("cannot write " + (out_dir / "predictive_obs.csv").string());
        os << "x_unit,y,mean,sd,eta_mean,eta_sd\n";
        const Eigen::VectorXd eta_sd = eta_obs.eta_sd();
        for (Eigen::Index i = 0; i < obs_y.size(); ++i)
            os << format_double(obs_x(i, 0)) << ',' << format_double(obs_y[i]) << ',' << format_double(at_obs.mean[i])
               << ',' << format_double(sd[i]) << ',' << format_double(eta_obs.eta_mean[i]) << ','
               << format_double(eta_sd[i]) << '\n';
    }
    {
        const auto fields = summarize_fields(samples, grid, 0);
        std::ofstream os(out_dir / "summary.csv");
        if (!os) throw std::runtime_error("cannot write " + (out_dir / "summary.csv").string());
        os << "x_unit";
        for (const auto& f : fields) os << ',' << f.name << "_mean," << f.name << "_sd";
        os << ",predictive_mean,predictive_sd\n";
        const Eigen::VectorXd psd = on_grid.sd();
        for (Eigen::Index i = 0; i < grid.rows(); ++i) {
            os << format_double(grid(i, 0));
            for (std::size_t f = 0; f < fields.size(); ++f) {
                const double scale = f < samples.delta.size() ? data.theta_bounds.at(f).width() : target.scale;
                os << ',' << format_double(fields[f].mean[i] * scale) << ',' << format_double(fields[f].sd[i] * scale);
            }
            os << ',' << format_double(on_grid.mean[i]) << ',' << format_double(psd[i]) << '\n';
        }
    }
    r.validate();
    return r;
}

RunReport orchestrate(const RunConfig& config) {
    const auto t0 = Clock::now();
    RunReport report;
    report.mode = to_string(config.mode);
    report.seed = config.mcmc.seed;

    const CalibrationDataset data = stage("dataset", [&] { return load_or_generate(config); });
    report.n_sim = data.simulations.size();
    report.n_obs = data.observations.size();
    stage("output", [&] {
        write_setup(config, data);
        return 0;
    });
    if (config.mode == RunMode::generate) {
        report.wall_seconds = seconds_since(t0);
        stage("output", [&] {
            write_text(config.output / "report.json", report_json(report));
            write_text(config.output / "timing.json", timing_json(report));
            return 0;
        });
        return report;
    }

    const auto emulator = stage("emulator", [&] { return build_emulator(config, data); });
    stage("output", [&] {
        write_text(config.output / "emulator.json", emulator_json(*emulator, config.emulator_bypass));
        return 0;
    });
    const CalibrationProblem problem = stage("calibration", [&] { return CalibrationProblem::from_dataset(data, emulator); });
    const auto truth = truth_curve(config, data);

    std::vector<RunMode> methods;
    if (config.mode == RunMode::compare) {
        methods = {RunMode::koh, RunMode::integrated_delta};
        if (config.combined) methods.push_back(RunMode::combined);
    } else {
        methods = {config.mode};
    }
    for (RunMode m : methods) {
        const auto t1 = Clock::now();
        log_info("running " + to_string(m));
        const PosteriorSamples samples = stage(to_string(m), [&] { return run_method(m, config, problem); });
        MethodReport r = stage("report", [&] {
            return score_method(samples, config, data, *emulator, truth, config.output / method_dir(m));
        });
        r.wall_seconds = seconds_since(t1);
        report.methods.push_back(std::move(r));
    }
    report.wall_seconds = seconds_since(t0);
    stage("output", [&] {
        write_text(config.output / "report.json", report_json(report));
        write_text(config.output / "timing.json", timing_json(report));
        return 0;
    });
    return report;
}

RunReport fit_emulator_only(const RunConfig& config) {
    const auto t0 = Clock::now();
    RunReport report;
    report.mode = "fit-emulator";
    report.seed = config.mcmc.seed;
    const CalibrationDataset data = stage("dataset", [&] { return load_or_generate(config); });
    report.n_sim = data.simulations.size();
    report.n_obs = data.observations.size();
    stage("output", [&] {
        write_setup(config, data);
        return 0;
    });
    const auto emulator = stage("emulator", [&] { return build_emulator(config, data); });
    report.wall_seconds = seconds_since(t0);
    stage("output", [&] {
        write_text(config.output / "emulator.json", emulator_json(*emulator, config.emulator_bypass));
        write_text(config.output / "report.json", report_json(report));
        write_text(config.output / "timing.json", timing_json(report));
        return 0;
    });
    return report;
}

}  // namespace driftcal
