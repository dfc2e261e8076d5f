#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "driftcal/config.hpp"
#include "driftcal/orchestrate.hpp"
#include "driftcal/predictive.hpp"
#include "driftcal/report.hpp"

using namespace driftcal;
namespace fs = std::filesystem;

namespace {

bool mentions(const ConfigError& e, const std::string& needle) {
    return std::any_of(e.problems().begin(), e.problems().end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

ConfigError config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "no ConfigError for " << text;
    return ConfigError({});
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("driftcal_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string small_compare(const fs::path& out) {
    return R"({
      "mode": "compare", "seed": 3,
      "synthetic": {
        "simulator": {"kind": "dipole"},
        "x_bounds": [[5, 40]],
        "theta_priors": [{"type": "uniform", "lo": 40, "hi": 60},
                         {"type": "uniform", "lo": 0.3, "hi": 0.4},
                         {"type": "uniform", "lo": 0.56, "hi": 2.88}],
        "drift": ["exp_decay -0.3 0.2", "exp_decay -0.25 0.25", "zero"],
        "n_sim": 43, "n_obs": 5, "noise_sd": 2.0
      },
      "emulator": {"budget": 60, "restarts": 0},
      "mcmc": {"iterations": 1200, "burn_in": 400, "thin": 4, "chains": 2},
      "koh": {}, "integrated_delta": {},
      "report": {"grid_points": 21, "trajectories": 3},
      "output": ")" + out.generic_string() + R"("
    })";
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream is(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        files[fs::relative(e.path(), dir).generic_string()] = ss.str();
    }
    return files;
}

std::vector<std::map<std::string, double>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) header.push_back(c);
    std::vector<std::map<std::string, double>> rows;
    while (std::getline(is, line)) {
        std::stringstream ls(line);
        std::map<std::string, double> row;
        std::size_t i = 0;
        for (std::string c; std::getline(ls, c, ','); ++i) row[header.at(i)] = std::stod(c);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST(ParseConfig, MinimalDefaults) {
    const auto c = parse_config(R"({"mode": "integrated_delta", "dataset": "data.csv"})", {}, "/base");
    EXPECT_EQ(c.mode, RunMode::integrated_delta);
    ASSERT_TRUE(c.dataset.has_value());
    EXPECT_EQ(*c.dataset, fs::path("/base/data.csv"));
    EXPECT_EQ(c.mcmc.iterations, 20000u);
    EXPECT_EQ(c.mcmc.burn_in, 5000u);
    EXPECT_EQ(c.mcmc.thin, 10u);
    EXPECT_EQ(c.mcmc.chains, 2u);
    EXPECT_EQ(c.mcmc.seed, 1u);
    EXPECT_EQ(c.mcmc.adapt_target, 0.3);
    EXPECT_EQ(c.report.grid_points, 101u);
    EXPECT_EQ(c.output, fs::path("driftcal-out"));
    const auto s = c.calibrator(RunMode::integrated_delta);
    EXPECT_FALSE(s.sample_theta);
    EXPECT_EQ(s.theta0.size(), 0);
    EXPECT_FALSE(c.echo.empty());
}

TEST(ParseConfig, BurnInNotBelowIterations) {
    const auto e =
        config_error(R"({"mode": "koh", "dataset": "d.csv", "mcmc": {"iterations": 100, "burn_in": 100}})");
    EXPECT_TRUE(mentions(e, "mcmc.burn_in"));
    EXPECT_TRUE(mentions(e, "mcmc.iterations"));
}

TEST(ParseConfig, CompareNeedsBothCalibrators) {
    const auto e = config_error(R"({"mode": "compare", "dataset": "d.csv", "integrated_delta": {}})");
    EXPECT_TRUE(mentions(e, "koh: required for mode compare"));
    EXPECT_FALSE(mentions(e, "integrated_delta: required"));
}

TEST(ParseConfig, EveryViolationReportedWithPath) {
    const auto e = config_error(R"({"mode": "koh", "dataset": "d.csv",
                                    "mcmc": {"iteratons": 5, "thin": 0},
                                    "priors": {"noise": {"shape": -1, "scale": 1}},
                                    "report": {"grid_points": 0}})");
    EXPECT_TRUE(mentions(e, "mcmc.iteratons: unknown key"));
    EXPECT_TRUE(mentions(e, "mcmc.thin"));
    EXPECT_TRUE(mentions(e, "priors.noise.shape"));
    EXPECT_TRUE(mentions(e, "report.grid_points"));
    EXPECT_GE(e.problems().size(), 4u);
}

TEST(ParseConfig, ModeRules) {
    EXPECT_TRUE(mentions(config_error(R"({"dataset": "d.csv"})"), "mode"));
    EXPECT_TRUE(mentions(config_error(R"({"mode": "fast", "dataset": "d.csv"})"), "unknown mode"));
    EXPECT_TRUE(mentions(config_error(R"({"mode": "koh"})"), "dataset"));
    EXPECT_TRUE(mentions(config_error(R"({"mode": "generate", "dataset": "d.csv"})"), "synthetic"));
    EXPECT_TRUE(mentions(config_error("{not json"), "malformed JSON"));
}

TEST(ParseConfig, PriorGrammar) {
    const auto c = parse_config(R"({"mode": "koh", "dataset": "d.csv",
        "priors": {"theta": [{"type": "normal", "mean": 0.5, "sd": 0.1}],
                   "field": {"variance": {"type": "lognormal", "median": 0.02, "sigma": 0.7}},
                   "noise": {"shape": 3, "scale": 0.01}}})");
    ASSERT_EQ(c.priors.theta.size(), 1u);
    EXPECT_NE(c.priors.theta[0].get_if<Normal>(), nullptr);
    EXPECT_NEAR(c.priors.field.variance.quantile(0.5), 0.02, 1e-12);
    EXPECT_EQ(c.priors.noise.shape, 3.0);
    EXPECT_TRUE(mentions(config_error(R"({"mode": "koh", "dataset": "d.csv",
        "priors": {"field": {"variance": {"type": "normal", "mean": 0, "sd": 1}}}})"), "positive"));
}

TEST(ParseConfig, OverridesApplied) {
    ConfigOverrides o;
    o.seed = 99;
    o.output = "elsewhere";
    o.mode = RunMode::koh;
    const auto c = parse_config(R"({"mode": "integrated_delta", "dataset": "d.csv", "seed": 4})", o);
    EXPECT_EQ(c.mcmc.seed, 99u);
    EXPECT_EQ(c.emulator.seed, 99u);
    EXPECT_EQ(c.output, fs::path("elsewhere"));
    EXPECT_EQ(c.mode, RunMode::koh);
    // the echo reproduces the effective configuration
    const auto again = parse_config(c.echo);
    EXPECT_EQ(again.mcmc.seed, 99u);
    EXPECT_EQ(again.mode, RunMode::koh);
    EXPECT_EQ(again.echo, c.echo);
}

TEST(Report, RmseHelper) {
    EXPECT_NEAR(rmse(Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(1.0, 4.0)), std::sqrt(2.0), 1e-15);
    EXPECT_THROW(rmse(Eigen::Vector2d(1.0, 2.0), Eigen::Vector3d(1.0, 2.0, 3.0)), DimensionError);
}

TEST(Report, JsonRoundTrip) {
    RunReport r;
    r.mode = "compare";
    r.seed = 5;
    r.n_sim = 43;
    r.n_obs = 5;
    MethodReport m;
    m.method = "koh";
    m.draws = 10;
    m.rmse = 1.25;
    m.eta_rmse = 3.5;
    m.coverage = 0.8;
    m.eta_rmse_truth_low_x = 4.0;
    m.acceptance = {{"theta", 0.31}};
    m.rhat = {{"sigma2", 1.01}};
    m.ess = {{"sigma2", 240.0}};
    r.methods.push_back(m);
    const auto text = report_json(r);
    const auto back = parse_report(text);
    EXPECT_EQ(report_json(back), text);
    EXPECT_EQ(back.method("koh").max_rhat(), 1.01);
    m.coverage = 1.5;
    r.methods = {m};
    EXPECT_THROW(report_json(r), DomainError);
}

class Pipeline : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = scratch("pipeline");
        report_ = orchestrate(parse_config(small_compare(dir_)));
        files_ = snapshot(dir_);
    }
    static fs::path dir_;
    static RunReport report_;
    static std::map<std::string, std::string> files_;
};
fs::path Pipeline::dir_;
RunReport Pipeline::report_;
std::map<std::string, std::string> Pipeline::files_;

TEST_F(Pipeline, RunDirectoryLayout) {
    for (const char* f : {"FORMAT", "config.json", "dataset.csv", "emulator.json", "report.json", "timing.json",
                          "koh/summary.csv", "koh/predictive_band.csv", "koh/predictive_obs.csv",
                          "koh/drift_delta_eta.csv", "koh/samples/FORMAT", "integrated_delta/drift_mu.csv",
                          "integrated_delta/drift_nu.csv", "integrated_delta/drift_l_c.csv",
                          "integrated_delta/samples/delta_mu.csv", "integrated_delta/samples/sigma2.csv"})
        EXPECT_TRUE(files_.count(f)) << f;
    EXPECT_EQ(files_.at("FORMAT"), std::string(kRunFormatTag) + "\n");
    ASSERT_EQ(report_.methods.size(), 2u);
    EXPECT_EQ(report_.methods[0].method, "koh");
    EXPECT_EQ(report_.methods[1].method, "integrated_delta");
    EXPECT_EQ(report_json(parse_report(files_.at("report.json"))), files_.at("report.json"));
}

TEST_F(Pipeline, ReportedRmseMatchesEmittedFiles) {
    for (const auto& m : report_.methods) {
        const auto rows = read_csv(dir_ / m.method / "predictive_obs.csv");
        ASSERT_EQ(rows.size(), 5u);
        double s = 0.0, se = 0.0;
        std::size_t covered = 0;
        for (const auto& r : rows) {
            s += std::pow(r.at("mean") - r.at("y"), 2);
            se += std::pow(r.at("eta_mean") - r.at("y"), 2);
            covered += std::abs(r.at("mean") - r.at("y")) <= 2.0 * r.at("sd") ? 1 : 0;
        }
        EXPECT_NEAR(m.rmse, std::sqrt(s / 5.0), 1e-12) << m.method;
        EXPECT_NEAR(m.eta_rmse, std::sqrt(se / 5.0), 1e-12) << m.method;
        EXPECT_EQ(m.coverage, covered / 5.0);
    }
}

TEST_F(Pipeline, PlotFilesHaveGridRowsAndTrajectories) {
    const auto band = read_csv(dir_ / "integrated_delta" / "predictive_band.csv");
    ASSERT_EQ(band.size(), 21u);
    for (const auto& r : band) {
        EXPECT_NEAR(r.at("upper2") - r.at("mean"), 2.0 * r.at("sd"), 1e-9 * std::max(1.0, std::abs(r.at("mean"))));
        EXPECT_LE(r.at("lower2"), r.at("lower1"));
    }
    const auto drift = read_csv(dir_ / "integrated_delta" / "drift_mu.csv");
    ASSERT_EQ(drift.size(), 21u);
    EXPECT_TRUE(drift.front().count("draw2"));
    EXPECT_FALSE(drift.front().count("draw3"));
}

TEST_F(Pipeline, RerunFromEchoIsByteIdentical) {
    fs::remove_all(dir_);
    orchestrate(parse_config(files_.at("config.json")));
    const auto again = snapshot(dir_);
    ASSERT_EQ(again.size(), files_.size());
    for (const auto& [name, text] : files_) {
        if (name == "timing.json") continue;
        EXPECT_EQ(again.at(name), text) << name;
    }
}

TEST(Orchestrate, GenerateWritesFortyEightRecords) {
    const fs::path dir = scratch("generate");
    std::string text = small_compare(dir);
    text.replace(text.find("\"compare\""), 9, "\"generate\"");
    orchestrate(parse_config(text));
    std::ifstream is(dir / "dataset.csv");
    std::size_t records = 0;
    std::string line;
    while (std::getline(is, line))
        if (line.rfind("sim,", 0) == 0 || line.rfind("obs,", 0) == 0) ++records;
    EXPECT_EQ(records, 48u);
    EXPECT_FALSE(fs::exists(dir / "emulator.json"));
}

TEST(Orchestrate, StageTaggedErrors) {
    const fs::path dir = scratch("stage");
    const auto c = parse_config(R"({"mode": "koh", "dataset": "/nonexistent/file.csv", "output": ")" +
                                dir.generic_string() + "\"}");
    try {
        orchestrate(c);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "dataset");
        EXPECT_EQ(std::string(e.what()).rfind("[dataset]", 0), 0u);
    }
}

TEST(EmitPlotData, GuardsAndDegenerateGrid) {
    const fs::path dir = scratch("emit");
    auto config = parse_config(small_compare(dir));
    config.mode = RunMode::integrated_delta;
    config.mcmc.iterations = 600;
    config.mcmc.burn_in = 200;
    config.mcmc.chains = 1;
    const auto data = load_or_generate(config);
    const auto emulator = build_emulator(config, data);
    const auto problem = CalibrationProblem::from_dataset(data, emulator);
    const auto samples = run_method(RunMode::integrated_delta, config, problem);

    const Eigen::MatrixXd one = uniform_grid(1);
    const auto pred = posterior_predictive(samples, *emulator, one);
    emit_plot_data(samples, pred, one, data, emulator->target_transform(), dir / "one", 4);
    EXPECT_EQ(read_csv(dir / "one" / "predictive_band.csv").size(), 1u);
    EXPECT_EQ(read_csv(dir / "one" / "drift_nu.csv").size(), 1u);

    PosteriorSamples empty = samples;
    empty.sigma2.resize(0);
    EXPECT_THROW(emit_plot_data(empty, pred, one, data, emulator->target_transform(), dir / "empty", 4), DomainError);
    EXPECT_FALSE(fs::exists(dir / "empty" / "predictive_band.csv"));
}
