#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/dataset.hpp"
#include "driftcal/mcmc.hpp"
#include "driftcal/posterior.hpp"
#include "driftcal/simulator.hpp"

namespace driftcal {

enum class RunMode { koh, integrated_delta, combined, generate, compare };

std::string to_string(RunMode mode);

/// Synthetic dataset recipe: simulator, bounds, truth and observation plan.
struct SyntheticSpec {
    SyntheticSimulator simulator;
    std::vector<Interval> x_bounds;
    std::vector<Prior> theta_priors;   // physical units; drive the simulator design
    Eigen::VectorXd truth_theta;       // unit coordinates; empty means 0.5 everywhere
    std::vector<DriftFunction> drifts; // unit coordinates; empty means no drift
    std::size_t n_sim = 43;
    std::uint64_t design_seed = 0;
    std::uint64_t noise_seed = 0;
    ObservationPlan plan;

    DriftTruth truth() const;
    DesignSpec design() const;
};

struct CalibratorSettings {
    Eigen::VectorXd theta0;            // unit coordinates; empty means 0.5 everywhere
    bool sample_theta = false;
    std::size_t knot_refinement = 0;
};

struct PriorSettings {
    std::vector<Prior> theta;          // unit coordinates; empty means uniform(0,1)
    FieldPrior field;
    FieldPrior additive{Prior::log_normal_median(0.1, 1.5), Prior::log_normal_median(0.3, 0.5)};
    InverseGamma noise{2.0, 1e-3};

    CalibrationPriors build(std::size_t theta_dim) const;
};

struct ReportSettings {
    std::size_t grid_points = 101;
    std::size_t trajectories = 20;
};

struct RunConfig {
    RunMode mode = RunMode::integrated_delta;
    std::optional<std::filesystem::path> dataset;
    std::optional<SyntheticSpec> synthetic;
    EmulatorSettings emulator;
    /// Use the synthetic simulator itself in place of a GP emulator.
    bool emulator_bypass = false;
    PriorSettings priors;
    McmcConfig mcmc;
    std::optional<CalibratorSettings> koh;
    std::optional<CalibratorSettings> integrated_delta;
    std::optional<CalibratorSettings> combined;
    ReportSettings report;
    std::filesystem::path output = "driftcal-out";
    /// Normalised JSON of the effective configuration (overrides applied).
    std::string echo;

    /// Settings for a calibrator mode, with defaults when its block was omitted.
    CalibratorSettings calibrator(RunMode m) const;
};

/// Every violation found while parsing, each prefixed by its JSON path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output;
    std::optional<RunMode> mode;
};

/// Parses and validates a JSON run configuration (grammar in README.md).
/// Relative dataset paths are resolved against `base_dir`.
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {},
                       const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

std::optional<RunMode> parse_mode(std::string_view name);

}  // namespace driftcal
