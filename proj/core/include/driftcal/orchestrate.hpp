#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "driftcal/config.hpp"
#include "driftcal/dataset.hpp"
#include "driftcal/posterior.hpp"
#include "driftcal/report.hpp"
#include "driftcal/samples.hpp"

namespace driftcal {

/// Failure of one pipeline stage; what() is prefixed with "[stage]".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Reads the configured dataset or generates the synthetic one.
CalibrationDataset load_or_generate(const RunConfig& config);

/// GP emulator trained on the dataset, or the simulator itself when bypassed.
std::shared_ptr<const Emulator> build_emulator(const RunConfig& config, const CalibrationDataset& data);

/// Noise-free truth y(x) on the unit domain for synthetic configurations.
std::optional<std::function<double(double)>> truth_curve(const RunConfig& config, const CalibrationDataset& data);

/// Runs one calibrator on a prepared problem.
PosteriorSamples run_method(RunMode method, const RunConfig& config, const CalibrationProblem& problem);

/// Predictive scoring, plot data and sample files of one method under out_dir/<method>.
MethodReport score_method(const PosteriorSamples& samples, const RunConfig& config, const CalibrationDataset& data,
                          const Emulator& emulator,
                          const std::optional<std::function<double(double)>>& truth,
                          const std::filesystem::path& out_dir);

/// Full pipeline: dataset, emulator, calibrators, predictive, files, report.
/// Output directory layout:
///   FORMAT, config.json, dataset.csv, emulator.json, report.json, timing.json,
///   <method>/{summary.csv, predictive_band.csv, predictive_obs.csv, drift_<name>.csv, samples/}
RunReport orchestrate(const RunConfig& config);

/// Dataset and emulator stages only.
RunReport fit_emulator_only(const RunConfig& config);

}  // namespace driftcal
