#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/dataset.hpp"
#include "driftcal/mcmc.hpp"
#include "driftcal/posterior.hpp"
#include "driftcal/predictive.hpp"
#include "driftcal/samples.hpp"

namespace driftcal {

/// Scores of one calibration method; all output quantities in physical units.
struct MethodReport {
    std::string method;
    std::size_t draws = 0;
    /// Full predictive mean against the observations.
    double rmse = 0.0;
    /// Emulator-only mean against the observations: eta(x, theta*) for input-side fields,
    /// eta(x, theta_hat) at the posterior-mean theta for the additive model.
    double eta_rmse = 0.0;
    /// Fraction of observations within 2 predictive sd.
    double coverage = 0.0;
    /// Emulator-only mean against the noise-free truth on grid points with x <= 0.25
    /// (synthetic data only).
    std::optional<double> eta_rmse_truth_low_x;
    std::vector<std::pair<std::string, double>> acceptance;
    std::vector<std::pair<std::string, double>> rhat;
    std::vector<std::pair<std::string, double>> ess;
    ExtrapolationStats extrapolation;
    std::size_t audits = 0;
    double wall_seconds = 0.0;

    double max_rhat() const;
    /// Throws DomainError when a rate or coverage leaves [0,1].
    void validate() const;
};

struct RunReport {
    std::string mode;
    std::size_t n_sim = 0;
    std::size_t n_obs = 0;
    std::uint64_t seed = 0;
    std::vector<MethodReport> methods;
    double wall_seconds = 0.0;

    const MethodReport& method(const std::string& name) const;
};

inline constexpr const char* kRunFormatTag = "driftcal-run v1";

/// Root-mean-square difference; throws DimensionError on length mismatch.
double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Writes predictive_band.csv (x, mean, sd, +-1 and +-2 sd bands, emulator-only
/// columns) and one drift_<name>.csv per field (x, mean, sd, +-2 sd, trajectories),
/// all in physical units. Throws DomainError for empty samples.
void emit_plot_data(const PosteriorSamples& samples, const PredictiveSummary& predictive,
                    const Eigen::MatrixXd& grid, const CalibrationDataset& data, const Standardizer& target,
                    const std::filesystem::path& out_dir, std::size_t n_trajectories);

/// Split-R-hat and ESS for every scalar chain quantity (sigma2, log posterior,
/// hyperparameters, sampled theta, field values at knots).
void chain_diagnostics(const PosteriorSamples& samples, MethodReport& report);

/// Deterministic JSON (no timings) and a separate timing document.
std::string report_json(const RunReport& report);
std::string timing_json(const RunReport& report);
RunReport parse_report(const std::string& json_text);

/// Human-readable table of a report.
std::string format_report(const RunReport& report);

}  // namespace driftcal
