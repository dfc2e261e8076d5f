#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/gp.hpp"
#include "driftcal/mcmc.hpp"

namespace driftcal {

struct CalibrationDataset;

/// Stored draws of one GP field: knot values and (variance, lengthscale).
struct FieldDraws {
    std::string name;
    Eigen::MatrixXd values;  // T x K
    Eigen::MatrixXd hyper;   // T x 2
};

/// Thinned post-burn-in draws of every chain, concatenated in chain order.
struct PosteriorSamples {
    std::string method;
    Eigen::MatrixXd knots;                 // K x Dx, unit coordinates
    std::vector<std::string> theta_names;
    std::vector<FieldDraws> delta;         // one per calibration parameter, unit-theta units
    std::optional<FieldDraws> additive;    // standardized output units
    Eigen::MatrixXd theta;                 // T x Dtheta, unit coordinates
    Eigen::VectorXd sigma2;                // standardized output units
    Eigen::VectorXd log_post;
    std::vector<std::size_t> chain_lengths;
    std::vector<std::pair<std::string, double>> acceptance;  // post burn-in, pooled over chains
    std::vector<double> final_steps;       // per block, averaged over chains
    ExtrapolationStats extrapolation;
    std::size_t audits = 0;

    std::size_t draws() const { return static_cast<std::size_t>(sigma2.size()); }
    /// T x (2 * Dtheta): variance then lengthscale for each field.
    Eigen::MatrixXd hyper_draws() const;
    /// Throws DomainError when array lengths disagree or rates leave [0,1].
    void validate() const;
    /// Splits a length-T column into per-chain sequences.
    std::vector<std::vector<double>> by_chain(const Eigen::VectorXd& column) const;
    double acceptance_rate(const std::string& block) const;

    /// Concatenates chains; all inputs must share layout and knots.
    static PosteriorSamples merge(const std::vector<PosteriorSamples>& chains);
};

inline constexpr const char* kSamplesFormatTag = "driftcal-samples v1";

/// Writes one delimited file per quantity:
///   FORMAT, knots.csv, delta_<name>.csv, hyper.csv, theta.csv, sigma2.csv,
///   additive.csv (when present), acceptance.csv.
/// Physical conversions use the dataset bounds and the emulator's output transform.
void write_samples(const std::filesystem::path& dir, const PosteriorSamples& samples,
                   const CalibrationDataset& data, const Standardizer& target);

}  // namespace driftcal
