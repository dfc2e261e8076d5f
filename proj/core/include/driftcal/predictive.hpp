#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/posterior.hpp"
#include "driftcal/samples.hpp"

namespace driftcal {

/// n evenly spaced points on [0,1] as an n x 1 matrix; n = 1 gives the single point 0.5.
Eigen::MatrixXd uniform_grid(std::size_t n);

/// Pointwise posterior of one field on a grid, in the field's own units.
struct FieldSummary {
    std::string name;
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;            // includes the conditional variance between knots
    Eigen::MatrixXd trajectories;  // N x G conditional means of evenly spaced draws
};

/// Summaries of every delta_theta field (and the additive field, last, when present).
std::vector<FieldSummary> summarize_fields(const PosteriorSamples& samples, const Eigen::MatrixXd& grid,
                                           std::size_t n_trajectories = 20);

/// Posterior predictive on a grid, in physical output units.
struct PredictiveSummary {
    Eigen::VectorXd mean;           // eta(x, theta*(x)) [+ delta_eta(x)]
    Eigen::VectorXd variance;       // spread over draws + emulator + additive + noise
    Eigen::VectorXd eta_mean;       // emulator part only, averaged over draws
    Eigen::VectorXd eta_variance;   // spread over draws + emulator variance

    Eigen::VectorXd sd() const { return variance.array().sqrt(); }
    Eigen::VectorXd eta_sd() const { return eta_variance.array().sqrt(); }
};

/// Monte-Carlo predictive: for each draw, fields are conditioned on their knot values,
/// the emulator is queried at (x, theta + delta(x)), and the additive field and noise
/// are added. Throws DomainError for empty samples.
PredictiveSummary posterior_predictive(const PosteriorSamples& samples, const Emulator& emulator,
                                       const Eigen::MatrixXd& grid);

/// Emulator mean and variance at a fixed unit theta, in physical output units.
PredictiveSummary emulator_at_theta(const Emulator& emulator, const Eigen::MatrixXd& grid,
                                    const Eigen::VectorXd& theta_unit);

/// Posterior mean of the base theta (unit coordinates).
Eigen::VectorXd posterior_mean_theta(const PosteriorSamples& samples);

}  // namespace driftcal
