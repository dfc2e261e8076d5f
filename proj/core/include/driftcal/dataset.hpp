#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/bisection.hpp"
#include "driftcal/design.hpp"
#include "driftcal/simulator.hpp"

namespace driftcal {

struct Observation {
    Eigen::VectorXd x;
    double y = 0.0;
};

struct SimulationRun {
    Eigen::VectorXd x;
    Eigen::VectorXd theta;
    double y = 0.0;
};

/// Observations and simulator runs in physical units, plus the bounds that define the
/// unit cube used by the emulator.
struct CalibrationDataset {
    std::vector<std::string> x_names;
    std::vector<std::string> theta_names;
    std::vector<Interval> domain_bounds;
    std::vector<Interval> theta_bounds;
    std::vector<Observation> observations;
    std::vector<SimulationRun> simulations;
    /// Present for synthetic data; used only for scoring.
    std::optional<DriftTruth> truth;

    std::size_t x_dim() const { return domain_bounds.size(); }
    std::size_t theta_dim() const { return theta_bounds.size(); }

    /// Throws DomainError when any invariant fails.
    void validate() const;

    Eigen::MatrixXd obs_inputs_unit() const;     // n_obs x Dx
    Eigen::VectorXd obs_targets() const;
    Eigen::MatrixXd sim_inputs_unit() const;     // n_sim x (Dx + Dtheta)
    Eigen::VectorXd sim_targets() const;

    Eigen::VectorXd theta_to_unit(const Eigen::VectorXd& theta) const;
    Eigen::VectorXd theta_from_unit(const Eigen::VectorXd& unit) const;
    Eigen::VectorXd x_to_unit(const Eigen::VectorXd& x) const;
    Eigen::VectorXd x_from_unit(const Eigen::VectorXd& unit) const;
};

enum class ObservationLayout { uniform, lhs };

struct ObservationPlan {
    std::size_t n_obs = 5;
    ObservationLayout layout = ObservationLayout::uniform;
    double noise_sd = 0.0;
    /// When set, simulator outputs are found by a halving search against the analytic
    /// value, quantised at the search resolution.
    std::optional<CriticalSearchSpec> bisection;
};

/// Finite theta bounds implied by a prior: the interval for uniform priors, the
/// 0.1% / 99.9% quantiles otherwise.
Interval prior_bounds(const Prior& p);

/// Simulator runs on an LHS over (x, theta) and observations at theta_true(x) plus noise.
/// design.n_samples is the number of simulator runs; design.seed drives the LHS and
/// `seed` drives observation noise and observation placement.
CalibrationDataset generate_dataset(const SyntheticSimulator& sim, const DesignSpec& design,
                                    const DriftTruth& truth, const ObservationPlan& plan,
                                    std::uint64_t seed);

/// Delimited text format, version 1:
///
///   # driftcal-dataset v1
///   # x_bounds: lo hi[; lo hi ...]
///   # theta_bounds: lo hi[; lo hi ...]
///   # truth_theta0: t1 t2 ...                  (optional)
///   # truth_drift: zero; exp_decay a l; ...    (optional)
///   role,x.<name>...,theta.<name>...,y
///   sim,<x...>,<theta...>,<y>
///   obs,<x...>,,...,<y>                        (theta cells empty)
inline constexpr const char* kDatasetFormatTag = "driftcal-dataset v1";

void write_dataset(std::ostream& os, const CalibrationDataset& data);
void write_dataset(const std::filesystem::path& path, const CalibrationDataset& data);
CalibrationDataset read_dataset(std::istream& is);
CalibrationDataset read_dataset(const std::filesystem::path& path);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace driftcal
