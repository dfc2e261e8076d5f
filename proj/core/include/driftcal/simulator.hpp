#pragma once

#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/design.hpp"

namespace driftcal {

/// Critical stress of an edge dipole in a continuum elastic picture.
///
///   tau(h; mu, nu, l_c) = A * mu / ((1 - nu) h) * (1 - w * l_c^2 / (h^2 + l_c^2))
///
/// The first factor is the 1/h far-field term; the bracket is a bounded core-spreading
/// correction that vanishes for h >> l_c. w = 0 switches the correction off.
/// x = (h), theta = (mu, nu, l_c).
struct AnalyticDipole {
    double amplitude = 100.0 / (2.0 * std::numbers::pi);
    double core_weight = 1.0;

    double leading_term(double h, double mu, double nu) const;
    double core_correction(double h, double mu, double nu, double lc) const;
};

/// f(x, theta) = c0 + cx * x0 + sum_k (a_k + b_k * x0) theta_k + q_k theta_k^2
/// where x0 is the first domain coordinate.
struct DriftTestbed {
    double constant = 0.0;
    double x_coeff = 0.0;
    std::vector<double> linear;
    std::vector<double> x_linear;
    std::vector<double> quadratic;
};

/// Externally computed (x, theta, y) triples, looked up by exact match.
struct UserTable {
    Eigen::MatrixXd inputs;   // rows are [x..., theta...]
    Eigen::VectorXd outputs;
    double match_tolerance = 1e-9;
};

/// Deterministic stand-in for an expensive simulator.
struct SyntheticSimulator {
    std::variant<AnalyticDipole, DriftTestbed, UserTable> model;
    /// Optional declared domain; checked only when allow_extrapolation is false.
    std::vector<Interval> x_domain;
    std::vector<Interval> theta_domain;
    bool allow_extrapolation = true;

    std::string kind() const;
    /// Number of calibration parameters the model expects, 0 when unconstrained.
    std::size_t theta_dim() const;
};

/// Throws DomainError for non-finite inputs, inputs outside a declared domain when
/// extrapolation is disabled, and physically meaningless dipole inputs.
double eval_simulator(const SyntheticSimulator& sim, std::span<const double> x,
                      std::span<const double> theta);

double eval_simulator(const SyntheticSimulator& sim, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& theta);

struct ZeroDrift {};
/// amplitude * exp(-x / length)
struct ExpDecayDrift {
    double amplitude = 0.0;
    double length = 1.0;
};
/// intercept + slope * x
struct LinearDrift {
    double intercept = 0.0;
    double slope = 0.0;
};

/// Ground-truth drift of one calibration parameter, in unit-theta coordinates as a
/// function of the unit application-domain coordinate.
struct DriftFunction {
    std::variant<ZeroDrift, ExpDecayDrift, LinearDrift> shape;

    double operator()(double x_unit) const;
    std::string describe() const;
    static DriftFunction parse(const std::string& text);
};

/// theta_true(x) = theta0 + d(x), all in unit-theta coordinates.
struct DriftTruth {
    Eigen::VectorXd theta0;
    std::vector<DriftFunction> drifts;

    Eigen::VectorXd theta_unit(double x_unit) const;
};

}  // namespace driftcal
