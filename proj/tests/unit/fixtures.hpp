#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "driftcal/posterior.hpp"

namespace driftcal::testing {

/// Exact emulator over unit inputs [x, theta...] in identity-standardized units.
inline std::shared_ptr<const Emulator> exact_emulator(std::size_t dim,
                                                      std::function<double(std::span<const double>)> f) {
    return std::make_shared<FunctionEmulator>(dim, std::move(f));
}

/// One-dimensional x, observations y_i at x_i, given emulator.
inline CalibrationProblem make_problem(const std::vector<double>& x, const std::vector<double>& y,
                                       std::shared_ptr<const Emulator> emulator, std::size_t theta_dim) {
    CalibrationProblem p;
    p.obs_x.resize(static_cast<Eigen::Index>(x.size()), 1);
    p.obs_y.resize(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        p.obs_x(static_cast<Eigen::Index>(i), 0) = x[i];
        p.obs_y[static_cast<Eigen::Index>(i)] = y[i];
    }
    p.emulator = std::move(emulator);
    p.theta_dim = theta_dim;
    for (std::size_t k = 0; k < theta_dim; ++k) p.theta_names.push_back("t" + std::to_string(k + 1));
    return p;
}

inline std::vector<double> uniform_points(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

/// eta(x, t) = 2 t + 0.5 x on a single calibration parameter.
inline double linear_eta(double x, double t) { return 2.0 * t + 0.5 * x; }

/// Linear testbed with observations at theta(x) = 0.5 + drift(x), no noise.
inline CalibrationProblem linear_testbed(std::size_t n_obs, const std::function<double(double)>& drift) {
    const auto x = uniform_points(n_obs);
    std::vector<double> y;
    for (double xi : x) y.push_back(linear_eta(xi, 0.5 + drift(xi)));
    return make_problem(x, y, exact_emulator(2, [](std::span<const double> u) { return linear_eta(u[0], u[1]); }), 1);
}

inline double sample_mean(const Eigen::VectorXd& v) { return v.mean(); }

inline double sample_var(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

inline Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& rows) {
    const Eigen::RowVectorXd m = rows.colwise().mean();
    const Eigen::MatrixXd c = rows.rowwise() - m;
    return c.transpose() * c / static_cast<double>(rows.rows() - 1);
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace driftcal::testing
