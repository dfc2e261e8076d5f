#pragma once

#include <vector>

#include <Eigen/Dense>

#include "driftcal/gp.hpp"

namespace driftcal {

/// Diagonal jitter of a field's prior covariance, relative to its variance.
inline constexpr double kFieldJitter = 1e-8;

/// Zero-mean GP field represented by its values at a fixed set of knots.
///
/// The prior covariance at the knots is variance * (R(lengthscale) + jitter * I) with
/// R the unit squared-exponential correlation; its Cholesky factor is kept in sync
/// with the hyperparameters. Values elsewhere are obtained by noise-free conditioning.
class DiscrepancyField {
public:
    DiscrepancyField() = default;
    DiscrepancyField(Eigen::MatrixXd knots, double variance, double lengthscale);
    DiscrepancyField(Eigen::MatrixXd knots, Eigen::VectorXd values, double variance,
                     double lengthscale);

    const Eigen::MatrixXd& knots() const { return knots_; }
    const Eigen::VectorXd& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(knots_.rows()); }
    double variance() const { return variance_; }
    double lengthscale() const { return lengthscale_; }
    /// Kernel of the field including its relative jitter.
    KernelParams kernel() const;

    void set_values(Eigen::VectorXd values);
    void set_hyper(double variance, double lengthscale);

    /// False when the prior covariance could not be factored.
    bool prior_ok() const { return prior_ok_; }
    const Eigen::MatrixXd& prior_chol() const { return chol_; }
    Eigen::MatrixXd prior_covariance() const;

    /// log N(values | 0, K); -inf when the factorisation failed.
    double log_prior() const;

    /// Conditional mean at each query row. Rows that coincide with a knot return the
    /// stored knot value exactly.
    Eigen::VectorXd condition_mean(const Eigen::MatrixXd& query) const;
    /// Conditional mean and variance; variance is zero at knots.
    void condition(const Eigen::MatrixXd& query, Eigen::VectorXd& mean,
                   Eigen::VectorXd& variance) const;

private:
    void refactor();
    void reweight();
    Eigen::Index knot_index(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

    Eigen::MatrixXd knots_;
    Eigen::VectorXd values_;
    double variance_ = 1.0;
    double lengthscale_ = 1.0;
    double jitter_ = kFieldJitter;
    bool prior_ok_ = false;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd weights_;
};

/// theta*(x) = theta + delta(x), one field per calibration parameter.
struct ThetaStar {
    Eigen::VectorXd base_theta;
    std::vector<DiscrepancyField> fields;

    /// base_theta + [delta_1(x), ..., delta_d(x)]; missing fields count as zero.
    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    /// Same, at knot i of every field.
    Eigen::VectorXd at_knot(Eigen::Index i) const;
};

/// Knots at the observation inputs followed by `refinement` uniform points on [0,1]
/// (one-dimensional domains only) that are not already observation inputs.
Eigen::MatrixXd make_knots(const Eigen::MatrixXd& obs_x, std::size_t refinement);

}  // namespace driftcal
