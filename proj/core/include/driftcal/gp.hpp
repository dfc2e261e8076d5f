#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace driftcal {

/// Thrown when matrix/vector shapes disagree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown for parameters outside their mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when a kernel matrix cannot be factored even after nugget escalation.
class SingularKernelError : public std::runtime_error {
public:
    SingularKernelError(const std::string& what, double nugget)
        : std::runtime_error(what), nugget_(nugget) {}
    double nugget() const noexcept { return nugget_; }

private:
    double nugget_;
};

/// Anisotropic squared-exponential kernel hyperparameters.
///
///   k(a, b) = variance_scale * exp(-sum_d ((a_d - b_d) / lengthscale_d)^2)
///
/// variance_scale is the reciprocal of a marginal precision; lengthscales play the
/// role of correlation lengths. nugget is added to the diagonal of self-covariances.
struct KernelParams {
    double variance_scale = 1.0;
    Eigen::VectorXd lengthscales;
    double nugget = 0.0;

    static KernelParams isotropic(double variance, double lengthscale, std::size_t dim,
                                  double nugget = 0.0);

    std::size_t dim() const { return static_cast<std::size_t>(lengthscales.size()); }

    /// Throws DomainError unless variance_scale > 0, lengthscales > 0, nugget >= 0.
    void validate() const;
};

/// Affine map between raw target units and the zero-mean unit-variance space.
struct Standardizer {
    double offset = 0.0;
    double scale = 1.0;

    static Standardizer fit(const Eigen::VectorXd& y);
    static Standardizer identity() { return {}; }

    double forward(double y) const { return (y - offset) / scale; }
    double inverse(double z) const { return z * scale + offset; }
    Eigen::VectorXd forward(const Eigen::VectorXd& y) const;
    Eigen::VectorXd inverse(const Eigen::VectorXd& z) const;
};

/// Inputs are expected in [0,1] per column; targets are stored standardized.
struct TrainingSet {
    Eigen::MatrixXd inputs;   // N x D
    Eigen::VectorXd targets;  // standardized
    Standardizer transform;

    /// Standardizes raw targets and keeps the transform.
    static TrainingSet from_raw(Eigen::MatrixXd inputs, const Eigen::VectorXd& raw_targets);

    std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(inputs.cols()); }
};

struct PredictiveDistribution {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
    std::optional<Eigen::MatrixXd> covariance;
};

/// Mean and variance of a single query in standardized units.
struct PointPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Fitted GP. Immutable after construction and safe to share across threads.
class GPModel {
public:
    GPModel(KernelParams params, TrainingSet train, Eigen::MatrixXd chol, Eigen::VectorXd alpha);

    const KernelParams& params() const { return params_; }
    const TrainingSet& train() const { return train_; }
    /// Lower-triangular factor of K + nugget*I, with the nugget actually used.
    const Eigen::MatrixXd& chol() const { return chol_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double nugget() const { return params_.nugget; }

    /// Standardized-unit prediction at one point; no allocation beyond two N-vectors.
    PointPrediction predict_standardized(std::span<const double> x) const;

private:
    KernelParams params_;
    TrainingSet train_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
};

/// Cross covariance between the rows of a and b. Never adds the nugget.
Eigen::MatrixXd build_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelParams& params);

/// Self covariance of the rows of a with the nugget on the diagonal.
Eigen::MatrixXd build_covariance(const Eigen::MatrixXd& a, const KernelParams& params);

/// Nugget escalation ladder used by fit_gp.
inline constexpr double kNuggetCeiling = 1e-4;
inline constexpr double kNuggetGrowth = 10.0;

/// Factor and solve. A positive nugget is multiplied by 10 on Cholesky failure
/// until it exceeds 1e-4; a zero nugget is never escalated.
GPModel fit_gp(const TrainingSet& train, const KernelParams& params);

/// Predictions are returned in raw target units.
PredictiveDistribution predict(const GPModel& model, const Eigen::MatrixXd& query,
                               bool want_cov = false);

/// Log evidence of the standardized targets.
double log_marginal_likelihood(const GPModel& model);

struct OptimizerOptions {
    std::size_t budget = 200;   // objective evaluations per start
    std::size_t restarts = 2;   // extra jittered starts
    std::uint64_t seed = 0;
    double min_log_variance = -14.0;
    double max_log_variance = 7.0;
    double min_log_lengthscale = -7.0;
    double max_log_lengthscale = 4.0;
};

/// Nelder-Mead on log(variance_scale) and log(lengthscales); the nugget is held fixed.
/// The returned parameters never have lower evidence than init.
KernelParams optimize_emulator(const TrainingSet& train, const KernelParams& init,
                               const OptimizerOptions& options);

KernelParams optimize_emulator(const TrainingSet& train, const KernelParams& init,
                               std::size_t budget);

namespace detail {

struct SimplexResult {
    Eigen::VectorXd argmin;
    double value;
    std::size_t evaluations;
};

/// Bounded Nelder-Mead minimiser; points are clamped into [lower, upper].
template <typename F>
SimplexResult nelder_mead(F&& objective, const Eigen::VectorXd& start, double initial_step,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          std::size_t budget);

}  // namespace detail

}  // namespace driftcal

#include "driftcal/detail/nelder_mead.ipp"
