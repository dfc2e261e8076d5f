#include "driftcal/discrepancy.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace driftcal {

namespace {

constexpr double kKnotMatch = 1e-12;
constexpr double kMaxRelativeJitter = 1e-4;

}  // namespace

DiscrepancyField::DiscrepancyField(Eigen::MatrixXd knots, double variance, double lengthscale)
    : DiscrepancyField(knots, Eigen::VectorXd::Zero(knots.rows()), variance, lengthscale) {}

DiscrepancyField::DiscrepancyField(Eigen::MatrixXd knots, Eigen::VectorXd values, double variance,
                                   double lengthscale)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.rows() != values_.size()) throw DimensionError("field knots and values differ in length");
    if (knots_.rows() < 1) throw DomainError("field needs at least one knot");
    set_hyper(variance, lengthscale);
}

KernelParams DiscrepancyField::kernel() const {
    return KernelParams::isotropic(variance_, lengthscale_, static_cast<std::size_t>(knots_.cols()),
                                   variance_ * jitter_);
}

void DiscrepancyField::set_values(Eigen::VectorXd values) {
    if (values.size() != knots_.rows()) throw DimensionError("field values have the wrong length");
    values_ = std::move(values);
    reweight();
}

void DiscrepancyField::set_hyper(double variance, double lengthscale) {
    if (!(variance > 0.0) || !(lengthscale > 0.0) || !std::isfinite(variance) || !std::isfinite(lengthscale))
        throw DomainError("field hyperparameters must be positive and finite");
    variance_ = variance;
    lengthscale_ = lengthscale;
    refactor();
    reweight();
}

void DiscrepancyField::refactor() {
    const auto unit = KernelParams::isotropic(1.0, lengthscale_, static_cast<std::size_t>(knots_.cols()));
    const Eigen::MatrixXd corr = build_covariance(knots_, unit);
    prior_ok_ = false;
    for (jitter_ = kFieldJitter; jitter_ <= kMaxRelativeJitter * (1.0 + 1e-12); jitter_ *= 10.0) {
        Eigen::MatrixXd k = corr;
        k.diagonal().array() += jitter_;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() != Eigen::Success) continue;
        Eigen::MatrixXd l = llt.matrixL();
        if ((l.diagonal().array() <= 0.0).any() || !l.allFinite()) continue;
        chol_ = std::sqrt(variance_) * l;
        prior_ok_ = true;
        return;
    }
    jitter_ = kMaxRelativeJitter;
    chol_ = Eigen::MatrixXd::Identity(knots_.rows(), knots_.rows()) * std::sqrt(variance_);
}

void DiscrepancyField::reweight() {
    if (!prior_ok_) {
        weights_ = Eigen::VectorXd::Zero(values_.size());
        return;
    }
    weights_ = chol_.triangularView<Eigen::Lower>().solve(values_);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(weights_);
}

Eigen::MatrixXd DiscrepancyField::prior_covariance() const { return chol_ * chol_.transpose(); }

double DiscrepancyField::log_prior() const {
    if (!prior_ok_) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(values_);
    const double n = static_cast<double>(values_.size());
    return -0.5 * z.squaredNorm() - chol_.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::Index DiscrepancyField::knot_index(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    for (Eigen::Index i = 0; i < knots_.rows(); ++i)
        if ((knots_.row(i) - x).cwiseAbs().maxCoeff() <= kKnotMatch) return i;
    return -1;
}

Eigen::VectorXd DiscrepancyField::condition_mean(const Eigen::MatrixXd& query) const {
    if (query.cols() != knots_.cols()) throw DimensionError("field query has the wrong dimension");
    const KernelParams latent = KernelParams::isotropic(variance_, lengthscale_, static_cast<std::size_t>(knots_.cols()));
    const Eigen::MatrixXd cross = build_covariance(query, knots_, latent);
    Eigen::VectorXd mean = cross * weights_;
    for (Eigen::Index q = 0; q < query.rows(); ++q) {
        const Eigen::Index k = knot_index(query.row(q));
        if (k >= 0) mean[q] = values_[k];
    }
    return mean;
}

void DiscrepancyField::condition(const Eigen::MatrixXd& query, Eigen::VectorXd& mean,
                                 Eigen::VectorXd& variance) const {
    if (query.cols() != knots_.cols()) throw DimensionError("field query has the wrong dimension");
    const KernelParams latent = KernelParams::isotropic(variance_, lengthscale_, static_cast<std::size_t>(knots_.cols()));
    const Eigen::MatrixXd cross = build_covariance(query, knots_, latent);
    mean = cross * weights_;
    const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(cross.transpose());
    variance.resize(query.rows());
    for (Eigen::Index q = 0; q < query.rows(); ++q) {
        variance[q] = std::max(0.0, variance_ - v.col(q).squaredNorm());
        const Eigen::Index k = knot_index(query.row(q));
        if (k >= 0) {
            mean[q] = values_[k];
            variance[q] = 0.0;
        }
    }
}

Eigen::VectorXd ThetaStar::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    Eigen::VectorXd t = base_theta;
    const Eigen::MatrixXd q = x;
    for (std::size_t k = 0; k < fields.size() && static_cast<Eigen::Index>(k) < t.size(); ++k)
        t[static_cast<Eigen::Index>(k)] += fields[k].condition_mean(q)[0];
    return t;
}

Eigen::VectorXd ThetaStar::at_knot(Eigen::Index i) const {
    Eigen::VectorXd t = base_theta;
    for (std::size_t k = 0; k < fields.size() && static_cast<Eigen::Index>(k) < t.size(); ++k)
        t[static_cast<Eigen::Index>(k)] += fields[k].values()[i];
    return t;
}

Eigen::MatrixXd make_knots(const Eigen::MatrixXd& obs_x, std::size_t refinement) {
    if (refinement == 0 || obs_x.cols() != 1) return obs_x;
    std::vector<double> extra;
    for (std::size_t i = 0; i < refinement; ++i) {
        const double u = refinement == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(refinement - 1);
        bool taken = false;
        for (Eigen::Index r = 0; r < obs_x.rows(); ++r) taken = taken || std::abs(obs_x(r, 0) - u) < 1e-6;
        if (!taken) extra.push_back(u);
    }
    Eigen::MatrixXd knots(obs_x.rows() + static_cast<Eigen::Index>(extra.size()), 1);
    knots.topRows(obs_x.rows()) = obs_x;
    for (std::size_t i = 0; i < extra.size(); ++i) knots(obs_x.rows() + static_cast<Eigen::Index>(i), 0) = extra[i];
    return knots;
}

}  // namespace driftcal
