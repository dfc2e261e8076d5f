#include "driftcal/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace driftcal {

KernelParams KernelParams::isotropic(double variance, double lengthscale, std::size_t dim,
                                     double nugget) {
    KernelParams p;
    p.variance_scale = variance;
    p.lengthscales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), lengthscale);
    p.nugget = nugget;
    return p;
}

void KernelParams::validate() const {
    if (!(variance_scale > 0.0) || !std::isfinite(variance_scale))
        throw DomainError("kernel variance_scale must be positive and finite");
    if (lengthscales.size() == 0) throw DomainError("kernel needs at least one lengthscale");
    for (Eigen::Index d = 0; d < lengthscales.size(); ++d)
        if (!(lengthscales[d] > 0.0) || !std::isfinite(lengthscales[d]))
            throw DomainError("kernel lengthscale " + std::to_string(d) + " must be positive");
    if (!(nugget >= 0.0) || !std::isfinite(nugget))
        throw DomainError("kernel nugget must be non-negative");
}

Standardizer Standardizer::fit(const Eigen::VectorXd& y) {
    Standardizer s;
    if (y.size() == 0) return s;
    s.offset = y.mean();
    const double var = (y.array() - s.offset).square().mean();
    const double sd = std::sqrt(var);
    // flat targets keep unit scale so the transform stays invertible
    s.scale = (sd > 1e-300 && std::isfinite(sd)) ? sd : 1.0;
    return s;
}

Eigen::VectorXd Standardizer::forward(const Eigen::VectorXd& y) const {
    return (y.array() - offset) / scale;
}

Eigen::VectorXd Standardizer::inverse(const Eigen::VectorXd& z) const {
    return z.array() * scale + offset;
}

TrainingSet TrainingSet::from_raw(Eigen::MatrixXd inputs, const Eigen::VectorXd& raw_targets) {
    if (inputs.rows() != raw_targets.size())
        throw DimensionError("training inputs and targets have different lengths");
    if (inputs.rows() < 1) throw DomainError("training set needs at least one point");
    TrainingSet t;
    t.transform = Standardizer::fit(raw_targets);
    t.targets = t.transform.forward(raw_targets);
    t.inputs = std::move(inputs);
    return t;
}

namespace {

void check_dims(Eigen::Index cols, const KernelParams& params, const char* what) {
    if (cols != params.lengthscales.size()) {
        std::ostringstream os;
        os << what << ": input has " << cols << " columns but kernel has "
           << params.lengthscales.size() << " lengthscales";
        throw DimensionError(os.str());
    }
}

// Returns false when the factor is numerically singular.
bool factor(const Eigen::MatrixXd& k, Eigen::MatrixXd& lower) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return false;
    lower = llt.matrixL();
    const double floor = static_cast<double>(k.rows()) * std::numeric_limits<double>::epsilon() *
                         k.diagonal().maxCoeff();
    for (Eigen::Index i = 0; i < lower.rows(); ++i) {
        const double d = lower(i, i);
        if (!std::isfinite(d) || d * d <= floor) return false;
    }
    return true;
}

}  // namespace

Eigen::MatrixXd build_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const KernelParams& params) {
    params.validate();
    check_dims(a.cols(), params, "build_covariance(a)");
    check_dims(b.cols(), params, "build_covariance(b)");
    const Eigen::RowVectorXd inv_ls = params.lengthscales.cwiseInverse().transpose();
    const Eigen::MatrixXd as = a.array().rowwise() * inv_ls.array();
    const Eigen::MatrixXd bs = b.array().rowwise() * inv_ls.array();
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            k(i, j) = params.variance_scale * std::exp(-(as.row(i) - bs.row(j)).squaredNorm());
    return k;
}

Eigen::MatrixXd build_covariance(const Eigen::MatrixXd& a, const KernelParams& params) {
    Eigen::MatrixXd k = build_covariance(a, a, params);
    // exact symmetry
    for (Eigen::Index j = 0; j < k.cols(); ++j)
        for (Eigen::Index i = j + 1; i < k.rows(); ++i) k(j, i) = k(i, j);
    k.diagonal().array() += params.nugget;
    return k;
}

GPModel::GPModel(KernelParams params, TrainingSet train, Eigen::MatrixXd chol,
                 Eigen::VectorXd alpha)
    : params_(std::move(params)),
      train_(std::move(train)),
      chol_(std::move(chol)),
      alpha_(std::move(alpha)) {}

PointPrediction GPModel::predict_standardized(std::span<const double> x) const {
    const auto n = train_.inputs.rows();
    const auto d = train_.inputs.cols();
    if (static_cast<Eigen::Index>(x.size()) != d)
        throw DimensionError("query dimension " + std::to_string(x.size()) +
                             " does not match training dimension " + std::to_string(d));
    Eigen::VectorXd kstar(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double z = (train_.inputs(i, j) - x[static_cast<std::size_t>(j)]) /
                             params_.lengthscales[j];
            s += z * z;
        }
        kstar[i] = params_.variance_scale * std::exp(-s);
    }
    PointPrediction p;
    p.mean = kstar.dot(alpha_);
    chol_.triangularView<Eigen::Lower>().solveInPlace(kstar);
    p.variance = std::max(0.0, params_.variance_scale - kstar.squaredNorm());
    return p;
}

GPModel fit_gp(const TrainingSet& train, const KernelParams& params) {
    params.validate();
    if (train.inputs.rows() < 1) throw DomainError("fit_gp: empty training set");
    if (train.inputs.rows() != train.targets.size())
        throw DimensionError("fit_gp: inputs and targets have different lengths");
    check_dims(train.inputs.cols(), params, "fit_gp");

    KernelParams p = params;
    const Eigen::MatrixXd base = build_covariance(train.inputs, train.inputs, params);
    Eigen::MatrixXd lower;
    for (;;) {
        Eigen::MatrixXd k = base;
        k.diagonal().array() += p.nugget;
        if (factor(k, lower)) break;
        const double next = p.nugget * kNuggetGrowth;
        if (p.nugget <= 0.0 || next > kNuggetCeiling * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "kernel matrix is not positive definite at nugget " << p.nugget;
            throw SingularKernelError(os.str(), p.nugget);
        }
        p.nugget = next;
    }
    Eigen::VectorXd alpha = lower.triangularView<Eigen::Lower>().solve(train.targets);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);
    // one step of iterative refinement, residual accumulated in long double
    Eigen::VectorXd resid(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        long double r = train.targets[i] - static_cast<long double>(p.nugget) * alpha[i];
        for (Eigen::Index j = 0; j < alpha.size(); ++j) r -= static_cast<long double>(base(i, j)) * alpha[j];
        resid[i] = static_cast<double>(r);
    }
    lower.triangularView<Eigen::Lower>().solveInPlace(resid);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(resid);
    alpha += resid;
    return GPModel(std::move(p), train, std::move(lower), std::move(alpha));
}

PredictiveDistribution predict(const GPModel& model, const Eigen::MatrixXd& query,
                               bool want_cov) {
    if (query.cols() != static_cast<Eigen::Index>(model.train().dim()))
        throw DimensionError("predict: query has " + std::to_string(query.cols()) +
                             " columns, model expects " + std::to_string(model.train().dim()));
    const Eigen::MatrixXd kq = build_covariance(model.train().inputs, query, model.params());
    const Eigen::MatrixXd v = model.chol().triangularView<Eigen::Lower>().solve(kq);
    const auto& tf = model.train().transform;

    PredictiveDistribution out;
    out.mean = tf.inverse(Eigen::VectorXd(kq.transpose() * model.alpha()));
    const double s2 = tf.scale * tf.scale;
    out.variance.resize(query.rows());
    for (Eigen::Index j = 0; j < query.rows(); ++j)
        out.variance[j] =
            std::max(0.0, model.params().variance_scale - v.col(j).squaredNorm()) * s2;
    if (want_cov) {
        KernelParams latent = model.params();
        latent.nugget = 0.0;
        Eigen::MatrixXd cov = build_covariance(query, latent) - v.transpose() * v;
        cov *= s2;
        cov.diagonal() = out.variance;
        out.covariance = std::move(cov);
    }
    return out;
}

double log_marginal_likelihood(const GPModel& model) {
    const auto& y = model.train().targets;
    const double n = static_cast<double>(y.size());
    return -0.5 * y.dot(model.alpha()) - model.chol().diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace driftcal
