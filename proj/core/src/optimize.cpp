#include <cmath>
#include <limits>
#include <random>

#include "driftcal/gp.hpp"

namespace driftcal {

namespace {

Eigen::VectorXd pack(const KernelParams& p) {
    Eigen::VectorXd u(p.lengthscales.size() + 1);
    u[0] = std::log(p.variance_scale);
    u.tail(p.lengthscales.size()) = p.lengthscales.array().log();
    return u;
}

KernelParams unpack(const Eigen::VectorXd& u, double nugget) {
    KernelParams p;
    p.variance_scale = std::exp(u[0]);
    p.lengthscales = u.tail(u.size() - 1).array().exp();
    p.nugget = nugget;
    return p;
}

double evidence(const TrainingSet& train, const KernelParams& p) {
    try {
        return log_marginal_likelihood(fit_gp(train, p));
    } catch (const SingularKernelError&) {
        return -std::numeric_limits<double>::infinity();
    } catch (const DomainError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

}  // namespace

KernelParams optimize_emulator(const TrainingSet& train, const KernelParams& init,
                               const OptimizerOptions& options) {
    if (options.budget < 1) throw DomainError("optimize_emulator: budget must be at least 1");
    init.validate();

    const Eigen::Index n = init.lengthscales.size() + 1;
    Eigen::VectorXd lower(n), upper(n);
    lower[0] = options.min_log_variance;
    upper[0] = options.max_log_variance;
    lower.tail(n - 1).setConstant(options.min_log_lengthscale);
    upper.tail(n - 1).setConstant(options.max_log_lengthscale);

    const double nugget = init.nugget;
    const auto objective = [&](const Eigen::VectorXd& u) {
        return -evidence(train, unpack(u, nugget));
    };

    const double init_value = evidence(train, init);
    KernelParams best = init;
    double best_value = init_value;

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 1.0);
    const Eigen::VectorXd origin = pack(init).cwiseMax(lower).cwiseMin(upper);
    for (std::size_t start = 0; start <= options.restarts; ++start) {
        Eigen::VectorXd u0 = origin;
        if (start > 0)
            for (Eigen::Index i = 0; i < n; ++i) u0[i] += jitter(rng);
        u0 = u0.cwiseMax(lower).cwiseMin(upper);
        const auto result = detail::nelder_mead(objective, u0, 0.5, lower, upper, options.budget);
        const double value = -result.value;
        if (std::isfinite(value) && value > best_value) {
            best_value = value;
            best = unpack(result.argmin, nugget);
        }
    }
    return best;
}

KernelParams optimize_emulator(const TrainingSet& train, const KernelParams& init,
                               std::size_t budget) {
    OptimizerOptions options;
    options.budget = budget;
    return optimize_emulator(train, init, options);
}

}  // namespace driftcal
