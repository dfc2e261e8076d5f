#include "driftcal/predictive.hpp"

#include <algorithm>

namespace driftcal {

Eigen::MatrixXd uniform_grid(std::size_t n) {
    if (n == 0) throw DomainError("grid needs at least one point");
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), 1);
    if (n == 1) {
        g(0, 0) = 0.5;
        return g;
    }
    for (std::size_t i = 0; i < n; ++i)
        g(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i) / static_cast<double>(n - 1);
    g(static_cast<Eigen::Index>(n - 1), 0) = 1.0;
    return g;
}

namespace {

void require_draws(const PosteriorSamples& s) {
    if (s.draws() == 0) throw DomainError("posterior samples are empty");
}

FieldSummary summarize(const FieldDraws& draws, const Eigen::MatrixXd& knots, const Eigen::MatrixXd& grid,
                       std::size_t n_traj) {
    const Eigen::Index t = draws.values.rows();
    const Eigen::Index g = grid.rows();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(g), sum_sq = Eigen::VectorXd::Zero(g), cond_var = Eigen::VectorXd::Zero(g);
    const std::size_t n_out = std::min<std::size_t>(n_traj, static_cast<std::size_t>(t));
    FieldSummary out;
    out.name = draws.name;
    out.trajectories.resize(static_cast<Eigen::Index>(n_out), g);
    std::size_t next_traj = 0;
    Eigen::VectorXd mean, var;
    for (Eigen::Index r = 0; r < t; ++r) {
        DiscrepancyField f(knots, draws.values.row(r).transpose(), draws.hyper(r, 0), draws.hyper(r, 1));
        f.condition(grid, mean, var);
        sum += mean;
        sum_sq += mean.cwiseProduct(mean);
        cond_var += var;
        if (next_traj < n_out &&
            static_cast<std::size_t>(r) == next_traj * static_cast<std::size_t>(t) / n_out) {
            out.trajectories.row(static_cast<Eigen::Index>(next_traj)) = mean.transpose();
            ++next_traj;
        }
    }
    const double n = static_cast<double>(t);
    out.mean = sum / n;
    const Eigen::VectorXd spread = (sum_sq / n - out.mean.cwiseProduct(out.mean)).cwiseMax(0.0);
    out.sd = (spread + cond_var / n).array().sqrt();
    return out;
}

}  // namespace

std::vector<FieldSummary> summarize_fields(const PosteriorSamples& samples, const Eigen::MatrixXd& grid,
                                           std::size_t n_trajectories) {
    require_draws(samples);
    if (grid.cols() != samples.knots.cols()) throw DimensionError("grid and knots differ in dimension");
    std::vector<FieldSummary> out;
    for (const auto& f : samples.delta) out.push_back(summarize(f, samples.knots, grid, n_trajectories));
    if (samples.additive) out.push_back(summarize(*samples.additive, samples.knots, grid, n_trajectories));
    return out;
}

PredictiveSummary posterior_predictive(const PosteriorSamples& samples, const Emulator& emulator,
                                       const Eigen::MatrixXd& grid) {
    require_draws(samples);
    const Eigen::Index g = grid.rows();
    const Eigen::Index dx = grid.cols();
    const Eigen::Index dt = samples.theta.cols();
    if (static_cast<std::size_t>(dx + dt) != emulator.input_dim())
        throw DimensionError("grid and theta do not match the emulator input dimension");
    if (dx != samples.knots.cols()) throw DimensionError("grid and knots differ in dimension");

    const Eigen::Index t = static_cast<Eigen::Index>(samples.draws());
    Eigen::VectorXd eta_sum = Eigen::VectorXd::Zero(g), eta_sq = Eigen::VectorXd::Zero(g), eta_var = Eigen::VectorXd::Zero(g);
    Eigen::VectorXd add_sum = Eigen::VectorXd::Zero(g), tot_sq = Eigen::VectorXd::Zero(g), add_var = Eigen::VectorXd::Zero(g);
    Eigen::MatrixXd delta(g, dt);
    Eigen::VectorXd add_mean, add_cv;
    std::vector<double> input(static_cast<std::size_t>(dx + dt));

    for (Eigen::Index r = 0; r < t; ++r) {
        for (Eigen::Index k = 0; k < dt; ++k) {
            if (static_cast<std::size_t>(k) < samples.delta.size()) {
                const auto& d = samples.delta[static_cast<std::size_t>(k)];
                DiscrepancyField f(samples.knots, d.values.row(r).transpose(), d.hyper(r, 0), d.hyper(r, 1));
                delta.col(k) = f.condition_mean(grid);
            } else {
                delta.col(k).setZero();
            }
        }
        if (samples.additive) {
            const auto& a = *samples.additive;
            DiscrepancyField f(samples.knots, a.values.row(r).transpose(), a.hyper(r, 0), a.hyper(r, 1));
            f.condition(grid, add_mean, add_cv);
        }
        for (Eigen::Index i = 0; i < g; ++i) {
            for (Eigen::Index j = 0; j < dx; ++j) input[static_cast<std::size_t>(j)] = grid(i, j);
            for (Eigen::Index k = 0; k < dt; ++k)
                input[static_cast<std::size_t>(dx + k)] = samples.theta(r, k) + delta(i, k);
            const PointPrediction p = emulator.predict(input);
            eta_sum[i] += p.mean;
            eta_sq[i] += p.mean * p.mean;
            eta_var[i] += p.variance;
            const double a = samples.additive ? add_mean[i] : 0.0;
            add_sum[i] += a;
            tot_sq[i] += (p.mean + a) * (p.mean + a);
            if (samples.additive) add_var[i] += add_cv[i];
        }
    }

    const double n = static_cast<double>(t);
    const double noise = samples.sigma2.mean();
    const Standardizer& tr = emulator.target_transform();
    const double s2 = tr.scale * tr.scale;

    PredictiveSummary out;
    const Eigen::VectorXd eta_m = eta_sum / n;
    const Eigen::VectorXd tot_m = (eta_sum + add_sum) / n;
    const Eigen::VectorXd eta_v = (eta_sq / n - eta_m.cwiseProduct(eta_m)).cwiseMax(0.0) + eta_var / n;
    const Eigen::VectorXd tot_v = (tot_sq / n - tot_m.cwiseProduct(tot_m)).cwiseMax(0.0) + eta_var / n + add_var / n;
    out.eta_mean = tr.inverse(eta_m);
    out.eta_variance = eta_v * s2;
    out.mean = tr.inverse(tot_m);
    out.variance = (tot_v.array() + noise).matrix() * s2;
    return out;
}

PredictiveSummary emulator_at_theta(const Emulator& emulator, const Eigen::MatrixXd& grid,
                                    const Eigen::VectorXd& theta_unit) {
    const Eigen::Index g = grid.rows();
    const Eigen::Index dx = grid.cols();
    const Eigen::Index dt = theta_unit.size();
    if (static_cast<std::size_t>(dx + dt) != emulator.input_dim())
        throw DimensionError("grid and theta do not match the emulator input dimension");
    const Standardizer& tr = emulator.target_transform();
    PredictiveSummary out;
    out.eta_mean.resize(g);
    out.eta_variance.resize(g);
    std::vector<double> input(static_cast<std::size_t>(dx + dt));
    for (Eigen::Index i = 0; i < g; ++i) {
        for (Eigen::Index j = 0; j < dx; ++j) input[static_cast<std::size_t>(j)] = grid(i, j);
        for (Eigen::Index k = 0; k < dt; ++k) input[static_cast<std::size_t>(dx + k)] = theta_unit[k];
        const PointPrediction p = emulator.predict(input);
        out.eta_mean[i] = tr.inverse(p.mean);
        out.eta_variance[i] = p.variance * tr.scale * tr.scale;
    }
    out.mean = out.eta_mean;
    out.variance = out.eta_variance;
    return out;
}

Eigen::VectorXd posterior_mean_theta(const PosteriorSamples& samples) {
    require_draws(samples);
    return samples.theta.colwise().mean().transpose();
}

}  // namespace driftcal
