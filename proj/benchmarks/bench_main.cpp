#include <benchmark/benchmark.h>

#include "driftcal/design.hpp"
#include "driftcal/gp.hpp"
#include "driftcal/integrated_delta.hpp"
#include "driftcal/posterior.hpp"

namespace {

driftcal::TrainingSet training(std::size_t n, std::size_t d) {
    const Eigen::MatrixXd x = driftcal::latin_hypercube(n, d, 3);
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = std::sin(3.0 * x(i, 0)) + x.row(i).squaredNorm();
    return driftcal::TrainingSet::from_raw(x, y);
}

void BM_LatinHypercube(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(driftcal::latin_hypercube(n, 4, 11));
}
BENCHMARK(BM_LatinHypercube)->Arg(43)->Arg(400);

void BM_FitGp(benchmark::State& state) {
    const auto train = training(static_cast<std::size_t>(state.range(0)), 4);
    const auto params = driftcal::KernelParams::isotropic(1.0, 0.3, 4, 1e-8);
    for (auto _ : state) benchmark::DoNotOptimize(driftcal::fit_gp(train, params));
}
BENCHMARK(BM_FitGp)->Arg(43)->Arg(200);

void BM_PredictPoint(benchmark::State& state) {
    const auto model = driftcal::fit_gp(training(43, 4), driftcal::KernelParams::isotropic(1.0, 0.3, 4, 1e-8));
    const std::vector<double> q{0.3, 0.5, 0.5, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(model.predict_standardized(q));
}
BENCHMARK(BM_PredictPoint);

void BM_OptimizeEmulator(benchmark::State& state) {
    const auto train = training(43, 4);
    driftcal::OptimizerOptions opt;
    opt.budget = 200;
    opt.restarts = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            driftcal::optimize_emulator(train, driftcal::KernelParams::isotropic(1.0, 0.3, 4, 1e-8), opt));
}
BENCHMARK(BM_OptimizeEmulator)->Unit(benchmark::kMillisecond);

void BM_EmbeddedLogPosterior(benchmark::State& state) {
    auto emulator = std::make_shared<driftcal::GpEmulator>(
        driftcal::fit_gp(training(43, 4), driftcal::KernelParams::isotropic(1.0, 0.3, 4, 1e-8)));
    driftcal::CalibrationProblem p;
    p.obs_x = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    p.obs_y = Eigen::VectorXd::Zero(5);
    p.emulator = emulator;
    p.theta_dim = 3;
    p.theta_names = {"a", "b", "c"};
    const driftcal::PosteriorModel model(p, driftcal::CalibrationPriors::defaults(3),
                                         driftcal::integrated_delta_layout());
    const auto s = model.initial_state(Eigen::VectorXd::Constant(3, 0.5), 0, driftcal::McmcConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(driftcal::embedded_log_posterior(s, model));
}
BENCHMARK(BM_EmbeddedLogPosterior);

}  // namespace
BENCHMARK_MAIN();
