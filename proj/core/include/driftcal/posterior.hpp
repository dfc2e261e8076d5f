#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/dataset.hpp"
#include "driftcal/discrepancy.hpp"
#include "driftcal/gp.hpp"
#include "driftcal/mcmc.hpp"
#include "driftcal/prior.hpp"

namespace driftcal {

/// Surrogate for the simulator on unit inputs [x..., theta...], in standardized units.
class Emulator {
public:
    virtual ~Emulator() = default;
    virtual std::size_t input_dim() const = 0;
    virtual PointPrediction predict(std::span<const double> unit_input) const = 0;
    /// Map between raw simulator output and the emulator's standardized units.
    virtual const Standardizer& target_transform() const = 0;
};

class GpEmulator final : public Emulator {
public:
    explicit GpEmulator(GPModel model) : model_(std::move(model)) {}

    std::size_t input_dim() const override { return model_.train().dim(); }
    PointPrediction predict(std::span<const double> unit_input) const override {
        return model_.predict_standardized(unit_input);
    }
    const Standardizer& target_transform() const override { return model_.train().transform; }
    const GPModel& model() const { return model_; }

private:
    GPModel model_;
};

/// Exact function with zero predictive variance; bypasses GP emulation.
class FunctionEmulator final : public Emulator {
public:
    using Fn = std::function<double(std::span<const double>)>;

    FunctionEmulator(std::size_t dim, Fn fn, Standardizer transform = Standardizer::identity())
        : dim_(dim), fn_(std::move(fn)), transform_(transform) {}

    std::size_t input_dim() const override { return dim_; }
    PointPrediction predict(std::span<const double> unit_input) const override {
        return {transform_.forward(fn_(unit_input)), 0.0};
    }
    const Standardizer& target_transform() const override { return transform_; }

private:
    std::size_t dim_;
    Fn fn_;
    Standardizer transform_;
};

/// Emulator that evaluates the synthetic simulator itself (unit inputs mapped back to
/// physical units through the dataset bounds).
std::shared_ptr<const Emulator> make_simulator_emulator(const SyntheticSimulator& sim,
                                                        const CalibrationDataset& data);

struct EmulatorSettings {
    /// Initial kernel on the unit inputs; empty lengthscales means 0.3 in every dimension.
    KernelParams init = KernelParams{1.0, {}, 1e-8};
    std::size_t budget = 300;
    std::size_t restarts = 2;
    std::uint64_t seed = 0;
};

/// Fits the GP emulator to the dataset's simulator runs, optimising the evidence.
GPModel train_emulator(const CalibrationDataset& data, const EmulatorSettings& settings);

/// Immutable inputs shared by every chain.
struct CalibrationProblem {
    Eigen::MatrixXd obs_x;   // unit coordinates, n_obs x Dx
    Eigen::VectorXd obs_y;   // standardized by the emulator's transform
    std::shared_ptr<const Emulator> emulator;
    std::size_t theta_dim = 0;
    std::vector<std::string> theta_names;

    static CalibrationProblem from_dataset(const CalibrationDataset& data,
                                           std::shared_ptr<const Emulator> emulator);
    std::size_t n_obs() const { return static_cast<std::size_t>(obs_x.rows()); }
    std::size_t x_dim() const { return static_cast<std::size_t>(obs_x.cols()); }
    const Standardizer& target() const { return emulator->target_transform(); }
};

/// Priors on the log of a field's variance and lengthscale.
struct FieldPrior {
    Prior variance = Prior::log_normal_median(0.05, 1.0);
    Prior lengthscale = Prior::log_normal_median(0.3, 0.5);
};

/// All priors in unit-theta / standardized-output coordinates.
struct CalibrationPriors {
    std::vector<Prior> theta;        // per parameter, on the unit interval
    std::vector<FieldPrior> fields;  // per parameter
    FieldPrior additive{Prior::log_normal_median(0.1, 1.5), Prior::log_normal_median(0.3, 0.5)};
    InverseGamma noise{2.0, 1e-3};

    static CalibrationPriors defaults(std::size_t theta_dim);
    void validate(std::size_t theta_dim) const;
};

/// Which blocks exist in the model.
struct ModelLayout {
    bool theta_fields = true;   // delta_theta fields inside the emulator input
    bool additive = false;      // additive delta_eta
    bool sample_theta = false;  // MH block on the base theta
    bool update_hypers = true;
    bool update_noise = true;
};

enum class BlockKind { theta, field, field_hyper, additive, additive_hyper, noise };

struct Block {
    BlockKind kind;
    std::size_t index = 0;
    std::string name;
};

std::vector<Block> make_blocks(const ModelLayout& layout, const std::vector<std::string>& theta_names);

struct ChainState {
    ThetaStar theta_star;                       // base theta (unit) and delta_theta fields
    std::optional<DiscrepancyField> additive;   // delta_eta, standardized output units
    double noise_var = 1e-3;                    // standardized output units
    std::vector<double> step_sizes;             // aligned with make_blocks()
    double log_post = 0.0;
    std::size_t iteration = 0;
};

/// Components of the log posterior. Hyperparameter terms are densities of the log
/// hyperparameters (the Jacobian is included) because that is the sampled coordinate.
struct PosteriorTerms {
    double likelihood = 0.0;
    std::vector<double> field_prior;
    std::vector<double> field_hyper_prior;
    double additive_prior = 0.0;
    double additive_hyper_prior = 0.0;
    double theta_prior = 0.0;
    double noise_prior = 0.0;
    Eigen::VectorXd residuals;   // y - eta - delta_eta at each observation
    Eigen::VectorXd emu_var;     // emulator variance at each observation
    ExtrapolationStats extrapolation;

    double total() const;
};

/// Log posterior of every model layout.
class PosteriorModel {
public:
    PosteriorModel(CalibrationProblem problem, CalibrationPriors priors, ModelLayout layout);

    const CalibrationProblem& problem() const { return problem_; }
    const CalibrationPriors& priors() const { return priors_; }
    const ModelLayout& layout() const { return layout_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    PosteriorTerms evaluate(const ChainState& state) const;

    /// Gaussian likelihood with variance sigma^2 + emulator variance. Fills residuals
    /// and emulator variances.
    double likelihood(const ChainState& state, Eigen::VectorXd& residuals,
                      Eigen::VectorXd& emu_var, ExtrapolationStats& extrapolation) const;
    double field_hyper_log_prior(const DiscrepancyField& field, const FieldPrior& prior) const;
    double theta_log_prior(const Eigen::VectorXd& theta) const;
    double noise_log_prior(double noise_var) const;

    /// Initial state: zero fields, hyperparameters at prior medians, theta at theta0.
    ChainState initial_state(const Eigen::VectorXd& theta0, std::size_t knot_refinement,
                             const McmcConfig& config) const;

private:
    CalibrationProblem problem_;
    CalibrationPriors priors_;
    ModelLayout layout_;
    std::vector<Block> blocks_;
};

}  // namespace driftcal
