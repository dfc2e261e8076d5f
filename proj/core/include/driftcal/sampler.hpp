#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/mcmc.hpp"
#include "driftcal/posterior.hpp"
#include "driftcal/samples.hpp"

namespace driftcal {

struct CalibratorOptions {
    ModelLayout layout;
    McmcConfig mcmc;
    /// Base theta in unit coordinates; empty means the centre of the unit box.
    Eigen::VectorXd theta0;
    std::size_t knot_refinement = 0;
};

/// Prior-preconditioned random walk: values + step * L * z with L the Cholesky factor
/// of the field's prior covariance. Symmetric, so no proposal ratio is needed.
DiscrepancyField propose_field_update(const DiscrepancyField& field, double step, Rng& rng);

/// One Metropolis-within-Gibbs chain over the blocks of a PosteriorModel.
class ChainRunner {
public:
    ChainRunner(const PosteriorModel& model, const McmcConfig& config, ChainState init,
                std::uint64_t seed);

    /// One sweep over every block. Steps adapt only while `adapting` is true;
    /// acceptance is counted only while it is false.
    void sweep(bool adapting);

    /// Random-walk MH on (log variance, log lengthscale) of every field.
    void update_hyperparams(bool adapting);

    /// Recomputes the log posterior from scratch; throws AuditError on mismatch.
    void audit();

    const ChainState& state() const { return state_; }
    const PosteriorTerms& terms() const { return terms_; }
    const std::vector<AcceptanceCounter>& counters() const { return counters_; }
    const ExtrapolationStats& extrapolation() const { return extrapolation_; }
    std::size_t audits() const { return audits_; }
    Rng& rng() { return rng_; }

private:
    bool step_block(std::size_t b, bool adapting);
    bool step_theta(std::size_t b);
    bool step_field(std::size_t b, std::size_t k);
    bool step_additive(std::size_t b);
    bool step_field_hyper(std::size_t b, std::size_t k);
    bool step_additive_hyper(std::size_t b);
    bool step_noise();
    double refresh_likelihood(const ChainState& s, PosteriorTerms& t);

    const PosteriorModel& model_;
    McmcConfig config_;
    ChainState state_;
    PosteriorTerms terms_;
    Rng rng_;
    StepAdapter adapter_;
    std::vector<AcceptanceCounter> counters_;
    ExtrapolationStats extrapolation_;
    std::size_t audits_ = 0;
};

/// Seed of chain `chain` derived from the run seed.
std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain);

/// Worker threads for concurrent chains: DRIFTCAL_THREADS if set, else hardware concurrency.
std::size_t worker_threads();

/// Runs config.chains independent chains concurrently and merges their draws.
PosteriorSamples run_sampler(const PosteriorModel& model, const CalibratorOptions& options,
                             const std::string& method);

}  // namespace driftcal
