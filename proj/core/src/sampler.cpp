#include "driftcal/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "driftcal/log.hpp"

namespace driftcal {

namespace {

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
    return v;
}

double gaussian_loglik(const Eigen::VectorXd& residuals, const Eigen::VectorXd& emu_var, double noise_var) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < residuals.size(); ++i) {
        const double var = noise_var + emu_var[i];
        ll += -0.5 * (std::log(2.0 * std::numbers::pi * var) + residuals[i] * residuals[i] / var);
    }
    return ll;
}

}  // namespace

DiscrepancyField propose_field_update(const DiscrepancyField& field, double step, Rng& rng) {
    if (!(step >= 0.0)) throw DomainError("proposal step must be non-negative");
    DiscrepancyField next = field;
    if (step == 0.0) return next;
    const Eigen::VectorXd z = standard_normal(static_cast<Eigen::Index>(field.size()), rng);
    next.set_values(field.values() + step * (field.prior_chol() * z));
    return next;
}

ChainRunner::ChainRunner(const PosteriorModel& model, const McmcConfig& config, ChainState init,
                         std::uint64_t seed)
    : model_(model),
      config_(config),
      state_(std::move(init)),
      rng_(seed),
      adapter_(config.adapt_target),
      counters_(model.blocks().size()) {
    terms_ = model_.evaluate(state_);
    state_.log_post = terms_.total();
    if (!std::isfinite(state_.log_post))
        throw InitializationError("log posterior is not finite at the initial state");
    if (state_.step_sizes.size() != model_.blocks().size())
        throw DimensionError("chain state has the wrong number of step sizes");
}

double ChainRunner::refresh_likelihood(const ChainState& s, PosteriorTerms& t) {
    t.likelihood = model_.likelihood(s, t.residuals, t.emu_var, extrapolation_);
    return t.likelihood;
}

bool ChainRunner::step_theta(std::size_t b) {
    ChainState next = state_;
    const auto d = next.theta_star.base_theta.size();
    next.theta_star.base_theta += state_.step_sizes[b] * standard_normal(d, rng_);
    PosteriorTerms t = terms_;
    t.theta_prior = model_.theta_log_prior(next.theta_star.base_theta);
    if (std::isfinite(t.theta_prior)) refresh_likelihood(next, t);
    const double lp = std::isfinite(t.theta_prior) ? t.total() : -std::numeric_limits<double>::infinity();
    if (!mh_accept(lp, state_.log_post, rng_)) return false;
    next.log_post = lp;
    state_ = std::move(next);
    terms_ = std::move(t);
    return true;
}

bool ChainRunner::step_field(std::size_t b, std::size_t k) {
    ChainState next = state_;
    next.theta_star.fields[k] = propose_field_update(state_.theta_star.fields[k], state_.step_sizes[b], rng_);
    PosteriorTerms t = terms_;
    t.field_prior[k] = next.theta_star.fields[k].log_prior();
    refresh_likelihood(next, t);
    const double lp = t.total();
    if (!mh_accept(lp, state_.log_post, rng_)) return false;
    next.log_post = lp;
    state_ = std::move(next);
    terms_ = std::move(t);
    return true;
}

bool ChainRunner::step_additive(std::size_t b) {
    ChainState next = state_;
    next.additive = propose_field_update(*state_.additive, state_.step_sizes[b], rng_);
    PosteriorTerms t = terms_;
    t.additive_prior = next.additive->log_prior();
    refresh_likelihood(next, t);
    const double lp = t.total();
    if (!mh_accept(lp, state_.log_post, rng_)) return false;
    next.log_post = lp;
    state_ = std::move(next);
    terms_ = std::move(t);
    return true;
}

bool ChainRunner::step_field_hyper(std::size_t b, std::size_t k) {
    const DiscrepancyField& cur = state_.theta_star.fields[k];
    const Eigen::VectorXd z = standard_normal(2, rng_);
    const double s = state_.step_sizes[b];
    DiscrepancyField prop = cur;
    prop.set_hyper(cur.variance() * std::exp(s * z[0]), cur.lengthscale() * std::exp(s * z[1]));
    PosteriorTerms t = terms_;
    t.field_prior[k] = prop.log_prior();
    t.field_hyper_prior[k] = model_.field_hyper_log_prior(prop, model_.priors().fields[k]);
    const double lp = t.total();
    if (!mh_accept(lp, state_.log_post, rng_)) return false;
    state_.theta_star.fields[k] = std::move(prop);
    state_.log_post = lp;
    terms_ = std::move(t);
    return true;
}

bool ChainRunner::step_additive_hyper(std::size_t b) {
    const DiscrepancyField& cur = *state_.additive;
    const Eigen::VectorXd z = standard_normal(2, rng_);
    const double s = state_.step_sizes[b];
    DiscrepancyField prop = cur;
    prop.set_hyper(cur.variance() * std::exp(s * z[0]), cur.lengthscale() * std::exp(s * z[1]));
    PosteriorTerms t = terms_;
    t.additive_prior = prop.log_prior();
    t.additive_hyper_prior = model_.field_hyper_log_prior(prop, model_.priors().additive);
    const double lp = t.total();
    if (!mh_accept(lp, state_.log_post, rng_)) return false;
    state_.additive = std::move(prop);
    state_.log_post = lp;
    terms_ = std::move(t);
    return true;
}

bool ChainRunner::step_noise() {
    // Conjugate draw ignoring emulator variance, corrected by an independence MH step;
    // with zero emulator variance every draw is accepted.
    const InverseGamma& prior = model_.priors().noise;
    const double proposal = gibbs_sigma2(terms_.residuals, prior, rng_);
    const Prior q(sigma2_conditional(terms_.residuals, prior));
    const double cur = state_.noise_var;

    PosteriorTerms t = terms_;
    t.likelihood = gaussian_loglik(t.residuals, t.emu_var, proposal);
    t.noise_prior = model_.noise_log_prior(proposal);
    const double lp = t.total();
    const bool exact = (terms_.emu_var.array() == 0.0).all();
    bool ok = true;
    if (!exact) {
        const double log_ratio = (lp - state_.log_post) - (q.log_density(proposal) - q.log_density(cur));
        ok = mh_accept(state_.log_post + log_ratio, state_.log_post, rng_);
    }
    if (!ok || !std::isfinite(lp)) return false;
    state_.noise_var = proposal;
    state_.log_post = lp;
    terms_ = std::move(t);
    return true;
}

bool ChainRunner::step_block(std::size_t b, bool adapting) {
    const Block& block = model_.blocks()[b];
    bool ok = false;
    switch (block.kind) {
        case BlockKind::theta: ok = step_theta(b); break;
        case BlockKind::field: ok = step_field(b, block.index); break;
        case BlockKind::additive: ok = step_additive(b); break;
        case BlockKind::field_hyper: ok = step_field_hyper(b, block.index); break;
        case BlockKind::additive_hyper: ok = step_additive_hyper(b); break;
        case BlockKind::noise: ok = step_noise(); break;
    }
    if (adapting && block.kind != BlockKind::noise)
        state_.step_sizes[b] = adapter_.adapt(state_.step_sizes[b], ok, state_.iteration + 1);
    if (!adapting) counters_[b].record(ok);
    return ok;
}

void ChainRunner::sweep(bool adapting) {
    for (std::size_t b = 0; b < model_.blocks().size(); ++b) step_block(b, adapting);
    ++state_.iteration;
}

void ChainRunner::update_hyperparams(bool adapting) {
    for (std::size_t b = 0; b < model_.blocks().size(); ++b) {
        const auto kind = model_.blocks()[b].kind;
        if (kind == BlockKind::field_hyper || kind == BlockKind::additive_hyper) step_block(b, adapting);
    }
}

void ChainRunner::audit() {
    const double fresh = model_.evaluate(state_).total();
    ++audits_;
    const double tol = 1e-9 * std::max(1.0, std::abs(fresh));
    if (!(std::abs(fresh - state_.log_post) <= tol)) {
        std::ostringstream os;
        os.precision(17);
        os << "cached log posterior " << state_.log_post << " differs from recomputed " << fresh
           << " at iteration " << state_.iteration;
        throw AuditError(os.str());
    }
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chain), 0x5eedu};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::size_t worker_threads() {
    if (const char* env = std::getenv("DRIFTCAL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace {

PosteriorSamples run_chain(const PosteriorModel& model, const CalibratorOptions& options,
                           const std::string& method, std::size_t chain) {
    const McmcConfig& cfg = options.mcmc;
    const auto& problem = model.problem();
    Eigen::VectorXd theta0 = options.theta0.size() ? options.theta0
                                                   : Eigen::VectorXd::Constant(static_cast<Eigen::Index>(problem.theta_dim), 0.5);
    ChainState init = model.initial_state(theta0, options.knot_refinement, cfg);
    if (options.layout.sample_theta && chain > 0) {
        // overdispersed start for between-chain diagnostics
        ChainState s = init;
        Rng start_rng(chain_seed(cfg.seed, chain) ^ 0x9e3779b97f4a7c15ull);
        std::uniform_real_distribution<double> u(0.1, 0.9);
        for (Eigen::Index k = 0; k < s.theta_star.base_theta.size(); ++k) s.theta_star.base_theta[k] = u(start_rng);
        if (std::isfinite(model.evaluate(s).total())) init = std::move(s);
    }
    ChainRunner runner(model, cfg, std::move(init), chain_seed(cfg.seed, chain));

    const std::size_t stored = cfg.stored_per_chain();
    const auto k_knots = static_cast<Eigen::Index>(make_knots(problem.obs_x, options.knot_refinement).rows());
    const auto dt = static_cast<Eigen::Index>(problem.theta_dim);
    PosteriorSamples out;
    out.method = method;
    out.knots = make_knots(problem.obs_x, options.knot_refinement);
    out.theta_names = problem.theta_names;
    if (options.layout.theta_fields)
        for (Eigen::Index k = 0; k < dt; ++k)
            out.delta.push_back({problem.theta_names[static_cast<std::size_t>(k)],
                                 Eigen::MatrixXd(static_cast<Eigen::Index>(stored), k_knots),
                                 Eigen::MatrixXd(static_cast<Eigen::Index>(stored), 2)});
    if (options.layout.additive)
        out.additive = FieldDraws{"delta_eta", Eigen::MatrixXd(static_cast<Eigen::Index>(stored), k_knots),
                                  Eigen::MatrixXd(static_cast<Eigen::Index>(stored), 2)};
    out.theta.resize(static_cast<Eigen::Index>(stored), dt);
    out.sigma2.resize(static_cast<Eigen::Index>(stored));
    out.log_post.resize(static_cast<Eigen::Index>(stored));

    Eigen::Index row = 0;
    bool warned = false;
    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        const bool adapting = t <= cfg.burn_in;
        runner.sweep(adapting);
        if (!warned && runner.extrapolation().extrapolated > 0) {
            warned = true;
            log_info("chain " + std::to_string(chain) + ": emulator queried outside its training box (distance " +
                     std::to_string(runner.extrapolation().max_distance) + ")");
        }
        if (cfg.audit_interval && t % cfg.audit_interval == 0) runner.audit();
        if (!adapting && (t - cfg.burn_in) % cfg.thin == 0 && row < static_cast<Eigen::Index>(stored)) {
            const ChainState& s = runner.state();
            for (std::size_t k = 0; k < out.delta.size(); ++k) {
                const auto& f = s.theta_star.fields[k];
                out.delta[k].values.row(row) = f.values().transpose();
                out.delta[k].hyper(row, 0) = f.variance();
                out.delta[k].hyper(row, 1) = f.lengthscale();
            }
            if (out.additive) {
                out.additive->values.row(row) = s.additive->values().transpose();
                out.additive->hyper(row, 0) = s.additive->variance();
                out.additive->hyper(row, 1) = s.additive->lengthscale();
            }
            out.theta.row(row) = s.theta_star.base_theta.transpose();
            out.sigma2[row] = s.noise_var;
            out.log_post[row] = s.log_post;
            ++row;
        }
    }
    out.chain_lengths = {static_cast<std::size_t>(row)};
    for (std::size_t b = 0; b < model.blocks().size(); ++b) {
        out.acceptance.emplace_back(model.blocks()[b].name, runner.counters()[b].rate());
        out.final_steps.push_back(runner.state().step_sizes[b]);
    }
    out.extrapolation = runner.extrapolation();
    out.audits = runner.audits();
    if (runner.extrapolation().extrapolated > 0)
        log_info("chain " + std::to_string(chain) + ": " + std::to_string(runner.extrapolation().extrapolated) + " of " +
                 std::to_string(runner.extrapolation().evaluations) + " likelihood evaluations extrapolated");
    return out;
}

}  // namespace

PosteriorSamples run_sampler(const PosteriorModel& model, const CalibratorOptions& options,
                             const std::string& method) {
    options.mcmc.validate();
    if (options.theta0.size() && static_cast<std::size_t>(options.theta0.size()) != model.problem().theta_dim)
        throw DimensionError("theta0 has the wrong dimension");

    const std::size_t n = options.mcmc.chains;
    std::vector<PosteriorSamples> results(n);
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::min(worker_threads(), n);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n; ++c) results[c] = run_chain(model, options, method, c);
    } else {
        for (std::size_t first = 0; first < n; first += workers) {
            std::vector<std::thread> pool;
            for (std::size_t c = first; c < std::min(n, first + workers); ++c)
                pool.emplace_back([&, c] {
                    try {
                        results[c] = run_chain(model, options, method, c);
                    } catch (...) {
                        errors[c] = std::current_exception();
                    }
                });
            for (auto& th : pool) th.join();
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return PosteriorSamples::merge(results);
}

}  // namespace driftcal
