#include "driftcal/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace driftcal {

using nlohmann::json;

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::koh: return "koh";
        case RunMode::integrated_delta: return "integrated_delta";
        case RunMode::combined: return "combined";
        case RunMode::generate: return "generate";
        case RunMode::compare: return "compare";
    }
    return "unknown";
}

std::optional<RunMode> parse_mode(std::string_view name) {
    for (RunMode m : {RunMode::koh, RunMode::integrated_delta, RunMode::combined, RunMode::generate, RunMode::compare})
        if (to_string(m) == name) return m;
    return std::nullopt;
}

DriftTruth SyntheticSpec::truth() const {
    const auto dt = static_cast<Eigen::Index>(theta_priors.size());
    DriftTruth t;
    t.theta0 = truth_theta.size() ? truth_theta : Eigen::VectorXd::Constant(dt, 0.5);
    t.drifts = drifts.empty() ? std::vector<DriftFunction>(theta_priors.size(), DriftFunction{ZeroDrift{}}) : drifts;
    return t;
}

DesignSpec SyntheticSpec::design() const {
    DesignSpec d;
    d.domain_bounds = x_bounds;
    d.theta_priors = theta_priors;
    d.n_samples = n_sim;
    d.seed = design_seed;
    return d;
}

CalibrationPriors PriorSettings::build(std::size_t theta_dim) const {
    CalibrationPriors p = CalibrationPriors::defaults(theta_dim);
    if (!theta.empty()) {
        if (theta.size() != theta_dim)
            throw DimensionError("priors.theta has " + std::to_string(theta.size()) + " entries but the dataset has " +
                                 std::to_string(theta_dim) + " calibration parameters");
        p.theta = theta;
    }
    p.fields.assign(theta_dim, field);
    p.additive = additive;
    p.noise = noise;
    return p;
}

CalibratorSettings RunConfig::calibrator(RunMode m) const {
    const std::optional<CalibratorSettings>* s = nullptr;
    switch (m) {
        case RunMode::koh: s = &koh; break;
        case RunMode::integrated_delta: s = &integrated_delta; break;
        case RunMode::combined: s = &combined; break;
        default: return {};
    }
    return s->value_or(CalibratorSettings{});
}

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += "\n  " + s;
    return out;
}

/// Collects problems instead of stopping at the first one.
class Reader {
public:
    std::vector<std::string> problems;

    void fail(const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); }

    static std::string at(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

    /// Reports keys not in `allowed`; false when `j` is not an object.
    bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            fail(path.empty() ? "<root>" : path, "expected an object");
            return false;
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* k : allowed) known = known || it.key() == k;
            if (!known) fail(at(path, it.key()), "unknown key");
        }
        return true;
    }

    bool number(const json& j, const std::string& path, double& out) {
        if (!j.is_number()) {
            fail(path, "expected a number");
            return false;
        }
        out = j.get<double>();
        if (!std::isfinite(out)) {
            fail(path, "must be finite");
            return false;
        }
        return true;
    }

    void opt_number(const json& obj, const std::string& path, const char* key, double& out) {
        if (obj.contains(key)) number(obj.at(key), at(path, key), out);
    }

    template <typename U>
    void opt_unsigned(const json& obj, const std::string& path, const char* key, U& out) {
        if (!obj.contains(key)) return;
        const json& j = obj.at(key);
        if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0)) {
            fail(at(path, key), "expected a non-negative integer");
            return;
        }
        out = static_cast<U>(j.get<unsigned long long>());
    }

    void opt_bool(const json& obj, const std::string& path, const char* key, bool& out) {
        if (!obj.contains(key)) return;
        if (!obj.at(key).is_boolean()) {
            fail(at(path, key), "expected true or false");
            return;
        }
        out = obj.at(key).get<bool>();
    }

    bool string(const json& j, const std::string& path, std::string& out) {
        if (!j.is_string()) {
            fail(path, "expected a string");
            return false;
        }
        out = j.get<std::string>();
        return true;
    }

    std::vector<double> numbers(const json& j, const std::string& path) {
        std::vector<double> out;
        if (!j.is_array()) {
            fail(path, "expected an array of numbers");
            return out;
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            double v = 0.0;
            if (number(j[i], path + "[" + std::to_string(i) + "]", v)) out.push_back(v);
        }
        return out;
    }

    Eigen::VectorXd vector(const json& j, const std::string& path) {
        const auto v = numbers(j, path);
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

    std::vector<Interval> intervals(const json& j, const std::string& path) {
        std::vector<Interval> out;
        if (!j.is_array() || j.empty()) {
            fail(path, "expected a non-empty array of [lo, hi] pairs");
            return out;
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string p = path + "[" + std::to_string(i) + "]";
            const auto v = numbers(j[i], p);
            if (v.size() != 2) {
                fail(p, "expected [lo, hi]");
                continue;
            }
            if (!(v[0] < v[1])) fail(p, "lo must be below hi");
            out.push_back({v[0], v[1]});
        }
        return out;
    }

    std::optional<Prior> prior(const json& j, const std::string& path) {
        if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
            fail(path, "expected an object with a string 'type'");
            return std::nullopt;
        }
        const std::string type = j.at("type").get<std::string>();
        auto params = [&](std::initializer_list<const char*> keys) {
            std::vector<double> v;
            std::vector<const char*> allowed{"type"};
            allowed.insert(allowed.end(), keys.begin(), keys.end());
            for (auto it = j.begin(); it != j.end(); ++it) {
                bool known = false;
                for (const char* k : allowed) known = known || it.key() == k;
                if (!known) fail(at(path, it.key()), "unknown key for a " + type + " prior");
            }
            for (const char* k : keys) {
                double x = 0.0;
                if (!j.contains(k))
                    fail(at(path, k), "required");
                else
                    number(j.at(k), at(path, k), x);
                v.push_back(x);
            }
            return v;
        };
        const std::size_t before = problems.size();
        try {
            if (type == "uniform") {
                auto v = params({"lo", "hi"});
                if (problems.size() == before) return Prior::uniform(v[0], v[1]);
            } else if (type == "normal") {
                auto v = params({"mean", "sd"});
                if (problems.size() == before) return Prior::normal(v[0], v[1]);
            } else if (type == "inverse_gamma") {
                auto v = params({"shape", "scale"});
                if (problems.size() == before) return Prior::inverse_gamma(v[0], v[1]);
            } else if (type == "lognormal") {
                if (j.contains("median")) {
                    auto v = params({"median", "sigma"});
                    if (problems.size() == before) return Prior::log_normal_median(v[0], v[1]);
                } else {
                    auto v = params({"mu", "sigma"});
                    if (problems.size() == before) return Prior::log_normal(v[0], v[1]);
                }
            } else {
                fail(at(path, "type"), "unknown prior '" + type + "' (uniform, normal, inverse_gamma, lognormal)");
            }
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
        return std::nullopt;
    }

    void field_prior(const json& j, const std::string& path, FieldPrior& out) {
        if (!object(j, path, {"variance", "lengthscale"})) return;
        for (const char* key : {"variance", "lengthscale"}) {
            if (!j.contains(key)) continue;
            if (auto p = prior(j.at(key), at(path, key))) {
                if (p->support().first < 0.0) fail(at(path, key), "must be a prior on positive values");
                (std::string(key) == "variance" ? out.variance : out.lengthscale) = *p;
            }
        }
    }
};

SyntheticSimulator parse_simulator(Reader& r, const json& j, const std::string& path) {
    SyntheticSimulator sim;
    if (!r.object(j, path, {"kind", "core_weight", "amplitude", "constant", "x_coeff", "linear", "x_linear", "quadratic"}))
        return sim;
    std::string kind = "dipole";
    if (j.contains("kind")) r.string(j.at("kind"), Reader::at(path, "kind"), kind);
    if (kind == "dipole") {
        AnalyticDipole d;
        r.opt_number(j, path, "core_weight", d.core_weight);
        r.opt_number(j, path, "amplitude", d.amplitude);
        for (const char* k : {"constant", "x_coeff", "linear", "x_linear", "quadratic"})
            if (j.contains(k)) r.fail(Reader::at(path, k), "only valid for kind drift_testbed");
        sim.model = d;
    } else if (kind == "drift_testbed") {
        DriftTestbed t;
        r.opt_number(j, path, "constant", t.constant);
        r.opt_number(j, path, "x_coeff", t.x_coeff);
        if (j.contains("linear")) t.linear = r.numbers(j.at("linear"), Reader::at(path, "linear"));
        if (j.contains("x_linear")) t.x_linear = r.numbers(j.at("x_linear"), Reader::at(path, "x_linear"));
        if (j.contains("quadratic")) t.quadratic = r.numbers(j.at("quadratic"), Reader::at(path, "quadratic"));
        for (const char* k : {"core_weight", "amplitude"})
            if (j.contains(k)) r.fail(Reader::at(path, k), "only valid for kind dipole");
        sim.model = t;
    } else {
        r.fail(Reader::at(path, "kind"), "unknown simulator '" + kind + "' (dipole, drift_testbed)");
    }
    return sim;
}

SyntheticSpec parse_synthetic(Reader& r, const json& j, const std::string& path, std::uint64_t seed) {
    SyntheticSpec s;
    s.design_seed = seed;
    s.noise_seed = seed + 1;
    if (!r.object(j, path,
                  {"simulator", "x_bounds", "theta_priors", "truth_theta", "drift", "n_sim", "n_obs", "obs_layout",
                   "noise_sd", "design_seed", "noise_seed", "bisection"}))
        return s;
    if (j.contains("simulator"))
        s.simulator = parse_simulator(r, j.at("simulator"), Reader::at(path, "simulator"));
    if (j.contains("x_bounds"))
        s.x_bounds = r.intervals(j.at("x_bounds"), Reader::at(path, "x_bounds"));
    else
        r.fail(Reader::at(path, "x_bounds"), "required");
    if (j.contains("theta_priors")) {
        const json& tp = j.at("theta_priors");
        const std::string p = Reader::at(path, "theta_priors");
        if (!tp.is_array() || tp.empty())
            r.fail(p, "expected a non-empty array of priors");
        else
            for (std::size_t i = 0; i < tp.size(); ++i)
                if (auto pr = r.prior(tp[i], p + "[" + std::to_string(i) + "]")) s.theta_priors.push_back(*pr);
    } else {
        r.fail(Reader::at(path, "theta_priors"), "required");
    }
    const std::size_t dt = s.theta_priors.size();
    if (j.contains("truth_theta")) {
        s.truth_theta = r.vector(j.at("truth_theta"), Reader::at(path, "truth_theta"));
        if (static_cast<std::size_t>(s.truth_theta.size()) != dt)
            r.fail(Reader::at(path, "truth_theta"), "needs one entry per theta prior");
    }
    if (j.contains("drift")) {
        const json& d = j.at("drift");
        const std::string p = Reader::at(path, "drift");
        if (!d.is_array()) {
            r.fail(p, "expected an array of drift descriptions");
        } else {
            for (std::size_t i = 0; i < d.size(); ++i) {
                std::string text;
                if (!r.string(d[i], p + "[" + std::to_string(i) + "]", text)) continue;
                try {
                    s.drifts.push_back(DriftFunction::parse(text));
                } catch (const std::exception& e) {
                    r.fail(p + "[" + std::to_string(i) + "]", e.what());
                }
            }
            if (s.drifts.size() != dt) r.fail(p, "needs one entry per theta prior");
        }
    }
    r.opt_unsigned(j, path, "n_sim", s.n_sim);
    r.opt_unsigned(j, path, "n_obs", s.plan.n_obs);
    r.opt_number(j, path, "noise_sd", s.plan.noise_sd);
    r.opt_unsigned(j, path, "design_seed", s.design_seed);
    r.opt_unsigned(j, path, "noise_seed", s.noise_seed);
    if (s.n_sim < 2) r.fail(Reader::at(path, "n_sim"), "must be at least 2");
    if (s.plan.n_obs < 1) r.fail(Reader::at(path, "n_obs"), "must be at least 1");
    if (s.plan.noise_sd < 0.0) r.fail(Reader::at(path, "noise_sd"), "must be non-negative");
    if (j.contains("obs_layout")) {
        std::string layout;
        if (r.string(j.at("obs_layout"), Reader::at(path, "obs_layout"), layout)) {
            if (layout == "uniform")
                s.plan.layout = ObservationLayout::uniform;
            else if (layout == "lhs")
                s.plan.layout = ObservationLayout::lhs;
            else
                r.fail(Reader::at(path, "obs_layout"), "expected uniform or lhs");
        }
    }
    if (j.contains("bisection")) {
        const json& b = j.at("bisection");
        const std::string p = Reader::at(path, "bisection");
        CriticalSearchSpec spec;
        if (r.object(b, p, {"tau_min", "tau_max", "tolerance", "max_iter"})) {
            r.opt_number(b, p, "tau_min", spec.tau_min);
            r.opt_number(b, p, "tau_max", spec.tau_max);
            r.opt_number(b, p, "tolerance", spec.tolerance);
            r.opt_unsigned(b, p, "max_iter", spec.max_iter);
            try {
                spec.validate();
                s.plan.bisection = spec;
            } catch (const std::exception& e) {
                r.fail(p, e.what());
            }
        }
    }
    const auto sim_dim = s.simulator.theta_dim();
    if (sim_dim != 0 && dt != 0 && sim_dim != dt)
        r.fail(Reader::at(path, "theta_priors"), "simulator expects " + std::to_string(sim_dim) + " parameters");
    return s;
}

CalibratorSettings parse_calibrator(Reader& r, const json& j, const std::string& path) {
    CalibratorSettings c;
    if (!r.object(j, path, {"theta0", "sample_theta", "knot_refinement"})) return c;
    if (j.contains("theta0")) {
        c.theta0 = r.vector(j.at("theta0"), Reader::at(path, "theta0"));
        for (Eigen::Index i = 0; i < c.theta0.size(); ++i)
            if (!(c.theta0[i] >= 0.0 && c.theta0[i] <= 1.0))
                r.fail(Reader::at(path, "theta0"), "entries are unit coordinates and must lie in [0,1]");
    }
    r.opt_bool(j, path, "sample_theta", c.sample_theta);
    r.opt_unsigned(j, path, "knot_refinement", c.knot_refinement);
    return c;
}

void parse_mcmc(Reader& r, const json& j, const std::string& path, McmcConfig& m) {
    if (!r.object(j, path,
                  {"iterations", "burn_in", "thin", "chains", "adapt_target", "audit_interval", "initial_field_step",
                   "initial_hyper_step", "initial_theta_step"}))
        return;
    r.opt_unsigned(j, path, "iterations", m.iterations);
    r.opt_unsigned(j, path, "burn_in", m.burn_in);
    r.opt_unsigned(j, path, "thin", m.thin);
    r.opt_unsigned(j, path, "chains", m.chains);
    r.opt_unsigned(j, path, "audit_interval", m.audit_interval);
    r.opt_number(j, path, "adapt_target", m.adapt_target);
    r.opt_number(j, path, "initial_field_step", m.initial_field_step);
    r.opt_number(j, path, "initial_hyper_step", m.initial_hyper_step);
    r.opt_number(j, path, "initial_theta_step", m.initial_theta_step);
}

void check_mcmc(Reader& r, const McmcConfig& m) {
    if (!(m.iterations > m.burn_in))
        r.fail("mcmc.burn_in", "must be less than mcmc.iterations (burn_in " + std::to_string(m.burn_in) +
                                   ", iterations " + std::to_string(m.iterations) + ")");
    if (m.thin < 1) r.fail("mcmc.thin", "must be at least 1");
    if (m.chains < 1) r.fail("mcmc.chains", "must be at least 1");
    if (!(m.adapt_target > 0.0 && m.adapt_target < 1.0)) r.fail("mcmc.adapt_target", "must lie in (0,1)");
    if (!(m.initial_field_step > 0.0)) r.fail("mcmc.initial_field_step", "must be positive");
    if (!(m.initial_hyper_step > 0.0)) r.fail("mcmc.initial_hyper_step", "must be positive");
    if (!(m.initial_theta_step > 0.0)) r.fail("mcmc.initial_theta_step", "must be positive");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration:" + join(problems)), problems_(std::move(problems)) {}

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides,
                       const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("<root>: malformed JSON: ") + e.what()});
    }
    if (overrides.seed) root["seed"] = *overrides.seed;
    if (overrides.output) root["output"] = overrides.output->string();
    if (overrides.mode) root["mode"] = to_string(*overrides.mode);

    Reader r;
    RunConfig c;
    if (!r.object(root, "",
                  {"mode", "seed", "dataset", "synthetic", "emulator", "priors", "mcmc", "koh", "integrated_delta",
                   "combined", "report", "output"}))
        throw ConfigError(r.problems);

    if (!root.contains("mode")) {
        r.fail("mode", "required (koh, integrated_delta, combined, generate, compare)");
    } else {
        std::string name;
        if (r.string(root.at("mode"), "mode", name)) {
            if (auto m = parse_mode(name))
                c.mode = *m;
            else
                r.fail("mode", "unknown mode '" + name + "' (koh, integrated_delta, combined, generate, compare)");
        }
    }

    std::uint64_t seed = 1;
    r.opt_unsigned(root, "", "seed", seed);
    c.mcmc.seed = seed;
    c.emulator.seed = seed;

    if (root.contains("dataset")) {
        std::string p;
        if (r.string(root.at("dataset"), "dataset", p)) {
            std::filesystem::path path(p);
            if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
            c.dataset = path.lexically_normal();
            root["dataset"] = c.dataset->string();
        }
    }
    if (root.contains("synthetic")) c.synthetic = parse_synthetic(r, root.at("synthetic"), "synthetic", seed);

    if (root.contains("emulator")) {
        const json& e = root.at("emulator");
        if (r.object(e, "emulator", {"kernel", "budget", "restarts", "bypass"})) {
            if (e.contains("kernel")) {
                const json& k = e.at("kernel");
                if (r.object(k, "emulator.kernel", {"variance", "lengthscales", "nugget"})) {
                    r.opt_number(k, "emulator.kernel", "variance", c.emulator.init.variance_scale);
                    r.opt_number(k, "emulator.kernel", "nugget", c.emulator.init.nugget);
                    if (k.contains("lengthscales"))
                        c.emulator.init.lengthscales = r.vector(k.at("lengthscales"), "emulator.kernel.lengthscales");
                    if (!(c.emulator.init.variance_scale > 0.0)) r.fail("emulator.kernel.variance", "must be positive");
                    if (!(c.emulator.init.nugget >= 0.0)) r.fail("emulator.kernel.nugget", "must be non-negative");
                    if (!(c.emulator.init.lengthscales.array() > 0.0).all())
                        r.fail("emulator.kernel.lengthscales", "must be positive");
                }
            }
            r.opt_unsigned(e, "emulator", "budget", c.emulator.budget);
            r.opt_unsigned(e, "emulator", "restarts", c.emulator.restarts);
            r.opt_bool(e, "emulator", "bypass", c.emulator_bypass);
        }
    }

    if (root.contains("priors")) {
        const json& p = root.at("priors");
        if (r.object(p, "priors", {"theta", "field", "additive", "noise"})) {
            if (p.contains("theta")) {
                const json& t = p.at("theta");
                if (!t.is_array())
                    r.fail("priors.theta", "expected an array of priors (unit coordinates)");
                else
                    for (std::size_t i = 0; i < t.size(); ++i)
                        if (auto pr = r.prior(t[i], "priors.theta[" + std::to_string(i) + "]")) c.priors.theta.push_back(*pr);
            }
            if (p.contains("field")) r.field_prior(p.at("field"), "priors.field", c.priors.field);
            if (p.contains("additive")) r.field_prior(p.at("additive"), "priors.additive", c.priors.additive);
            if (p.contains("noise")) {
                const json& n = p.at("noise");
                if (r.object(n, "priors.noise", {"shape", "scale"})) {
                    r.opt_number(n, "priors.noise", "shape", c.priors.noise.shape);
                    r.opt_number(n, "priors.noise", "scale", c.priors.noise.scale);
                    if (!(c.priors.noise.shape > 0.0)) r.fail("priors.noise.shape", "must be positive");
                    if (!(c.priors.noise.scale > 0.0)) r.fail("priors.noise.scale", "must be positive");
                }
            }
        }
    }

    if (root.contains("mcmc")) parse_mcmc(r, root.at("mcmc"), "mcmc", c.mcmc);
    check_mcmc(r, c.mcmc);

    if (root.contains("koh")) c.koh = parse_calibrator(r, root.at("koh"), "koh");
    if (root.contains("integrated_delta"))
        c.integrated_delta = parse_calibrator(r, root.at("integrated_delta"), "integrated_delta");
    if (root.contains("combined")) c.combined = parse_calibrator(r, root.at("combined"), "combined");

    if (root.contains("report")) {
        const json& rep = root.at("report");
        if (r.object(rep, "report", {"grid_points", "trajectories"})) {
            r.opt_unsigned(rep, "report", "grid_points", c.report.grid_points);
            r.opt_unsigned(rep, "report", "trajectories", c.report.trajectories);
            if (c.report.grid_points < 1) r.fail("report.grid_points", "must be at least 1");
        }
    }
    if (root.contains("output")) {
        std::string o;
        if (r.string(root.at("output"), "output", o)) c.output = o;
    }

    // mode-dependent requirements
    if (c.mode == RunMode::generate) {
        if (!c.synthetic) r.fail("synthetic", "required for mode generate");
        if (c.dataset) r.fail("dataset", "not used by mode generate; give a synthetic block instead");
    } else {
        if (!c.dataset && !c.synthetic) r.fail("dataset", "required (or a synthetic block)");
        if (c.dataset && c.synthetic) r.fail("dataset", "give either dataset or synthetic, not both");
    }
    if (c.mode == RunMode::compare) {
        if (!root.contains("koh")) r.fail("koh", "required for mode compare");
        if (!root.contains("integrated_delta")) r.fail("integrated_delta", "required for mode compare");
    }
    if (c.emulator_bypass && !c.synthetic) r.fail("emulator.bypass", "needs a synthetic block (the simulator to call)");

    if (!r.problems.empty()) throw ConfigError(r.problems);
    c.echo = root.dump(2) + "\n";
    return c;
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream is(path);
    if (!is) throw ConfigError({path.string() + ": cannot open"});
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), overrides, path.parent_path());
}

}  // namespace driftcal
