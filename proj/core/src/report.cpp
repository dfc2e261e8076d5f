#include "driftcal/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "driftcal/diagnostics.hpp"
#include "json.hpp"

namespace driftcal {

using ordered_json = nlohmann::ordered_json;

double MethodReport::max_rhat() const {
    double m = 0.0;
    for (const auto& [name, v] : rhat) m = std::max(m, v);
    return m;
}

void MethodReport::validate() const {
    if (!(coverage >= 0.0 && coverage <= 1.0)) throw DomainError(method + ": coverage outside [0,1]");
    for (const auto& [name, v] : acceptance)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError(method + ": acceptance rate of " + name + " outside [0,1]");
}

const MethodReport& RunReport::method(const std::string& name) const {
    for (const auto& m : methods)
        if (m.method == name) return m;
    throw DomainError("report has no method " + name);
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw DimensionError("rmse: length mismatch");
    if (a.size() == 0) throw DomainError("rmse: empty vectors");
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

namespace {

std::ofstream open(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

}  // namespace

void emit_plot_data(const PosteriorSamples& samples, const PredictiveSummary& predictive,
                    const Eigen::MatrixXd& grid, const CalibrationDataset& data, const Standardizer& target,
                    const std::filesystem::path& out_dir, std::size_t n_trajectories) {
    if (samples.draws() == 0) throw DomainError("emit_plot_data: no stored draws");
    if (predictive.mean.size() != grid.rows()) throw DimensionError("emit_plot_data: predictive and grid differ");
    std::filesystem::create_directories(out_dir);
    const Eigen::Index g = grid.rows();
    const std::string xname = data.x_names.empty() ? "x" : data.x_names.front();

    {
        auto os = open(out_dir / "predictive_band.csv");
        os << "x_unit," << xname << ",mean,sd,lower1,upper1,lower2,upper2,eta_mean,eta_sd\n";
        const Eigen::VectorXd sd = predictive.sd();
        const Eigen::VectorXd eta_sd = predictive.eta_sd();
        for (Eigen::Index i = 0; i < g; ++i) {
            const double m = predictive.mean[i];
            os << format_double(grid(i, 0)) << ',' << format_double(data.domain_bounds.front().from_unit(grid(i, 0)))
               << ',' << format_double(m) << ',' << format_double(sd[i]) << ',' << format_double(m - sd[i]) << ','
               << format_double(m + sd[i]) << ',' << format_double(m - 2.0 * sd[i]) << ','
               << format_double(m + 2.0 * sd[i]) << ',' << format_double(predictive.eta_mean[i]) << ','
               << format_double(eta_sd[i]) << '\n';
        }
    }

    const auto fields = summarize_fields(samples, grid, n_trajectories);
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto& s = fields[f];
        const bool additive = f >= samples.delta.size();
        const double scale = additive ? target.scale : data.theta_bounds.at(f).width();
        auto os = open(out_dir / ("drift_" + s.name + ".csv"));
        os << "x_unit," << xname << ",mean,sd,lower2,upper2";
        for (Eigen::Index t = 0; t < s.trajectories.rows(); ++t) os << ",draw" << t;
        os << '\n';
        for (Eigen::Index i = 0; i < g; ++i) {
            const double m = s.mean[i] * scale;
            const double sd = s.sd[i] * scale;
            os << format_double(grid(i, 0)) << ',' << format_double(data.domain_bounds.front().from_unit(grid(i, 0)))
               << ',' << format_double(m) << ',' << format_double(sd) << ',' << format_double(m - 2.0 * sd) << ','
               << format_double(m + 2.0 * sd);
            for (Eigen::Index t = 0; t < s.trajectories.rows(); ++t) os << ',' << format_double(s.trajectories(t, i) * scale);
            os << '\n';
        }
    }
}

void chain_diagnostics(const PosteriorSamples& samples, MethodReport& report) {
    const std::size_t per_chain = samples.chain_lengths.empty() ? 0 : samples.chain_lengths.front();
    for (auto n : samples.chain_lengths)
        if (n != per_chain || n < 4) return;
    auto add = [&](const std::string& name, const Eigen::VectorXd& column) {
        const auto chains = samples.by_chain(column);
        report.rhat.emplace_back(name, split_rhat(chains));
        report.ess.emplace_back(name, effective_sample_size(chains));
    };
    add("sigma2", samples.sigma2);
    add("log_post", samples.log_post);
    for (const auto& f : samples.delta) {
        add("variance." + f.name, f.hyper.col(0));
        add("lengthscale." + f.name, f.hyper.col(1));
    }
    if (samples.additive) {
        add("variance.delta_eta", samples.additive->hyper.col(0));
        add("lengthscale.delta_eta", samples.additive->hyper.col(1));
    }
    bool theta_moves = false;
    for (Eigen::Index k = 0; k < samples.theta.cols(); ++k)
        theta_moves = theta_moves || samples.theta.col(k).maxCoeff() > samples.theta.col(k).minCoeff();
    if (theta_moves)
        for (Eigen::Index k = 0; k < samples.theta.cols(); ++k)
            add("theta." + samples.theta_names.at(static_cast<std::size_t>(k)), samples.theta.col(k));
    for (const auto& f : samples.delta)
        for (Eigen::Index i = 0; i < f.values.cols(); ++i)
            add("delta_" + f.name + ".knot" + std::to_string(i), f.values.col(i));
    if (samples.additive)
        for (Eigen::Index i = 0; i < samples.additive->values.cols(); ++i)
            add("delta_eta.knot" + std::to_string(i), samples.additive->values.col(i));
}

namespace {

ordered_json pairs(const std::vector<std::pair<std::string, double>>& v) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, x] : v) j[k] = std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr);
    return j;
}

std::vector<std::pair<std::string, double>> read_pairs(const ordered_json& j) {
    std::vector<std::pair<std::string, double>> out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out.emplace_back(it.key(), it.value().is_null() ? std::nan("") : it.value().get<double>());
    return out;
}

}  // namespace

std::string report_json(const RunReport& report) {
    ordered_json j;
    j["format"] = kRunFormatTag;
    j["mode"] = report.mode;
    j["seed"] = report.seed;
    j["n_sim"] = report.n_sim;
    j["n_obs"] = report.n_obs;
    ordered_json methods = ordered_json::array();
    for (const auto& m : report.methods) {
        m.validate();
        ordered_json e;
        e["method"] = m.method;
        e["draws"] = m.draws;
        e["rmse"] = m.rmse;
        e["eta_rmse"] = m.eta_rmse;
        e["coverage_2sd"] = m.coverage;
        e["eta_rmse_truth_low_x"] = m.eta_rmse_truth_low_x ? ordered_json(*m.eta_rmse_truth_low_x) : ordered_json(nullptr);
        e["acceptance"] = pairs(m.acceptance);
        e["max_rhat"] = m.rhat.empty() ? ordered_json(nullptr) : ordered_json(m.max_rhat());
        e["rhat"] = pairs(m.rhat);
        e["ess"] = pairs(m.ess);
        e["extrapolation"] = {{"evaluations", m.extrapolation.evaluations},
                              {"extrapolated", m.extrapolation.extrapolated},
                              {"max_distance", m.extrapolation.max_distance},
                              {"non_finite", m.extrapolation.non_finite}};
        e["audits"] = m.audits;
        methods.push_back(std::move(e));
    }
    j["methods"] = std::move(methods);
    return j.dump(2) + "\n";
}

std::string timing_json(const RunReport& report) {
    ordered_json j;
    j["wall_seconds"] = report.wall_seconds;
    ordered_json m = ordered_json::object();
    for (const auto& r : report.methods) m[r.method] = r.wall_seconds;
    j["methods"] = std::move(m);
    return j.dump(2) + "\n";
}

RunReport parse_report(const std::string& json_text) {
    const ordered_json j = ordered_json::parse(json_text);
    if (j.value("format", std::string()) != kRunFormatTag) throw DomainError("not a driftcal run report");
    RunReport r;
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_sim = j.at("n_sim").get<std::size_t>();
    r.n_obs = j.at("n_obs").get<std::size_t>();
    for (const auto& e : j.at("methods")) {
        MethodReport m;
        m.method = e.at("method").get<std::string>();
        m.draws = e.at("draws").get<std::size_t>();
        m.rmse = e.at("rmse").get<double>();
        m.eta_rmse = e.at("eta_rmse").get<double>();
        m.coverage = e.at("coverage_2sd").get<double>();
        if (!e.at("eta_rmse_truth_low_x").is_null()) m.eta_rmse_truth_low_x = e.at("eta_rmse_truth_low_x").get<double>();
        m.acceptance = read_pairs(e.at("acceptance"));
        m.rhat = read_pairs(e.at("rhat"));
        m.ess = read_pairs(e.at("ess"));
        const auto& x = e.at("extrapolation");
        m.extrapolation.evaluations = x.at("evaluations").get<std::size_t>();
        m.extrapolation.extrapolated = x.at("extrapolated").get<std::size_t>();
        m.extrapolation.max_distance = x.at("max_distance").get<double>();
        m.extrapolation.non_finite = x.at("non_finite").get<std::size_t>();
        m.audits = e.at("audits").get<std::size_t>();
        r.methods.push_back(std::move(m));
    }
    return r;
}

std::string format_report(const RunReport& report) {
    std::ostringstream os;
    os << "mode " << report.mode << "  seed " << report.seed << "  n_sim " << report.n_sim << "  n_obs "
       << report.n_obs << '\n';
    if (report.methods.empty()) return os.str();
    os << std::left << std::setw(18) << "method" << std::right << std::setw(8) << "draws" << std::setw(12) << "rmse"
       << std::setw(12) << "eta_rmse" << std::setw(12) << "low_x_err" << std::setw(10) << "cover2sd" << std::setw(10)
       << "max_rhat" << std::setw(16) << "extrapolated" << '\n';
    os << std::setprecision(4);
    for (const auto& m : report.methods) {
        os << std::left << std::setw(18) << m.method << std::right << std::setw(8) << m.draws << std::setw(12) << m.rmse
           << std::setw(12) << m.eta_rmse << std::setw(12);
        if (m.eta_rmse_truth_low_x)
            os << *m.eta_rmse_truth_low_x;
        else
            os << "-";
        os << std::setw(10) << m.coverage << std::setw(10) << m.max_rhat() << std::setw(16)
           << (std::to_string(m.extrapolation.extrapolated) + "/" + std::to_string(m.extrapolation.evaluations)) << '\n';
    }
    for (const auto& m : report.methods) {
        os << m.method << " acceptance:";
        for (const auto& [name, rate] : m.acceptance) os << ' ' << name << '=' << rate;
        os << '\n';
    }
    return os.str();
}

}  // namespace driftcal
