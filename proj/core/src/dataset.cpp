#include "driftcal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "driftcal/gp.hpp"

namespace driftcal {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr double kBoundSlack = 1e-9;

bool inside(double v, const Interval& b) {
    const double slack = kBoundSlack * (1.0 + std::abs(b.lo) + std::abs(b.hi));
    return v >= b.lo - slack && v <= b.hi + slack;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& text, std::size_t line) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw DomainError("dataset line " + std::to_string(line) + ": cannot parse number '" + t + "'");
    return v;
}

std::vector<Interval> parse_bounds(const std::string& text, std::size_t line) {
    std::vector<Interval> out;
    for (const auto& part : split(text, ';')) {
        std::istringstream is(part);
        std::string a, b;
        if (!(is >> a >> b)) throw DomainError("dataset line " + std::to_string(line) + ": malformed bounds");
        out.push_back({parse_number(a, line), parse_number(b, line)});
    }
    return out;
}

std::string join_bounds(const std::vector<Interval>& bounds) {
    std::string s;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (i) s += "; ";
        s += format_double(bounds[i].lo) + " " + format_double(bounds[i].hi);
    }
    return s;
}

}  // namespace

void CalibrationDataset::validate() const {
    if (domain_bounds.empty()) throw DomainError("dataset needs at least one domain dimension");
    if (theta_bounds.empty()) throw DomainError("dataset needs at least one calibration parameter");
    for (const auto& b : domain_bounds)
        if (!(b.lo < b.hi)) throw DomainError("dataset domain bounds need lo < hi");
    for (const auto& b : theta_bounds)
        if (!(b.lo < b.hi)) throw DomainError("dataset theta bounds need lo < hi");
    if (observations.empty()) throw DomainError("dataset needs at least one observation");
    if (simulations.size() < 2) throw DomainError("dataset needs at least two simulator runs");
    if (!x_names.empty() && x_names.size() != x_dim()) throw DomainError("dataset x names do not match bounds");
    if (!theta_names.empty() && theta_names.size() != theta_dim())
        throw DomainError("dataset theta names do not match bounds");

    const auto check_x = [&](const Eigen::VectorXd& x, const std::string& where) {
        if (static_cast<std::size_t>(x.size()) != x_dim()) throw DomainError(where + ": wrong x dimension");
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!std::isfinite(x[i]) || !inside(x[i], domain_bounds[static_cast<std::size_t>(i)]))
                throw DomainError(where + ": x outside domain bounds");
    };
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const std::string where = "observation " + std::to_string(i);
        check_x(observations[i].x, where);
        if (!std::isfinite(observations[i].y)) throw DomainError(where + ": y is not finite");
    }
    for (std::size_t i = 0; i < simulations.size(); ++i) {
        const auto& s = simulations[i];
        const std::string where = "simulation " + std::to_string(i);
        check_x(s.x, where);
        if (static_cast<std::size_t>(s.theta.size()) != theta_dim())
            throw DomainError(where + ": wrong theta dimension");
        for (Eigen::Index k = 0; k < s.theta.size(); ++k)
            if (!std::isfinite(s.theta[k]) || !inside(s.theta[k], theta_bounds[static_cast<std::size_t>(k)]))
                throw DomainError(where + ": theta outside theta bounds");
        if (!std::isfinite(s.y)) throw DomainError(where + ": y is not finite");
    }
    if (truth) {
        if (static_cast<std::size_t>(truth->theta0.size()) != theta_dim())
            throw DomainError("dataset truth theta0 has the wrong dimension");
        if (truth->drifts.size() > theta_dim()) throw DomainError("dataset truth has too many drifts");
    }
}

Eigen::VectorXd CalibrationDataset::x_to_unit(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) u[i] = domain_bounds[static_cast<std::size_t>(i)].to_unit(x[i]);
    return u;
}

Eigen::VectorXd CalibrationDataset::x_from_unit(const Eigen::VectorXd& unit) const {
    Eigen::VectorXd x(unit.size());
    for (Eigen::Index i = 0; i < unit.size(); ++i)
        x[i] = domain_bounds[static_cast<std::size_t>(i)].from_unit(unit[i]);
    return x;
}

Eigen::VectorXd CalibrationDataset::theta_to_unit(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd u(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        u[i] = theta_bounds[static_cast<std::size_t>(i)].to_unit(theta[i]);
    return u;
}

Eigen::VectorXd CalibrationDataset::theta_from_unit(const Eigen::VectorXd& unit) const {
    Eigen::VectorXd t(unit.size());
    for (Eigen::Index i = 0; i < unit.size(); ++i)
        t[i] = theta_bounds[static_cast<std::size_t>(i)].from_unit(unit[i]);
    return t;
}

Eigen::MatrixXd CalibrationDataset::obs_inputs_unit() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(observations.size()), static_cast<Eigen::Index>(x_dim()));
    for (std::size_t i = 0; i < observations.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = x_to_unit(observations[i].x).transpose();
    return m;
}

Eigen::VectorXd CalibrationDataset::obs_targets() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(observations.size()));
    for (std::size_t i = 0; i < observations.size(); ++i) y[static_cast<Eigen::Index>(i)] = observations[i].y;
    return y;
}

Eigen::MatrixXd CalibrationDataset::sim_inputs_unit() const {
    const auto dx = static_cast<Eigen::Index>(x_dim());
    const auto dt = static_cast<Eigen::Index>(theta_dim());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(simulations.size()), dx + dt);
    for (std::size_t i = 0; i < simulations.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        m.row(r).head(dx) = x_to_unit(simulations[i].x).transpose();
        m.row(r).tail(dt) = theta_to_unit(simulations[i].theta).transpose();
    }
    return m;
}

Eigen::VectorXd CalibrationDataset::sim_targets() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(simulations.size()));
    for (std::size_t i = 0; i < simulations.size(); ++i) y[static_cast<Eigen::Index>(i)] = simulations[i].y;
    return y;
}

Interval prior_bounds(const Prior& p) {
    if (const auto* u = p.get_if<Uniform>()) return {u->lo, u->hi};
    return {p.quantile(1e-3), p.quantile(1.0 - 1e-3)};
}

CalibrationDataset generate_dataset(const SyntheticSimulator& sim, const DesignSpec& design,
                                    const DriftTruth& truth, const ObservationPlan& plan,
                                    std::uint64_t seed) {
    design.validate();
    if (!(plan.noise_sd >= 0.0)) throw DomainError("generate_dataset: noise_sd must be >= 0");
    if (plan.n_obs < 1) throw DomainError("generate_dataset: n_obs must be >= 1");
    if (design.domain_bounds.empty() || design.theta_priors.empty())
        throw DomainError("generate_dataset: need domain bounds and theta priors");
    const std::size_t dx = design.domain_bounds.size();
    const std::size_t dt = design.theta_priors.size();
    if (sim.theta_dim() != 0 && sim.theta_dim() != dt)
        throw DimensionError("generate_dataset: simulator expects " + std::to_string(sim.theta_dim()) +
                             " calibration parameters");
    if (static_cast<std::size_t>(truth.theta0.size()) != dt)
        throw DimensionError("generate_dataset: truth theta0 has the wrong dimension");

    CalibrationDataset data;
    data.domain_bounds = design.domain_bounds;
    for (const auto& p : design.theta_priors) data.theta_bounds.push_back(prior_bounds(p));
    if (std::holds_alternative<AnalyticDipole>(sim.model)) {
        data.x_names = {"h"};
        data.theta_names = {"mu", "nu", "l_c"};
    } else {
        for (std::size_t i = 0; i < dx; ++i) data.x_names.push_back("x" + std::to_string(i + 1));
        for (std::size_t i = 0; i < dt; ++i) data.theta_names.push_back("theta" + std::to_string(i + 1));
    }
    data.truth = truth;

    const auto run = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& theta) {
        const double exact = eval_simulator(sim, x, theta);
        if (!plan.bisection) return exact;
        return bisection_critical_search([exact](double tau) { return tau >= exact; }, *plan.bisection)
            .critical;
    };

    const Eigen::MatrixXd unit = latin_hypercube(design.n_samples, dx + dt, design.seed);
    const Eigen::MatrixXd phys = scale_design(unit, design);
    for (Eigen::Index i = 0; i < phys.rows(); ++i) {
        SimulationRun s;
        s.x = phys.row(i).head(static_cast<Eigen::Index>(dx)).transpose();
        s.theta = phys.row(i).tail(static_cast<Eigen::Index>(dt)).transpose();
        s.y = run(s.x, s.theta);
        data.simulations.push_back(std::move(s));
    }

    Rng rng(seed);
    Eigen::MatrixXd obs_unit(static_cast<Eigen::Index>(plan.n_obs), static_cast<Eigen::Index>(dx));
    if (plan.layout == ObservationLayout::uniform && dx == 1) {
        for (std::size_t i = 0; i < plan.n_obs; ++i)
            obs_unit(static_cast<Eigen::Index>(i), 0) =
                plan.n_obs == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(plan.n_obs - 1);
    } else {
        obs_unit = latin_hypercube(plan.n_obs, dx, rng());
        std::vector<Eigen::Index> order(plan.n_obs);
        for (std::size_t i = 0; i < plan.n_obs; ++i) order[i] = static_cast<Eigen::Index>(i);
        std::sort(order.begin(), order.end(),
                  [&](Eigen::Index a, Eigen::Index b) { return obs_unit(a, 0) < obs_unit(b, 0); });
        Eigen::MatrixXd sorted(obs_unit.rows(), obs_unit.cols());
        for (Eigen::Index i = 0; i < sorted.rows(); ++i) sorted.row(i) = obs_unit.row(order[static_cast<std::size_t>(i)]);
        obs_unit = sorted;
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index i = 0; i < obs_unit.rows(); ++i) {
        Observation o;
        o.x = data.x_from_unit(obs_unit.row(i).transpose());
        const Eigen::VectorXd theta = data.theta_from_unit(truth.theta_unit(obs_unit(i, 0)));
        const double eps = noise(rng);
        o.y = eval_simulator(sim, o.x, theta) + plan.noise_sd * eps;
        data.observations.push_back(std::move(o));
    }
    data.validate();
    return data;
}

void write_dataset(std::ostream& os, const CalibrationDataset& data) {
    data.validate();
    os << "# " << kDatasetFormatTag << '\n';
    os << "# x_bounds: " << join_bounds(data.domain_bounds) << '\n';
    os << "# theta_bounds: " << join_bounds(data.theta_bounds) << '\n';
    if (data.truth) {
        os << "# truth_theta0:";
        for (Eigen::Index i = 0; i < data.truth->theta0.size(); ++i) os << ' ' << format_double(data.truth->theta0[i]);
        os << '\n' << "# truth_drift: ";
        for (std::size_t i = 0; i < data.truth->drifts.size(); ++i)
            os << (i ? "; " : "") << data.truth->drifts[i].describe();
        os << '\n';
    }
    os << "role";
    for (std::size_t i = 0; i < data.x_dim(); ++i)
        os << ",x." << (data.x_names.empty() ? "x" + std::to_string(i + 1) : data.x_names[i]);
    for (std::size_t i = 0; i < data.theta_dim(); ++i)
        os << ",theta." << (data.theta_names.empty() ? "theta" + std::to_string(i + 1) : data.theta_names[i]);
    os << ",y\n";
    for (const auto& s : data.simulations) {
        os << "sim";
        for (Eigen::Index i = 0; i < s.x.size(); ++i) os << ',' << format_double(s.x[i]);
        for (Eigen::Index i = 0; i < s.theta.size(); ++i) os << ',' << format_double(s.theta[i]);
        os << ',' << format_double(s.y) << '\n';
    }
    for (const auto& o : data.observations) {
        os << "obs";
        for (Eigen::Index i = 0; i < o.x.size(); ++i) os << ',' << format_double(o.x[i]);
        for (std::size_t i = 0; i < data.theta_dim(); ++i) os << ',';
        os << ',' << format_double(o.y) << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, const CalibrationDataset& data) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open dataset file for writing: " + path.string());
    write_dataset(os, data);
    if (!os) throw std::runtime_error("failed writing dataset file: " + path.string());
}

CalibrationDataset read_dataset(std::istream& is) {
    CalibrationDataset data;
    std::string line;
    std::size_t lineno = 0;
    bool tagged = false;
    bool header = false;
    std::size_t dx = 0, dt = 0;
    std::optional<Eigen::VectorXd> theta0;
    std::vector<DriftFunction> drifts;

    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::string body = trim(t.substr(1));
            const auto colon = body.find(':');
            if (body == kDatasetFormatTag) {
                tagged = true;
            } else if (colon != std::string::npos) {
                const std::string key = trim(body.substr(0, colon));
                const std::string value = trim(body.substr(colon + 1));
                if (key == "x_bounds") {
                    data.domain_bounds = parse_bounds(value, lineno);
                } else if (key == "theta_bounds") {
                    data.theta_bounds = parse_bounds(value, lineno);
                } else if (key == "truth_theta0") {
                    std::istringstream vs(value);
                    std::vector<double> v;
                    std::string tok;
                    while (vs >> tok) v.push_back(parse_number(tok, lineno));
                    theta0 = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
                } else if (key == "truth_drift") {
                    for (const auto& part : split(value, ';')) drifts.push_back(DriftFunction::parse(trim(part)));
                }
            }
            continue;
        }
        const auto cells = split(t, ',');
        if (!header) {
            if (!tagged) throw DomainError("dataset is missing the '# " + std::string(kDatasetFormatTag) + "' tag");
            if (cells.empty() || trim(cells[0]) != "role" || trim(cells.back()) != "y")
                throw DomainError("dataset line " + std::to_string(lineno) + ": header must be role,...,y");
            for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
                const std::string c = trim(cells[i]);
                if (c.rfind("x.", 0) == 0) {
                    if (dt > 0) throw DomainError("dataset header: x columns must precede theta columns");
                    data.x_names.push_back(c.substr(2));
                    ++dx;
                } else if (c.rfind("theta.", 0) == 0) {
                    data.theta_names.push_back(c.substr(6));
                    ++dt;
                } else {
                    throw DomainError("dataset header: unknown column '" + c + "'");
                }
            }
            header = true;
            continue;
        }
        if (cells.size() != dx + dt + 2)
            throw DomainError("dataset line " + std::to_string(lineno) + ": expected " +
                              std::to_string(dx + dt + 2) + " cells");
        const std::string role = trim(cells[0]);
        Eigen::VectorXd x(static_cast<Eigen::Index>(dx));
        for (std::size_t i = 0; i < dx; ++i) x[static_cast<Eigen::Index>(i)] = parse_number(cells[1 + i], lineno);
        const double y = parse_number(cells.back(), lineno);
        if (role == "sim") {
            Eigen::VectorXd th(static_cast<Eigen::Index>(dt));
            for (std::size_t i = 0; i < dt; ++i)
                th[static_cast<Eigen::Index>(i)] = parse_number(cells[1 + dx + i], lineno);
            data.simulations.push_back({std::move(x), std::move(th), y});
        } else if (role == "obs") {
            for (std::size_t i = 0; i < dt; ++i)
                if (!trim(cells[1 + dx + i]).empty())
                    throw DomainError("dataset line " + std::to_string(lineno) + ": obs rows leave theta empty");
            data.observations.push_back({std::move(x), y});
        } else {
            throw DomainError("dataset line " + std::to_string(lineno) + ": unknown role '" + role + "'");
        }
    }
    if (!header) throw DomainError("dataset has no header row");
    if (data.domain_bounds.size() != dx || data.theta_bounds.size() != dt)
        throw DomainError("dataset bounds do not match the header columns");
    if (theta0) data.truth = DriftTruth{*theta0, drifts};
    data.validate();
    return data;
}

CalibrationDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open dataset file: " + path.string());
    return read_dataset(is);
}

}  // namespace driftcal
