#include "driftcal/simulator.hpp"

#include <cmath>
#include <sstream>

#include "driftcal/gp.hpp"

namespace driftcal {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(std::span<const double> v, const char* what) {
    for (double e : v)
        if (!std::isfinite(e)) throw DomainError(std::string("simulator input ") + what + " is not finite");
}

double coeff(const std::vector<double>& c, std::size_t k) { return k < c.size() ? c[k] : 0.0; }

}  // namespace

double AnalyticDipole::leading_term(double h, double mu, double nu) const {
    return amplitude * mu / ((1.0 - nu) * h);
}

double AnalyticDipole::core_correction(double h, double mu, double nu, double lc) const {
    return -core_weight * leading_term(h, mu, nu) * lc * lc / (h * h + lc * lc);
}

std::string SyntheticSimulator::kind() const {
    return std::visit(overloaded{
                          [](const AnalyticDipole&) { return std::string("analytic_dipole"); },
                          [](const DriftTestbed&) { return std::string("drift_testbed"); },
                          [](const UserTable&) { return std::string("user_table"); },
                      },
                      model);
}

std::size_t SyntheticSimulator::theta_dim() const {
    return std::visit(overloaded{
                          [](const AnalyticDipole&) -> std::size_t { return 3; },
                          [](const DriftTestbed&) -> std::size_t { return 0; },
                          [](const UserTable&) -> std::size_t { return 0; },
                      },
                      model);
}

double eval_simulator(const SyntheticSimulator& sim, std::span<const double> x,
                      std::span<const double> theta) {
    require_finite(x, "x");
    require_finite(theta, "theta");
    if (!sim.allow_extrapolation) {
        for (std::size_t i = 0; i < std::min(x.size(), sim.x_domain.size()); ++i)
            if (x[i] < sim.x_domain[i].lo || x[i] > sim.x_domain[i].hi)
                throw DomainError("x outside the declared simulator domain");
        for (std::size_t i = 0; i < std::min(theta.size(), sim.theta_domain.size()); ++i)
            if (theta[i] < sim.theta_domain[i].lo || theta[i] > sim.theta_domain[i].hi)
                throw DomainError("theta outside the declared simulator domain");
    }

    return std::visit(
        overloaded{
            [&](const AnalyticDipole& d) {
                if (x.size() != 1 || theta.size() != 3)
                    throw DimensionError("analytic_dipole expects x=(h) and theta=(mu, nu, l_c)");
                const double h = x[0], mu = theta[0], nu = theta[1], lc = theta[2];
                if (!(h > 0.0)) throw DomainError("analytic_dipole needs h > 0");
                if (!(nu < 1.0)) throw DomainError("analytic_dipole needs nu < 1");
                return d.leading_term(h, mu, nu) + d.core_correction(h, mu, nu, lc);
            },
            [&](const DriftTestbed& t) {
                const double x0 = x.empty() ? 0.0 : x[0];
                double y = t.constant + t.x_coeff * x0;
                for (std::size_t k = 0; k < theta.size(); ++k)
                    y += (coeff(t.linear, k) + coeff(t.x_linear, k) * x0) * theta[k] +
                         coeff(t.quadratic, k) * theta[k] * theta[k];
                return y;
            },
            [&](const UserTable& t) {
                const auto d = static_cast<Eigen::Index>(x.size() + theta.size());
                if (t.inputs.cols() != d) throw DimensionError("user_table: dimension mismatch");
                for (Eigen::Index r = 0; r < t.inputs.rows(); ++r) {
                    bool hit = true;
                    for (Eigen::Index c = 0; c < d && hit; ++c) {
                        const auto cu = static_cast<std::size_t>(c);
                        const double v = cu < x.size() ? x[cu] : theta[cu - x.size()];
                        hit = std::abs(t.inputs(r, c) - v) <=
                              t.match_tolerance * (1.0 + std::abs(v));
                    }
                    if (hit) return t.outputs[r];
                }
                throw DomainError("user_table: no tabulated run matches the requested inputs");
            },
        },
        sim.model);
}

double eval_simulator(const SyntheticSimulator& sim, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& theta) {
    return eval_simulator(sim, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                          std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
}

double DriftFunction::operator()(double x_unit) const {
    return std::visit(overloaded{
                          [](const ZeroDrift&) { return 0.0; },
                          [x_unit](const ExpDecayDrift& e) {
                              return e.amplitude * std::exp(-x_unit / e.length);
                          },
                          [x_unit](const LinearDrift& l) { return l.intercept + l.slope * x_unit; },
                      },
                      shape);
}

std::string DriftFunction::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const ZeroDrift&) { os << "zero"; },
                   [&](const ExpDecayDrift& e) { os << "exp_decay " << e.amplitude << ' ' << e.length; },
                   [&](const LinearDrift& l) { os << "linear " << l.intercept << ' ' << l.slope; },
               },
               shape);
    return os.str();
}

DriftFunction DriftFunction::parse(const std::string& text) {
    std::istringstream is(text);
    std::string kind;
    is >> kind;
    if (kind == "zero") return {ZeroDrift{}};
    double a = 0.0, b = 0.0;
    if (!(is >> a >> b)) throw DomainError("drift '" + text + "' needs two coefficients");
    if (kind == "exp_decay") {
        if (!(b > 0.0)) throw DomainError("exp_decay drift needs a positive length");
        return {ExpDecayDrift{a, b}};
    }
    if (kind == "linear") return {LinearDrift{a, b}};
    throw DomainError("unknown drift kind '" + kind + "'");
}

Eigen::VectorXd DriftTruth::theta_unit(double x_unit) const {
    Eigen::VectorXd t = theta0;
    for (Eigen::Index k = 0; k < t.size(); ++k)
        if (static_cast<std::size_t>(k) < drifts.size()) t[k] += drifts[static_cast<std::size_t>(k)](x_unit);
    return t;
}

}  // namespace driftcal
