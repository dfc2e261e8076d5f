#include "driftcal/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftcal/gp.hpp"

namespace driftcal {

void DesignSpec::validate() const {
    if (n_samples < 1) throw DomainError("design needs n_samples >= 1");
    for (const auto& b : domain_bounds)
        if (!(b.lo < b.hi)) throw DomainError("domain bounds need lo < hi");
}

Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n == 0 || d == 0) throw DomainError("latin_hypercube needs n >= 1 and d >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<std::size_t> perm(n);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const double width = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double bin = static_cast<double>(perm[i]);
            double u = (bin + jitter(rng)) * width;
            // rounding may land on the upper edge of the bin
            const double upper = (bin + 1.0) * width;
            if (u >= upper) u = std::nextafter(upper, 0.0);
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u;
        }
    }
    return out;
}

Eigen::MatrixXi lhs_bins(const Eigen::MatrixXd& unit) {
    const double n = static_cast<double>(unit.rows());
    Eigen::MatrixXi bins(unit.rows(), unit.cols());
    for (Eigen::Index j = 0; j < unit.cols(); ++j)
        for (Eigen::Index i = 0; i < unit.rows(); ++i)
            bins(i, j) = static_cast<int>(std::floor(unit(i, j) * n));
    return bins;
}

Eigen::MatrixXd scale_design(const Eigen::MatrixXd& unit, const DesignSpec& spec) {
    spec.validate();
    if (static_cast<std::size_t>(unit.cols()) != spec.dim())
        throw DimensionError("scale_design: design has " + std::to_string(unit.cols()) +
                             " columns, spec has " + std::to_string(spec.dim()));
    const auto dx = static_cast<Eigen::Index>(spec.domain_bounds.size());
    Eigen::MatrixXd out(unit.rows(), unit.cols());
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
        for (Eigen::Index j = 0; j < unit.cols(); ++j) {
            const double u = unit(i, j);
            if (!(u >= 0.0 && u < 1.0))
                throw DomainError("scale_design: unit value " + std::to_string(u) +
                                  " outside [0,1) at row " + std::to_string(i));
            out(i, j) = j < dx ? spec.domain_bounds[static_cast<std::size_t>(j)].from_unit(u)
                               : spec.theta_priors[static_cast<std::size_t>(j - dx)].quantile(u);
        }
    }
    return out;
}

Eigen::MatrixXd unscale_design(const Eigen::MatrixXd& physical, const DesignSpec& spec) {
    spec.validate();
    if (static_cast<std::size_t>(physical.cols()) != spec.dim())
        throw DimensionError("unscale_design: column count mismatch");
    const auto dx = static_cast<Eigen::Index>(spec.domain_bounds.size());
    Eigen::MatrixXd out(physical.rows(), physical.cols());
    for (Eigen::Index i = 0; i < physical.rows(); ++i)
        for (Eigen::Index j = 0; j < physical.cols(); ++j)
            out(i, j) = j < dx ? spec.domain_bounds[static_cast<std::size_t>(j)].to_unit(physical(i, j))
                               : spec.theta_priors[static_cast<std::size_t>(j - dx)].cdf(physical(i, j));
    return out;
}

}  // namespace driftcal
