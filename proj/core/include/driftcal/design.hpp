#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "driftcal/prior.hpp"

namespace driftcal {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    double to_unit(double v) const { return (v - lo) / (hi - lo); }
    double from_unit(double u) const { return lo + u * (hi - lo); }
};

/// Design over the application domain x followed by the calibration parameters theta.
struct DesignSpec {
    std::vector<Interval> domain_bounds;
    std::vector<Prior> theta_priors;
    std::size_t n_samples = 1;
    std::uint64_t seed = 0;

    std::size_t dim() const { return domain_bounds.size() + theta_priors.size(); }
    void validate() const;
};

/// n x d matrix in [0,1): every column hits each bin [k/n, (k+1)/n) exactly once.
Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed);

/// Bin index floor(u * n) of every entry; used to verify stratification.
Eigen::MatrixXi lhs_bins(const Eigen::MatrixXd& unit);

/// Maps unit-cube columns to physical values: domain columns linearly, theta columns
/// through the prior's inverse CDF.
Eigen::MatrixXd scale_design(const Eigen::MatrixXd& unit, const DesignSpec& spec);

/// Inverse of scale_design.
Eigen::MatrixXd unscale_design(const Eigen::MatrixXd& physical, const DesignSpec& spec);

}  // namespace driftcal
