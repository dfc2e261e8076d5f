#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include "driftcal/gp.hpp"

namespace driftcal {

/// Bracket [tau_min, tau_max] and the stress resolution of a critical-stress search.
struct CriticalSearchSpec {
    double tau_min = 0.0;
    double tau_max = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iter = 64;
    /// Evaluate the predicate at both ends first; these calls are not counted as steps.
    bool check_bracket = true;

    void validate() const;
};

struct CriticalSearchResult {
    double critical = 0.0;  // last applied stress
    double lower = 0.0;     // highest stress known not to move
    double upper = 0.0;     // lowest stress known to move
    std::size_t evaluations = 0;
};

class BracketError : public DomainError {
public:
    using DomainError::DomainError;
};

class ResolutionError : public std::runtime_error {
public:
    ResolutionError(const std::string& what, double lower, double upper)
        : std::runtime_error(what), lower_(lower), upper_(upper) {}
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

private:
    double lower_;
    double upper_;
};

/// max(1, ceil(log2((tau_max - tau_min) / tolerance)))
std::size_t bisection_evaluation_bound(const CriticalSearchSpec& spec);

/// Halving search for the smallest stress at which `moves` turns true.
///
/// The first stress applied is the bracket midpoint; each subsequent stress moves up or
/// down by half of the remaining span. `moves` must be monotone: false below the
/// threshold and true at or above it. The returned stress is within `tolerance` of the
/// threshold.
CriticalSearchResult bisection_critical_search(const std::function<bool(double)>& moves,
                                               const CriticalSearchSpec& spec);

}  // namespace driftcal
