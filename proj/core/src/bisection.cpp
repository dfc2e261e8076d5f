#include "driftcal/bisection.hpp"

#include <cmath>
#include <sstream>

namespace driftcal {

void CriticalSearchSpec::validate() const {
    if (!(tau_min < tau_max)) throw DomainError("critical search needs tau_min < tau_max");
    if (!(tolerance > 0.0)) throw DomainError("critical search needs tolerance > 0");
}

std::size_t bisection_evaluation_bound(const CriticalSearchSpec& spec) {
    spec.validate();
    const double ratio = (spec.tau_max - spec.tau_min) / spec.tolerance;
    if (ratio <= 1.0) return 1;
    return static_cast<std::size_t>(std::ceil(std::log2(ratio)));
}

CriticalSearchResult bisection_critical_search(const std::function<bool(double)>& moves,
                                               const CriticalSearchSpec& spec) {
    spec.validate();
    if (spec.check_bracket) {
        if (moves(spec.tau_min))
            throw BracketError("bracket does not straddle the threshold: motion at tau_min");
        if (!moves(spec.tau_max))
            throw BracketError("bracket does not straddle the threshold: no motion at tau_max");
    }

    CriticalSearchResult r;
    r.lower = spec.tau_min;
    r.upper = spec.tau_max;
    // rounding in hi - lo must not cost an extra step
    const double stop = spec.tolerance * (1.0 + 1e-12);
    do {
        if (r.evaluations >= spec.max_iter) {
            std::ostringstream os;
            os.precision(17);
            os << "critical search did not reach resolution " << spec.tolerance << " within "
               << spec.max_iter << " steps; bracket [" << r.lower << ", " << r.upper << "]";
            throw ResolutionError(os.str(), r.lower, r.upper);
        }
        const double applied = 0.5 * (r.lower + r.upper);
        ++r.evaluations;
        r.critical = applied;
        if (moves(applied))
            r.upper = applied;
        else
            r.lower = applied;
    } while (r.upper - r.lower > stop);
    return r;
}

}  // namespace driftcal
