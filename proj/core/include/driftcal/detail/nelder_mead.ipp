#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace driftcal::detail {

template <typename F>
SimplexResult nelder_mead(F&& objective, const Eigen::VectorXd& start, double initial_step,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          std::size_t budget) {
    const Eigen::Index n = start.size();
    const auto clamp = [&](Eigen::VectorXd p) {
        return Eigen::VectorXd(p.cwiseMax(lower).cwiseMin(upper));
    };

    std::size_t evaluations = 0;
    const auto eval = [&](const Eigen::VectorXd& p) {
        ++evaluations;
        const double v = objective(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(clamp(start));
    vals.push_back(eval(pts.back()));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd p = start;
        p[i] += initial_step;
        if (p[i] > upper[i]) p[i] = start[i] - initial_step;
        pts.push_back(clamp(p));
        vals.push_back(eval(pts.back()));
    }

    std::vector<std::size_t> order(pts.size());
    while (evaluations < budget) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        if (std::abs(vals[worst] - vals[best]) < 1e-10 * (1.0 + std::abs(vals[best]))) {
            double spread = 0.0;
            for (const auto& p : pts) spread = std::max(spread, (p - pts[best]).cwiseAbs().maxCoeff());
            if (spread < 1e-8) break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = clamp(centroid + (centroid - pts[worst]));
        const double f_r = eval(reflected);
        if (f_r < vals[best]) {
            const Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - pts[worst]));
            const double f_e = eval(expanded);
            if (f_e < f_r) {
                pts[worst] = expanded;
                vals[worst] = f_e;
            } else {
                pts[worst] = reflected;
                vals[worst] = f_r;
            }
            continue;
        }
        if (f_r < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = f_r;
            continue;
        }
        const bool outside = f_r < vals[worst];
        const Eigen::VectorXd contracted =
            outside ? clamp(centroid + 0.5 * (reflected - centroid))
                    : clamp(centroid + 0.5 * (pts[worst] - centroid));
        const double f_c = eval(contracted);
        if (f_c < std::min(f_r, vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = f_c;
            continue;
        }
        // shrink toward best
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = clamp(pts[best] + 0.5 * (pts[i] - pts[best]));
            vals[i] = eval(pts[i]);
        }
    }

    const auto it = std::min_element(vals.begin(), vals.end());
    const auto idx = static_cast<std::size_t>(std::distance(vals.begin(), it));
    return {pts[idx], vals[idx], evaluations};
}

}  // namespace driftcal::detail
