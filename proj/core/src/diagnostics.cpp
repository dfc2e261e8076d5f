#include "driftcal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "driftcal/gp.hpp"

namespace driftcal {

namespace {

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

void check_equal_lengths(const std::vector<std::vector<double>>& chains, std::size_t min_len) {
    if (chains.empty()) throw DomainError("need at least one chain");
    for (const auto& c : chains) {
        if (c.size() != chains.front().size()) throw DimensionError("chains must have equal length");
        if (c.size() < min_len) throw DomainError("chains are too short for this diagnostic");
    }
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
    check_equal_lengths(chains, 4);
    const std::size_t half = chains.front().size() / 2;
    std::vector<std::vector<double>> parts;
    for (const auto& c : chains) {
        // drop the middle draw of odd-length chains
        parts.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        parts.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
    }
    const double n = static_cast<double>(half);
    std::vector<double> means;
    double w = 0.0;
    for (const auto& p : parts) {
        means.push_back(mean(p));
        w += variance(p);
    }
    w /= static_cast<double>(parts.size());
    const double b = n * variance(means);
    if (w == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
    check_equal_lengths(chains, 4);
    const std::size_t n = chains.front().size();
    const double m = static_cast<double>(chains.size());

    std::vector<double> means;
    double w = 0.0;
    for (const auto& c : chains) {
        means.push_back(mean(c));
        w += variance(c);
    }
    w /= m;
    const double b = chains.size() > 1 ? static_cast<double>(n) * variance(means) : 0.0;
    const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + b / static_cast<double>(n);
    if (var_plus <= 0.0) return m * static_cast<double>(n);

    // autocovariance at lag t averaged over chains (biased estimator)
    auto autocov = [&](std::size_t lag) {
        double total = 0.0;
        for (std::size_t c = 0; c < chains.size(); ++c) {
            const auto& x = chains[c];
            double s = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - means[c]) * (x[i + lag] - means[c]);
            total += s / static_cast<double>(n);
        }
        return total / m;
    };
    auto rho = [&](std::size_t lag) { return 1.0 - (w - autocov(lag)) / var_plus; };

    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + 1 < n; t += 2) {
        double pair = rho(t) + rho(t + 1);
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair);  // initial monotone sequence
        tau += 2.0 * pair;
        prev_pair = pair;
    }
    tau = std::max(tau, 1.0 / std::log10(m * static_cast<double>(n) + 10.0));
    return m * static_cast<double>(n) / tau;
}

double batch_means_mcse(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 4) throw DomainError("batch means need at least 4 draws");
    const auto size = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const std::size_t batches = n / size;
    std::vector<double> bm;
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < size; ++i) s += series[b * size + i];
        bm.push_back(s / static_cast<double>(size));
    }
    return std::sqrt(static_cast<double>(size) * variance(bm) / static_cast<double>(n));
}

}  // namespace driftcal
