#pragma once

#include <vector>

namespace driftcal {

/// Split potential scale reduction: every chain is halved, then the classic
/// between/within variance ratio is formed over the 2m halves.
/// Requires at least 4 draws per chain; chains must have equal length.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Effective sample size pooled over chains, using Geyer's initial positive sequence
/// on the averaged autocorrelations.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Monte-Carlo standard error of the mean by non-overlapping batch means
/// (batch size floor(sqrt(n))).
double batch_means_mcse(const std::vector<double>& series);

}  // namespace driftcal
