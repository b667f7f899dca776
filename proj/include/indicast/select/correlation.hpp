#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

#include "indicast/select/types.hpp"

namespace indicast::select {

struct CorrelationThresholds {
    double target = 0.75;
    double mutual = 0.30;
};

/// Two-stage filter on absolute Pearson correlations: keep candidates that
/// track the target, then admit them strongest first while they stay weakly
/// correlated with everything already admitted.
inline SelectionResult correlation_select(const CandidateSet& candidates, CorrelationThresholds thresholds = {}) {
    const auto target = candidates.frame().target().dense();
    const std::size_t k = candidates.size();
    std::vector<std::vector<double>> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = candidates.series(i).dense();

    SelectionResult out;
    out.method = Method::correlation;
    std::vector<double> target_corr(k);
    for (std::size_t i = 0; i < k; ++i) {
        target_corr[i] = pearson_correlation(x[i], target);
        out.diagnostics.emplace_back("target_corr/" + candidates.ids()[i], target_corr[i]);
    }
    std::vector<std::vector<double>> pair(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            pair[i][j] = pair[j][i] = pearson_correlation(x[i], x[j]);
            out.diagnostics.emplace_back("pair_corr/" + candidates.ids()[i] + "/" + candidates.ids()[j], pair[i][j]);
        }

    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < k; ++i)
        if (std::abs(target_corr[i]) >= thresholds.target) survivors.push_back(i);
    std::stable_sort(survivors.begin(), survivors.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(target_corr[a]) > std::abs(target_corr[b]); });

    std::vector<std::size_t> admitted;
    for (auto i : survivors) {
        const bool independent = std::all_of(admitted.begin(), admitted.end(),
                                             [&](std::size_t a) { return std::abs(pair[i][a]) < thresholds.mutual; });
        if (independent) admitted.push_back(i);
    }
    for (auto i : admitted) out.selected_ids.push_back(candidates.ids()[i]);
    return out;
}

}  // namespace indicast::select
