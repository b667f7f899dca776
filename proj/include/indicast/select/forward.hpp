#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "indicast/parallel.hpp"
#include "indicast/select/types.hpp"

namespace indicast::select {

/// Scores a subset of candidate ids by out-of-sample MAE. Must be
/// deterministic per subset and safe to call from several threads at once.
using SubsetEvaluator = std::function<double(const std::vector<std::string>&)>;

struct ForwardOptions {
    int cap = 20;
    int jobs = 1;
};

namespace detail {

inline TraceEntry evaluate_subset(const SubsetEvaluator& evaluator, std::vector<std::string> subset, int iteration) {
    TraceEntry e{std::move(subset), std::nullopt, {}, iteration, false};
    try {
        const double s = evaluator(e.subset);
        if (std::isfinite(s)) {
            e.score = s;
        } else {
            e.failure = "non-finite score";
        }
    } catch (const Error& err) {
        e.failure = err.code() + ": " + err.what();
    } catch (const std::exception& err) {
        e.failure = std::string("error: ") + err.what();
    }
    return e;
}

}  // namespace detail

/// Greedy forward selection. The empty set is scored first; each iteration
/// tries every remaining candidate appended to the current set and keeps the
/// lowest score (ties to the lowest candidate index). Runs until the cap or
/// the candidates run out, then returns the best subset seen anywhere.
inline SelectionResult forward_select(const CandidateSet& candidates, const SubsetEvaluator& evaluator,
                                      const ForwardOptions& options = {}) {
    require(options.cap >= 1, "forward selection cap must be positive");
    SelectionTrace trace;
    trace.entries.push_back(detail::evaluate_subset(evaluator, {}, 0));
    trace.entries.back().on_path = true;

    std::vector<std::string> current;
    std::vector<std::size_t> remaining(candidates.size());
    std::iota(remaining.begin(), remaining.end(), 0);

    for (int iteration = 1; iteration <= options.cap && !remaining.empty(); ++iteration) {
        std::vector<TraceEntry> batch(remaining.size());
        parallel_for(remaining.size(), options.jobs, [&](std::size_t i) {
            auto subset = current;
            subset.push_back(candidates.ids()[remaining[i]]);
            batch[i] = detail::evaluate_subset(evaluator, std::move(subset), iteration);
        });
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < batch.size(); ++i)
            if (batch[i].score && (!best || *batch[i].score < *batch[*best].score)) best = i;
        if (best) batch[*best].on_path = true;
        for (auto& e : batch) trace.entries.push_back(std::move(e));
        if (!best) break;
        current.push_back(candidates.ids()[remaining[*best]]);
        remaining.erase(remaining.begin() + static_cast<long>(*best));
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
        const auto& e = trace.entries[i];
        if (e.score && (!best || *e.score < *trace.entries[*best].score)) best = i;
    }
    if (!best) {
        std::string reasons;
        for (const auto& e : trace.entries) reasons += "\n  {" + std::to_string(e.subset.size()) + " ids}: " + e.failure;
        throw SelectionFailure("every forward-selection evaluation failed:" + reasons);
    }

    SelectionResult out;
    out.method = Method::forward;
    out.selected_ids = trace.entries[*best].subset;
    out.score = trace.entries[*best].score;
    out.trace = std::move(trace);
    return out;
}

/// Mean over traces of the best score reached at each subset size.
inline std::vector<std::pair<int, double>> score_development(const std::vector<SelectionTrace>& traces) {
    require(!traces.empty(), "score development needs at least one trace");
    std::map<int, std::pair<double, int>> sums;
    for (const auto& trace : traces) {
        std::map<int, double> best;
        for (const auto& e : trace.entries) {
            if (!e.score) continue;
            const int size = static_cast<int>(e.subset.size());
            auto it = best.find(size);
            if (it == best.end() || *e.score < it->second) best[size] = *e.score;
        }
        for (const auto& [size, score] : best) {
            sums[size].first += score;
            sums[size].second += 1;
        }
    }
    std::vector<std::pair<int, double>> out;
    for (const auto& [size, acc] : sums) out.emplace_back(size, acc.first / acc.second);
    return out;
}

}  // namespace indicast::select
