#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "indicast/errors.hpp"
#include "indicast/series.hpp"

namespace indicast::select {

/// A training-range frame together with the indicator ids a method may pick from.
class CandidateSet {
public:
    explicit CandidateSet(AlignedFrame frame) : frame_(std::move(frame)), ids_(frame_.indicator_ids()) {}

    CandidateSet(AlignedFrame frame, std::vector<std::string> ids) : frame_(std::move(frame)), ids_(std::move(ids)) {
        std::set<std::string> seen;
        for (const auto& id : ids_) {
            frame_.indicator(id);  // throws UnknownId
            require(seen.insert(id).second, "duplicate candidate id '" + id + "'");
        }
    }

    const AlignedFrame& frame() const noexcept { return frame_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::size_t size() const noexcept { return ids_.size(); }
    const MonthlySeries& series(std::size_t i) const { return frame_.indicator(ids_[i]); }

    std::optional<std::size_t> index_of(const std::string& id) const {
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (ids_[i] == id) return i;
        return std::nullopt;
    }

private:
    AlignedFrame frame_;
    std::vector<std::string> ids_;
};

enum class Method { none, correlation, lasso, forward, manual };

inline std::string method_tag(Method m) {
    switch (m) {
        case Method::none: return "none";
        case Method::correlation: return "correlation";
        case Method::lasso: return "lasso";
        case Method::forward: return "forward";
        case Method::manual: return "manual";
    }
    return "none";
}

inline Method method_from_tag(const std::string& tag) {
    for (auto m : {Method::none, Method::correlation, Method::lasso, Method::forward, Method::manual})
        if (method_tag(m) == tag) return m;
    throw ParseError("unknown selection method '" + tag + "'");
}

struct TraceEntry {
    std::vector<std::string> subset;
    std::optional<double> score;  // empty when the evaluator failed
    std::string failure;
    int iteration = 0;       // 0 for the empty set
    bool on_path = false;    // chosen as the greedy step of its iteration

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Every subset evaluation in the order it was made.
struct SelectionTrace {
    std::vector<TraceEntry> entries;

    friend bool operator==(const SelectionTrace&, const SelectionTrace&) = default;
};

struct SelectionResult {
    Method method = Method::none;
    std::vector<std::string> selected_ids;
    std::optional<double> score;
    std::optional<SelectionTrace> trace;
    /// Named per-candidate statistics, e.g. {"target_corr/x3", 0.81} or {"coef/x3", -0.2}.
    std::vector<std::pair<std::string, double>> diagnostics;

    friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

}  // namespace indicast::select
