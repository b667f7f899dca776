#pragma once

#include <set>

#include "indicast/select/types.hpp"

namespace indicast::select {

/// Checks a hand-picked list against the candidates; duplicates are dropped, order kept.
inline SelectionResult validate_manual(const CandidateSet& candidates, const std::vector<std::string>& chosen) {
    SelectionResult out;
    out.method = Method::manual;
    std::set<std::string> seen;
    for (const auto& id : chosen) {
        if (!candidates.index_of(id)) throw UnknownId("manual selection names unknown indicator '" + id + "'");
        if (seen.insert(id).second) out.selected_ids.push_back(id);
    }
    return out;
}

}  // namespace indicast::select
