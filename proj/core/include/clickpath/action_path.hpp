#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clickpath/behavior.hpp"

namespace clickpath {

using TokenId = std::uint32_t;

struct Action {
    TokenId url_id = 0;
    double dwell = 0.0;  // seconds of active focus

    bool operator==(const Action&) const = default;
};

/// Chronological page visits of one session, the model's unit of input.
struct ActionPath {
    std::string user_id;
    std::string session_id;
    std::vector<Action> actions;
    std::optional<Behavior> label;

    std::size_t size() const { return actions.size(); }
    bool empty() const { return actions.empty(); }
    bool operator==(const ActionPath&) const = default;
};

/// Copy of `path` keeping only the first `n` actions.
ActionPath prefix_of(const ActionPath& path, std::size_t n);

}  // namespace clickpath
