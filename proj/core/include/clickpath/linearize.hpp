#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clickpath/behavior.hpp"
#include "clickpath/events.hpp"

namespace clickpath {

struct Visit {
    std::string url;
    double dwell = 0.0;

    bool operator==(const Visit&) const = default;
};

/// A session reduced to the sequence of page visits the user experienced.
/// URLs are still strings; see Vocabulary::encode for the id form.
struct LinearizedSession {
    std::string user_id;
    std::string session_id;
    std::vector<Visit> visits;
    std::optional<Behavior> label;
    std::int64_t first_ts = 0;
    std::int64_t last_ts = 0;

    bool operator==(const LinearizedSession&) const = default;
};

/// Focus accounting over one session's ordered events.
///
/// A visit starts when a page gains the user's focus (nav in the focused
/// tab, or focus/tab_switch onto a tab) and ends when focus leaves it (nav in
/// the same tab, switch to another tab, tab_close, or session end). Dwell is
/// the time the window was focused while the visit was open, so blur pauses
/// accrual without ending the visit. Returning to a page produces a new
/// visit. A tab_open does not take focus by itself unless no tab is focused.
///
/// Throws EmptySession when there is no nav/tab_open event.
LinearizedSession linearize(std::span<const SessionEvent> events);

}  // namespace clickpath
