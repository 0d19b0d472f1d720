#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace clickpath {

/// Browsing behavior classes: targeted, purposive, explorative.
enum class Behavior : std::uint8_t { kTargeted = 0, kPurposive = 1, kExplorative = 2 };

inline constexpr std::array<Behavior, 3> kAllBehaviors = {
    Behavior::kTargeted, Behavior::kPurposive, Behavior::kExplorative};

std::string_view to_string(Behavior b);

/// Accepts "TRG"/"PUR"/"EXP" (case-insensitive) and the long lowercase names.
std::optional<Behavior> parse_behavior(std::string_view s);

inline std::size_t behavior_index(Behavior b) { return static_cast<std::size_t>(b); }

}  // namespace clickpath
