#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/action_path.hpp"
#include "clickpath/events.hpp"
#include "clickpath/vocabulary.hpp"

namespace clickpath {

/// Encoded train/val/test paths sharing one vocabulary.
struct Dataset {
    Vocabulary vocab;
    std::vector<ActionPath> train;
    std::vector<ActionPath> val;
    std::vector<ActionPath> test;

    /// Throws InvalidArgument for names other than train, val, test.
    const std::vector<ActionPath>& split(std::string_view name) const;
};

/// Linearizes `sessions`, builds the vocabulary over all of them and places
/// each path in the split the manifest lists it under. Manifest labels fill
/// in missing event labels and must agree with present ones.
/// Throws DataError for sessions missing from the manifest or vice versa.
Dataset assemble_dataset(std::span<const Session> sessions, const nlohmann::json& manifest);

/// Reads `<dir>/events.jsonl` and `<dir>/manifest.json`.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace clickpath
