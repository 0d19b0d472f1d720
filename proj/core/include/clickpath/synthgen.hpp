#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/behavior.hpp"
#include "clickpath/events.hpp"

// Labeled synthetic browsing sessions for the three behavior classes.
namespace clickpath::synth {

struct IntRange {
    int lo = 0;
    int hi = 0;

    bool operator==(const IntRange&) const = default;
};

struct WeibullParams {
    double shape = 1.5;
    double scale = 5.0;  // seconds

    double mean() const;
    bool operator==(const WeibullParams&) const = default;
};

/// Knobs for one behavior. Each recipe reads the fields relevant to it.
struct Recipe {
    IntRange n_clusters;      // TRG: clusters per session; PUR: revisit groups
    IntRange cluster_depth;   // item pages per cluster
    double leaf_rate = 0.0;   // chance of a detour after each item visit
    IntRange ring_length;     // EXP: pages in the forward chain
    IntRange n_stars;         // PUR: results pages
    IntRange star_branching;  // PUR: children opened per results page
    IntRange action_count_range{1, 200};
    WeibullParams dwell;

    bool operator==(const Recipe&) const = default;
};

struct GenParams {
    Recipe targeted;
    Recipe purposive;
    Recipe explorative;
    int site_count = 2;
    /// Page every session closes on (a browser start page); empty for none.
    std::string end_page = "https://start.example/";
    std::uint64_t seed = 1;

    static GenParams defaults();
    const Recipe& recipe(Behavior b) const;
    /// Throws InvalidParams.
    void validate() const;

    bool operator==(const GenParams&) const = default;
};

nlohmann::json to_json(const GenParams& p);
/// Missing keys keep their defaults. Throws InvalidParams.
GenParams gen_params_from_json(const nlohmann::json& j);

struct SessionMeta {
    std::string session_id = "s0";
    std::string user_id = "u0";
    std::int64_t start_ts = 1'700'000'000'000;
};

/// One labeled session as raw browser events. Deterministic in (params, seed).
std::vector<SessionEvent> gen_session(Behavior behavior, const GenParams& params,
                                      std::uint64_t seed, const SessionMeta& meta = {});

struct SplitCounts {
    std::size_t train = 132;
    std::size_t val = 38;
    std::size_t test = 19;
};

struct GeneratedSession {
    std::string split;  // "train", "val" or "test"
    Behavior label = Behavior::kTargeted;
    std::string session_id;
    std::vector<SessionEvent> events;
};

struct SynthDataset {
    std::vector<GeneratedSession> sessions;

    /// Canonical JSONL log of every session, one event per line.
    std::string to_jsonl() const;
    /// {"seed", "classes", "counts", "splits": {split: [ids]}, "labels": {id: label},
    ///  "params"}
    nlohmann::json manifest() const;

    std::uint64_t seed = 0;
    std::vector<Behavior> classes;
    SplitCounts counts;
    GenParams params;
};

/// Class-balanced splits (split sizes differ by class by at most one).
/// Throws InvalidParams.
SynthDataset gen_dataset(SplitCounts counts, std::span<const Behavior> classes,
                         const GenParams& params, std::uint64_t seed);
SynthDataset gen_dataset(SplitCounts counts, const GenParams& params, std::uint64_t seed);

}  // namespace clickpath::synth
