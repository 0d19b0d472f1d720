#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "clickpath/dataset.hpp"
#include "clickpath/error.hpp"
#include "clickpath/linearize.hpp"

namespace clickpath {

const std::vector<ActionPath>& Dataset::split(std::string_view name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

Dataset assemble_dataset(std::span<const Session> sessions, const nlohmann::json& manifest) {
    if (!manifest.is_object() || !manifest.contains("splits") || !manifest["splits"].is_object()) {
        throw DataError("manifest needs a \"splits\" object");
    }
    std::map<std::string, std::string> split_of;
    for (const auto& [split, ids] : manifest["splits"].items()) {
        if (split != "train" && split != "val" && split != "test") {
            throw DataError("manifest names unknown split '" + split + "'");
        }
        if (!ids.is_array()) throw DataError("manifest split '" + split + "' must be an array");
        for (const auto& id : ids) {
            if (!id.is_string()) throw DataError("manifest session ids must be strings");
            if (!split_of.emplace(id.get<std::string>(), split).second) {
                throw DataError("session '" + id.get<std::string>() + "' listed twice in manifest");
            }
        }
    }
    const nlohmann::json labels =
        manifest.contains("labels") ? manifest["labels"] : nlohmann::json::object();

    std::vector<LinearizedSession> linear;
    linear.reserve(sessions.size());
    for (const auto& s : sessions) {
        if (!split_of.contains(s.session_id)) {
            throw DataError("session '" + s.session_id + "' is not in the manifest");
        }
        auto ls = linearize(s.events);
        if (labels.contains(s.session_id)) {
            auto parsed = parse_behavior(labels[s.session_id].get<std::string>());
            if (!parsed) throw DataError("bad label for session '" + s.session_id + "'");
            if (ls.label && *ls.label != *parsed) {
                throw DataError("manifest label disagrees with events for '" + s.session_id + "'");
            }
            ls.label = parsed;
        }
        linear.push_back(std::move(ls));
    }
    if (linear.size() != split_of.size()) {
        throw DataError("manifest lists sessions absent from the event log");
    }

    Dataset ds;
    ds.vocab = Vocabulary::build(linear);
    for (const auto& ls : linear) {
        auto path = ds.vocab.encode(ls);
        const auto& split = split_of.at(ls.session_id);
        if (split == "train") {
            ds.train.push_back(std::move(path));
        } else if (split == "val") {
            ds.val.push_back(std::move(path));
        } else {
            ds.test.push_back(std::move(path));
        }
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream events(dir / "events.jsonl");
    if (!events) throw DataError("cannot open " + (dir / "events.jsonl").string());
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw DataError("cannot open " + (dir / "manifest.json").string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(mf);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest.json: ") + e.what());
    }
    auto sessions = ingest_events_strict(events);
    return assemble_dataset(sessions, manifest);
}

}  // namespace clickpath
