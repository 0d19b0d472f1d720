#include "clickpath/vocabulary.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"

namespace clickpath {

ActionPath prefix_of(const ActionPath& path, std::size_t n) {
    ActionPath out{path.user_id, path.session_id, {}, path.label};
    n = std::min(n, path.actions.size());
    out.actions.assign(path.actions.begin(), path.actions.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

TokenId eoa_for(Behavior b) { return kEoaTrg + static_cast<TokenId>(behavior_index(b)); }

std::optional<Behavior> behavior_for(TokenId eoa) {
    if (!is_eoa(eoa)) return std::nullopt;
    return kAllBehaviors[eoa - kEoaTrg];
}

Vocabulary Vocabulary::build(std::vector<std::string> urls) {
    std::sort(urls.begin(), urls.end());
    urls.erase(std::unique(urls.begin(), urls.end()), urls.end());
    Vocabulary v;
    v.urls_ = std::move(urls);
    v.index_.reserve(v.urls_.size());
    for (std::size_t i = 0; i < v.urls_.size(); ++i)
        v.index_.emplace(v.urls_[i], kFirstUrlId + static_cast<TokenId>(i));
    return v;
}

Vocabulary Vocabulary::build(std::span<const LinearizedSession> sessions) {
    std::vector<std::string> urls;
    for (const auto& s : sessions)
        for (const auto& v : s.visits) urls.push_back(v.url);
    return build(std::move(urls));
}

std::optional<TokenId> Vocabulary::find(std::string_view url) const {
    auto it = index_.find(std::string(url));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TokenId Vocabulary::id_of(std::string_view url) const {
    if (auto id = find(url)) return *id;
    throw DataError("URL not in vocabulary: '" + std::string(url) + "'");
}

std::string Vocabulary::token(TokenId id) const {
    if (id >= size()) throw IndexOutOfRange(id, size());
    if (is_mark(id)) return std::string(kMarkNames[id]);
    return urls_[id - kFirstUrlId];
}

ActionPath Vocabulary::encode(const LinearizedSession& session) const {
    ActionPath p{session.user_id, session.session_id, {}, session.label};
    p.actions.reserve(session.visits.size());
    for (const auto& v : session.visits) p.actions.push_back({id_of(v.url), v.dwell});
    return p;
}

nlohmann::json Vocabulary::to_json() const {
    nlohmann::json marks = nlohmann::json::array();
    for (auto m : kMarkNames) marks.push_back(std::string(m));
    return {{"marks", marks}, {"urls", urls_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("urls") || !j["urls"].is_array())
        throw DataError("vocabulary JSON needs a 'urls' array");
    if (j.contains("marks")) {
        const auto& marks = j["marks"];
        if (!marks.is_array() || marks.size() != kMarkCount)
            throw DataError("vocabulary JSON: 'marks' must list the 7 reserved marks");
        for (std::size_t i = 0; i < kMarkCount; ++i)
            if (marks[i] != std::string(kMarkNames[i]))
                throw DataError("vocabulary JSON: unexpected mark at index " + std::to_string(i));
    }
    auto urls = j["urls"].get<std::vector<std::string>>();
    if (!std::is_sorted(urls.begin(), urls.end()) ||
        std::adjacent_find(urls.begin(), urls.end()) != urls.end())
        throw DataError("vocabulary JSON: 'urls' must be sorted and unique");
    return build(std::move(urls));
}

}  // namespace clickpath
