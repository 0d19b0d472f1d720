#include "clickpath/events.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"
#include "clickpath/url.hpp"

namespace clickpath {

using nlohmann::json;

std::string_view to_string(Behavior b) {
    switch (b) {
        case Behavior::kTargeted: return "TRG";
        case Behavior::kPurposive: return "PUR";
        case Behavior::kExplorative: return "EXP";
    }
    return "?";
}

std::optional<Behavior> parse_behavior(std::string_view s) {
    std::string up;
    for (char c : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "TRG" || up == "TARGETED") return Behavior::kTargeted;
    if (up == "PUR" || up == "PURPOSIVE") return Behavior::kPurposive;
    if (up == "EXP" || up == "EXPLORATIVE") return Behavior::kExplorative;
    return std::nullopt;
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::kNav: return "nav";
        case EventKind::kTabOpen: return "tab_open";
        case EventKind::kTabSwitch: return "tab_switch";
        case EventKind::kTabClose: return "tab_close";
        case EventKind::kFocus: return "focus";
        case EventKind::kBlur: return "blur";
    }
    return "?";
}

std::string_view to_string(Transition t) {
    switch (t) {
        case Transition::kLink: return "link";
        case Transition::kTyped: return "typed";
        case Transition::kBackForward: return "back_forward";
        case Transition::kReload: return "reload";
        case Transition::kOther: return "other";
    }
    return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::kNav, EventKind::kTabOpen, EventKind::kTabSwitch, EventKind::kTabClose,
                   EventKind::kFocus, EventKind::kBlur}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::optional<Transition> parse_transition(std::string_view s) {
    for (auto t : {Transition::kLink, Transition::kTyped, Transition::kBackForward,
                   Transition::kReload, Transition::kOther}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

json to_json(const SessionEvent& e) {
    json j;
    j["ts"] = e.ts;
    j["session_id"] = e.session_id;
    j["user_id"] = e.user_id;
    j["tab"] = e.tab;
    j["kind"] = std::string(to_string(e.kind));
    if (e.url) j["url"] = *e.url;
    if (e.opener_tab) j["opener_tab"] = *e.opener_tab;
    j["transition"] = std::string(to_string(e.transition));
    if (e.label) j["label"] = std::string(to_string(*e.label));
    return j;
}

std::string to_jsonl_line(const SessionEvent& e) { return to_json(e).dump(); }

namespace {

const std::set<std::string, std::less<>> kKnownFields = {
    "ts", "session_id", "user_id", "tab", "kind", "url", "opener_tab", "transition", "label"};

struct LineError {
    std::string field;
    std::string message;
};

bool is_nonneg_integer(const json& v) {
    if (v.is_number_unsigned()) return true;
    return v.is_number_integer() && v.get<std::int64_t>() >= 0;
}

// Field-level validation of one line. Cross-event checks happen later.
std::optional<LineError> parse_event(const json& j, SessionEvent& ev, const IngestOptions& opt,
                                     std::size_t line, std::vector<std::string>& warnings) {
    auto missing = [](const char* f) { return LineError{f, "required field missing"}; };

    if (!j.contains("ts")) return missing("ts");
    const json& ts = j["ts"];
    if (!ts.is_number_integer() || ts.get<std::int64_t>() <= 0)
        return LineError{"ts", "must be a positive integer (ms)"};
    ev.ts = ts.get<std::int64_t>();

    for (const char* f : {"session_id", "user_id"}) {
        if (!j.contains(f)) return missing(f);
        if (!j[f].is_string() || j[f].get_ref<const std::string&>().empty())
            return LineError{f, "must be a non-empty string"};
    }
    ev.session_id = j["session_id"].get<std::string>();
    ev.user_id = j["user_id"].get<std::string>();

    if (!j.contains("tab")) return missing("tab");
    if (!is_nonneg_integer(j["tab"]) || j["tab"].get<std::uint64_t>() > UINT32_MAX)
        return LineError{"tab", "must be a non-negative integer"};
    ev.tab = j["tab"].get<std::uint32_t>();

    if (!j.contains("kind")) return missing("kind");
    if (!j["kind"].is_string()) return LineError{"kind", "must be a string"};
    auto kind = parse_event_kind(j["kind"].get<std::string>());
    if (!kind) return LineError{"kind", "unknown event kind '" + j["kind"].get<std::string>() + "'"};
    ev.kind = *kind;
    const bool carries_url = ev.kind == EventKind::kNav || ev.kind == EventKind::kTabOpen;

    if (j.contains("url")) {
        if (!carries_url) {
            warnings.push_back("line " + std::to_string(line) + ": 'url' ignored on " +
                               std::string(to_string(ev.kind)) + " event");
        } else {
            if (!j["url"].is_string() || j["url"].get_ref<const std::string&>().empty())
                return LineError{"url", "must be a non-empty string"};
            std::string url = j["url"].get<std::string>();
            if (opt.normalize_urls && looks_like_absolute_url(url)) {
                try {
                    url = normalize_url(url);
                } catch (const MalformedUrl& e) {
                    return LineError{"url", e.what()};
                }
            }
            ev.url = std::move(url);
        }
    } else if (carries_url) {
        return missing("url");
    }

    if (j.contains("opener_tab") && !j["opener_tab"].is_null()) {
        if (ev.kind != EventKind::kTabOpen) {
            warnings.push_back("line " + std::to_string(line) + ": 'opener_tab' ignored on " +
                               std::string(to_string(ev.kind)) + " event");
        } else {
            if (!is_nonneg_integer(j["opener_tab"]) ||
                j["opener_tab"].get<std::uint64_t>() > UINT32_MAX)
                return LineError{"opener_tab", "must be a non-negative integer"};
            ev.opener_tab = j["opener_tab"].get<std::uint32_t>();
        }
    }

    if (j.contains("transition")) {
        if (!j["transition"].is_string()) return LineError{"transition", "must be a string"};
        auto t = parse_transition(j["transition"].get<std::string>());
        if (!t) return LineError{"transition", "unknown transition '" +
                                                   j["transition"].get<std::string>() + "'"};
        ev.transition = *t;
    } else if (carries_url) {
        return missing("transition");
    }

    if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_string()) return LineError{"label", "must be a string"};
        const auto& s = j["label"].get_ref<const std::string&>();
        if (s != "TRG" && s != "PUR" && s != "EXP")
            return LineError{"label", "must be one of TRG, PUR, EXP"};
        ev.label = parse_behavior(s);
    }

    for (const auto& [key, _] : j.items()) {
        if (!kKnownFields.contains(key))
            warnings.push_back("line " + std::to_string(line) + ": unknown field '" + key +
                               "' ignored");
    }
    return std::nullopt;
}

struct SessionState {
    std::size_t index;
    std::int64_t last_ts = 0;
    std::set<std::uint32_t> tabs_seen;
    std::optional<Behavior> label;
};

}  // namespace

IngestResult ingest_events(std::istream& in, const IngestOptions& options) {
    IngestResult result;
    std::unordered_map<std::string, SessionState> states;
    std::string text;
    std::size_t line_no = 0;
    bool first_content_line = true;

    auto schema_error = [&](std::size_t line, std::string field, std::string msg) {
        result.errors.push_back(
            {IngestIssue::Kind::kSchemaViolation, line, std::move(field), std::move(msg), {}});
    };

    while (std::getline(in, text)) {
        ++line_no;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;

        json j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            schema_error(line_no, "<line>", "not a JSON object");
            first_content_line = false;
            continue;
        }
        if (first_content_line && j.contains("salt") && !j.contains("kind") && !j.contains("ts")) {
            first_content_line = false;
            if (!j["salt"].is_string()) {
                schema_error(line_no, "salt", "must be a string");
            } else {
                result.salt = j["salt"].get<std::string>();
            }
            continue;
        }
        first_content_line = false;

        SessionEvent ev;
        if (auto err = parse_event(j, ev, options, line_no, result.warnings)) {
            schema_error(line_no, err->field, err->message);
            continue;
        }

        auto [it, inserted] = states.try_emplace(ev.session_id, SessionState{result.sessions.size(), 0, {}, std::nullopt});
        SessionState& st = it->second;
        if (inserted) result.sessions.push_back(Session{ev.session_id, {}});

        if (!inserted && ev.ts < st.last_ts - options.order_tolerance_ms) {
            result.errors.push_back({IngestIssue::Kind::kOrderViolation, line_no, "ts",
                                     OrderViolation(line_no, ev.session_id).what(), ev.session_id});
            continue;
        }
        if (ev.opener_tab && !st.tabs_seen.contains(*ev.opener_tab)) {
            schema_error(line_no, "opener_tab",
                         "refers to tab " + std::to_string(*ev.opener_tab) +
                             " which has not been opened in this session");
            continue;
        }
        if (ev.label) {
            if (st.label && *st.label != *ev.label) {
                schema_error(line_no, "label", "differs from earlier label in this session");
                continue;
            }
            st.label = ev.label;
        }
        st.last_ts = std::max(st.last_ts, ev.ts);
        st.tabs_seen.insert(ev.tab);
        result.sessions[st.index].events.push_back(std::move(ev));
        ++result.event_count;
    }

    for (auto& s : result.sessions) {
        std::stable_sort(s.events.begin(), s.events.end(),
                         [](const SessionEvent& a, const SessionEvent& b) { return a.ts < b.ts; });
    }
    std::erase_if(result.sessions, [](const Session& s) { return s.events.empty(); });
    return result;
}

IngestResult ingest_events_string(std::string_view text, const IngestOptions& options) {
    std::istringstream in{std::string(text)};
    return ingest_events(in, options);
}

std::vector<Session> ingest_events_strict(std::istream& in, const IngestOptions& options) {
    IngestResult r = ingest_events(in, options);
    if (!r.errors.empty()) {
        const IngestIssue& e = r.errors.front();
        if (e.kind == IngestIssue::Kind::kOrderViolation) throw OrderViolation(e.line, e.session_id);
        throw SchemaViolation(e.line, e.field, e.message);
    }
    return std::move(r.sessions);
}

}  // namespace clickpath
