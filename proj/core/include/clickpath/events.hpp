#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/behavior.hpp"

namespace clickpath {

enum class EventKind : std::uint8_t { kNav, kTabOpen, kTabSwitch, kTabClose, kFocus, kBlur };
enum class Transition : std::uint8_t { kLink, kTyped, kBackForward, kReload, kOther };

std::string_view to_string(EventKind k);
std::string_view to_string(Transition t);
std::optional<EventKind> parse_event_kind(std::string_view s);
std::optional<Transition> parse_transition(std::string_view s);

/// One raw browser event from a client-side session log.
struct SessionEvent {
    std::int64_t ts = 0;  // ms since epoch
    std::string session_id;
    std::string user_id;
    std::uint32_t tab = 0;
    EventKind kind = EventKind::kNav;
    std::optional<std::string> url;  // nav and tab_open only
    std::optional<std::uint32_t> opener_tab;
    Transition transition = Transition::kOther;
    std::optional<Behavior> label;

    bool operator==(const SessionEvent&) const = default;
};

nlohmann::json to_json(const SessionEvent& e);

/// Serializes one event as a compact JSONL line (no trailing newline).
std::string to_jsonl_line(const SessionEvent& e);

struct Session {
    std::string session_id;
    std::vector<SessionEvent> events;
};

struct IngestIssue {
    enum class Kind { kSchemaViolation, kOrderViolation };
    Kind kind;
    std::size_t line;  // 1-based
    std::string field;
    std::string message;
    std::string session_id;  // empty when the line could not be attributed
};

struct IngestOptions {
    /// Allowed backwards jump of ts within one session, in ms.
    std::int64_t order_tolerance_ms = 0;
    /// Run normalize_url over URLs that parse as absolute URLs; anything else
    /// (e.g. hashed URLs) is kept verbatim as an opaque token.
    bool normalize_urls = true;
};

struct IngestResult {
    std::vector<Session> sessions;  // in order of first appearance
    std::vector<IngestIssue> errors;
    std::vector<std::string> warnings;
    std::optional<std::string> salt;  // from a hash-mode header line
    std::size_t event_count = 0;

    bool ok() const { return errors.empty(); }
};

/// Parses a JSONL session log. Every invalid line is reported in `errors`;
/// events from invalid lines are not included in `sessions`.
IngestResult ingest_events(std::istream& in, const IngestOptions& options = {});
IngestResult ingest_events_string(std::string_view text, const IngestOptions& options = {});

/// Like ingest_events but throws the first SchemaViolation / OrderViolation.
std::vector<Session> ingest_events_strict(std::istream& in, const IngestOptions& options = {});

}  // namespace clickpath
