#include "clickpath/linearize.hpp"

#include <algorithm>
#include <map>

#include "clickpath/error.hpp"

namespace clickpath {
namespace {

class FocusTracker {
public:
    explicit FocusTracker(LinearizedSession& out) : out_(out) {}

    void advance(std::int64_t ts) {
        if (current_ && focused_) dwell_ms_ += ts - clock_;
        clock_ = ts;
    }

    void apply(const SessionEvent& ev) {
        switch (ev.kind) {
            case EventKind::kNav:
                tab_url_[ev.tab] = *ev.url;
                if (!active_ || *active_ == ev.tab) {
                    active_ = ev.tab;
                    open(*ev.url);
                }
                break;
            case EventKind::kTabOpen:
                tab_url_[ev.tab] = *ev.url;
                if (!active_) {
                    active_ = ev.tab;
                    open(*ev.url);
                }
                break;
            case EventKind::kTabSwitch:
            case EventKind::kFocus:
                focused_ = true;
                if (active_ != ev.tab || !current_) {
                    close();
                    active_ = ev.tab;
                    if (auto it = tab_url_.find(ev.tab); it != tab_url_.end()) open(it->second);
                }
                break;
            case EventKind::kTabClose:
                tab_url_.erase(ev.tab);
                if (active_ == ev.tab) {
                    close();
                    active_.reset();
                }
                break;
            case EventKind::kBlur:
                focused_ = false;
                break;
        }
    }

    void close() {
        if (current_) out_.visits[*current_].dwell = static_cast<double>(dwell_ms_) / 1000.0;
        current_.reset();
        dwell_ms_ = 0;
    }

private:
    void open(const std::string& url) {
        close();
        out_.visits.push_back(Visit{url, 0.0});
        current_ = out_.visits.size() - 1;
    }

    LinearizedSession& out_;
    std::map<std::uint32_t, std::string> tab_url_;
    std::optional<std::uint32_t> active_;
    std::optional<std::size_t> current_;
    bool focused_ = true;
    std::int64_t clock_ = 0;
    std::int64_t dwell_ms_ = 0;
};

}  // namespace

LinearizedSession linearize(std::span<const SessionEvent> events) {
    const bool has_page = std::any_of(events.begin(), events.end(), [](const SessionEvent& e) {
        return e.kind == EventKind::kNav || e.kind == EventKind::kTabOpen;
    });
    if (!has_page) throw EmptySession(events.empty() ? std::string{} : events.front().session_id);

    LinearizedSession out;
    out.session_id = events.front().session_id;
    out.user_id = events.front().user_id;
    out.first_ts = events.front().ts;
    out.last_ts = events.back().ts;

    FocusTracker tracker(out);
    tracker.advance(out.first_ts);
    for (const SessionEvent& ev : events) {
        if (ev.label && !out.label) out.label = ev.label;
        tracker.advance(ev.ts);
        tracker.apply(ev);
    }
    tracker.advance(out.last_ts);
    tracker.close();
    return out;
}

}  // namespace clickpath
