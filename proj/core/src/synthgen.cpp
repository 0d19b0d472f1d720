#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"
#include "clickpath/random.hpp"
#include "clickpath/synthgen.hpp"

namespace clickpath::synth {

namespace {

constexpr int kCategories = 4;
constexpr int kItemsPerCategory = 5;
constexpr int kHelpPages = 6;
constexpr int kQueries = 4;
constexpr int kProductsPerQuery = 6;
constexpr int kArticles = 16;
constexpr double kPauseRate = 0.08;

std::string host(int site) { return "https://site" + std::to_string(site) + ".example"; }

std::vector<int> pick(Rng& rng, int pool, int k) {
    std::vector<int> all(static_cast<std::size_t>(pool));
    std::iota(all.begin(), all.end(), 0);
    rng.shuffle(all.begin(), all.end());
    all.resize(static_cast<std::size_t>(std::min(k, pool)));
    return all;
}

int draw(Rng& rng, IntRange r) { return static_cast<int>(rng.between(r.lo, r.hi)); }

// Turns page visits into tab/focus events and keeps the clock.
class Emitter {
public:
    Emitter(const SessionMeta& meta, Behavior label, const Recipe& recipe, Rng& rng)
        : meta_(meta), label_(label), recipe_(recipe), rng_(rng), t_(meta.start_ts) {}

    bool full() const { return visits_ >= static_cast<std::size_t>(recipe_.action_count_range.hi); }
    bool short_of_minimum() const {
        return visits_ < static_cast<std::size_t>(recipe_.action_count_range.lo);
    }
    const std::string& current() const { return current_; }

    void nav(const std::string& url, Transition tr) {
        if (full() || url == current_) return;
        auto e = base(EventKind::kNav, tab_);
        e.url = url;
        e.transition = tr;
        events_.push_back(std::move(e));
        current_ = url;
        ++visits_;
        dwell();
    }

    // Opens `url` in a new tab, reads it, closes it and returns to the opener.
    void child(const std::string& url) {
        if (visits_ + 2 > static_cast<std::size_t>(recipe_.action_count_range.hi)) return;
        std::uint32_t kid = next_tab_++;
        auto open = base(EventKind::kTabOpen, kid);
        open.url = url;
        open.opener_tab = tab_;
        open.transition = Transition::kLink;
        events_.push_back(std::move(open));
        events_.push_back(base(EventKind::kTabSwitch, kid));
        ++visits_;
        dwell();
        events_.push_back(base(EventKind::kTabClose, kid));
        events_.push_back(base(EventKind::kTabSwitch, tab_));
        ++visits_;
        dwell();
    }

    // Final page, placed even when the action budget is spent.
    void close_on(const std::string& url) {
        if (url == current_) return;
        auto e = base(EventKind::kNav, tab_);
        e.url = url;
        e.transition = Transition::kTyped;
        events_.push_back(std::move(e));
        current_ = url;
        ++visits_;
        dwell();
    }

    std::vector<SessionEvent> finish() {
        events_.push_back(base(EventKind::kBlur, tab_));
        return std::move(events_);
    }

private:
    SessionEvent base(EventKind kind, std::uint32_t tab) const {
        SessionEvent e;
        e.ts = t_;
        e.session_id = meta_.session_id;
        e.user_id = meta_.user_id;
        e.tab = tab;
        e.kind = kind;
        e.label = label_;
        return e;
    }

    void dwell() {
        auto ms = std::max<std::int64_t>(
            300, std::llround(rng_.weibull(recipe_.dwell.shape, recipe_.dwell.scale) * 1000.0));
        if (rng_.bernoulli(kPauseRate)) {
            auto first = ms / 2;
            t_ += first;
            events_.push_back(base(EventKind::kBlur, tab_));
            t_ += rng_.between(1000, 20000);
            events_.push_back(base(EventKind::kFocus, tab_));
            t_ += ms - first;
        } else {
            t_ += ms;
        }
    }

    const SessionMeta& meta_;
    Behavior label_;
    const Recipe& recipe_;
    Rng& rng_;
    std::int64_t t_;
    std::uint32_t tab_ = 0;
    std::uint32_t next_tab_ = 1;
    std::size_t visits_ = 0;
    std::string current_;
    std::vector<SessionEvent> events_;
};

void targeted(Emitter& em, const Recipe& r, const GenParams& p, Rng& rng) {
    const std::string site = host(static_cast<int>(rng.below(p.site_count)));
    const std::string hub = site + "/";
    auto helps = pick(rng, kHelpPages, kHelpPages);
    std::size_t next_help = 0;
    auto help_page = [&] {
        return site + "/help/" + std::to_string(helps[next_help++ % helps.size()]);
    };

    em.nav(hub, Transition::kTyped);
    auto categories = pick(rng, kCategories, kCategories);
    int planned = draw(rng, r.n_clusters);
    for (int ci = 0; ci < kCategories && (ci < planned || em.short_of_minimum()); ++ci) {
        const std::string cat = site + "/c/" + std::to_string(categories[ci]);
        em.nav(cat, Transition::kLink);
        std::vector<std::string> items;
        for (int m : pick(rng, kItemsPerCategory, draw(rng, r.cluster_depth))) {
            items.push_back(cat + "/i/" + std::to_string(m));
        }
        auto detour = [&](const std::string& from) {
            if (!rng.bernoulli(r.leaf_rate) || next_help >= helps.size()) return;
            auto first = help_page();
            em.nav(first, Transition::kLink);
            if (rng.bernoulli(0.3) && next_help < helps.size()) {
                em.nav(help_page(), Transition::kLink);
                em.nav(first, Transition::kBackForward);
            }
            em.nav(from, Transition::kBackForward);
        };
        for (const auto& item : items) {
            em.nav(item, Transition::kLink);
            detour(item);
        }
        auto extra = rng.below(3);
        for (std::uint64_t k = 0; k < extra && items.size() > 1; ++k) {
            std::string next;
            do {
                next = items[rng.below(items.size())];
            } while (next == em.current());
            em.nav(next, Transition::kLink);
        }
        if (items.size() > 1 && em.current() == items.front()) em.nav(items.back(), Transition::kLink);
        em.nav(cat, Transition::kLink);
        em.nav(hub, Transition::kBackForward);
    }
}

void purposive(Emitter& em, const Recipe& r, const GenParams& p, Rng& rng) {
    const std::string site = host(static_cast<int>(rng.below(p.site_count)));
    em.nav(site + "/", Transition::kTyped);
    struct Star {
        std::string results;
        std::vector<std::string> children;
    };
    std::vector<Star> stars;
    auto queries = pick(rng, kQueries, kQueries);
    int planned = draw(rng, r.n_stars);
    for (int qi = 0; qi < kQueries && (qi < planned || em.short_of_minimum()); ++qi) {
        Star s;
        s.results = site + "/search?q=" + std::to_string(queries[qi]);
        em.nav(s.results, Transition::kTyped);
        for (int m : pick(rng, kProductsPerQuery, draw(rng, r.star_branching))) {
            s.children.push_back(site + "/p/" + std::to_string(queries[qi]) + "/" + std::to_string(m));
            em.child(s.children.back());
        }
        stars.push_back(std::move(s));
    }
    int groups = draw(rng, r.n_clusters);
    for (int g = 0; g < groups && !stars.empty(); ++g) {
        const auto& s = stars[rng.below(stars.size())];
        if (s.children.size() < 2) continue;
        auto pair = pick(rng, static_cast<int>(s.children.size()), 2);
        const auto& a = s.children[static_cast<std::size_t>(pair[0])];
        const auto& b = s.children[static_cast<std::size_t>(pair[1])];
        em.nav(s.results, Transition::kTyped);
        em.nav(a, Transition::kLink);
        em.nav(b, Transition::kLink);
        em.nav(a, Transition::kBackForward);
        em.nav(s.results, Transition::kBackForward);
    }
}

void explorative(Emitter& em, const Recipe& r, const GenParams& p, Rng& rng) {
    std::vector<int> sites = pick(rng, p.site_count, p.site_count);
    std::size_t site_idx = 0;
    int article = static_cast<int>(rng.below(kArticles));
    auto page = [&] { return host(sites[site_idx]) + "/a/" + std::to_string(article); };
    em.nav(page(), Transition::kTyped);
    int length = draw(rng, r.ring_length);
    for (int i = 1; (i < length || em.short_of_minimum()) && i < kArticles && !em.full(); ++i) {
        if (rng.bernoulli(0.15) && site_idx + 1 < sites.size()) {
            ++site_idx;
            article = static_cast<int>(rng.below(kArticles));
        } else {
            article = (article + 1) % kArticles;
        }
        em.nav(page(), Transition::kLink);
    }
}

void check_range(const IntRange& r, const std::string& name, int min_lo) {
    if (r.lo < min_lo || r.hi < r.lo) {
        throw InvalidParams(name + " must satisfy " + std::to_string(min_lo) + " <= lo <= hi");
    }
}

nlohmann::json range_json(const IntRange& r) { return nlohmann::json::array({r.lo, r.hi}); }

IntRange range_from(const nlohmann::json& j, const char* key, IntRange fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw InvalidParams(std::string(key) + " must be a [lo, hi] integer pair");
    }
    return {v[0].get<int>(), v[1].get<int>()};
}

nlohmann::json recipe_json(const Recipe& r) {
    return {{"n_clusters", range_json(r.n_clusters)},
            {"cluster_depth", range_json(r.cluster_depth)},
            {"leaf_rate", r.leaf_rate},
            {"ring_length", range_json(r.ring_length)},
            {"n_stars", range_json(r.n_stars)},
            {"star_branching", range_json(r.star_branching)},
            {"action_count_range", range_json(r.action_count_range)},
            {"dwell_weibull", {{"shape", r.dwell.shape}, {"scale", r.dwell.scale}}}};
}

Recipe recipe_from(const nlohmann::json& j, Recipe r) {
    if (!j.is_object()) throw InvalidParams("recipe must be an object");
    r.n_clusters = range_from(j, "n_clusters", r.n_clusters);
    r.cluster_depth = range_from(j, "cluster_depth", r.cluster_depth);
    r.ring_length = range_from(j, "ring_length", r.ring_length);
    r.n_stars = range_from(j, "n_stars", r.n_stars);
    r.star_branching = range_from(j, "star_branching", r.star_branching);
    r.action_count_range = range_from(j, "action_count_range", r.action_count_range);
    if (j.contains("leaf_rate")) {
        if (!j["leaf_rate"].is_number()) throw InvalidParams("leaf_rate must be a number");
        r.leaf_rate = j["leaf_rate"].get<double>();
    }
    if (j.contains("dwell_weibull")) {
        const auto& w = j["dwell_weibull"];
        if (!w.is_object()) throw InvalidParams("dwell_weibull must be an object");
        if (w.contains("shape")) r.dwell.shape = w["shape"].get<double>();
        if (w.contains("scale")) r.dwell.scale = w["scale"].get<double>();
    }
    return r;
}

}  // namespace

double WeibullParams::mean() const { return scale * std::tgamma(1.0 + 1.0 / shape); }

GenParams GenParams::defaults() {
    GenParams p;
    p.targeted.n_clusters = {2, 3};
    p.targeted.cluster_depth = {3, 4};
    p.targeted.leaf_rate = 0.25;
    p.targeted.action_count_range = {8, 40};
    p.targeted.dwell = {1.5, 4.0};

    p.purposive.n_clusters = {1, 2};
    p.purposive.n_stars = {2, 3};
    p.purposive.star_branching = {4, 6};
    p.purposive.action_count_range = {14, 60};
    p.purposive.dwell = {1.5, 12.0};

    p.explorative.ring_length = {7, 11};
    p.explorative.action_count_range = {4, 20};
    p.explorative.dwell = {1.5, 30.0};
    return p;
}

const Recipe& GenParams::recipe(Behavior b) const {
    switch (b) {
        case Behavior::kTargeted: return targeted;
        case Behavior::kPurposive: return purposive;
        case Behavior::kExplorative: return explorative;
    }
    throw InvalidParams("unknown behavior");
}

void GenParams::validate() const {
    if (site_count < 1) throw InvalidParams("site_count must be at least 1");
    for (auto b : kAllBehaviors) {
        const Recipe& r = recipe(b);
        const std::string tag = std::string(to_string(b)) + ".";
        check_range(r.n_clusters, tag + "n_clusters", 0);
        check_range(r.cluster_depth, tag + "cluster_depth", 0);
        check_range(r.ring_length, tag + "ring_length", 0);
        check_range(r.n_stars, tag + "n_stars", 0);
        check_range(r.star_branching, tag + "star_branching", 0);
        check_range(r.action_count_range, tag + "action_count_range", 1);
        if (!(r.leaf_rate >= 0.0 && r.leaf_rate <= 1.0)) {
            throw InvalidParams(tag + "leaf_rate must lie in [0, 1]");
        }
        if (!(r.dwell.shape > 0.0) || !(r.dwell.scale > 0.0) || !std::isfinite(r.dwell.shape) ||
            !std::isfinite(r.dwell.scale)) {
            throw InvalidParams(tag + "dwell_weibull shape and scale must be positive");
        }
    }
}

nlohmann::json to_json(const GenParams& p) {
    return {{"site_count", p.site_count},
            {"end_page", p.end_page},
            {"seed", p.seed},
            {"targeted", recipe_json(p.targeted)},
            {"purposive", recipe_json(p.purposive)},
            {"explorative", recipe_json(p.explorative)}};
}

GenParams gen_params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidParams("generator params must be a JSON object");
    GenParams p = GenParams::defaults();
    try {
        if (j.contains("site_count")) p.site_count = j["site_count"].get<int>();
        if (j.contains("end_page")) p.end_page = j["end_page"].get<std::string>();
        if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("targeted")) p.targeted = recipe_from(j["targeted"], p.targeted);
        if (j.contains("purposive")) p.purposive = recipe_from(j["purposive"], p.purposive);
        if (j.contains("explorative")) p.explorative = recipe_from(j["explorative"], p.explorative);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParams(std::string("generator params: ") + e.what());
    }
    p.validate();
    return p;
}

std::vector<SessionEvent> gen_session(Behavior behavior, const GenParams& params,
                                      std::uint64_t seed, const SessionMeta& meta) {
    params.validate();
    Rng rng(seed);
    const Recipe& recipe = params.recipe(behavior);
    Emitter em(meta, behavior, recipe, rng);
    switch (behavior) {
        case Behavior::kTargeted: targeted(em, recipe, params, rng); break;
        case Behavior::kPurposive: purposive(em, recipe, params, rng); break;
        case Behavior::kExplorative: explorative(em, recipe, params, rng); break;
    }
    if (!params.end_page.empty()) em.close_on(params.end_page);
    return em.finish();
}

std::string SynthDataset::to_jsonl() const {
    std::string out;
    for (const auto& s : sessions) {
        for (const auto& e : s.events) {
            out += to_jsonl_line(e);
            out += '\n';
        }
    }
    return out;
}

nlohmann::json SynthDataset::manifest() const {
    nlohmann::json m;
    m["seed"] = seed;
    m["classes"] = nlohmann::json::array();
    for (auto b : classes) m["classes"].push_back(std::string(to_string(b)));
    m["counts"] = {{"train", counts.train}, {"val", counts.val}, {"test", counts.test}};
    m["splits"] = {{"train", nlohmann::json::array()},
                   {"val", nlohmann::json::array()},
                   {"test", nlohmann::json::array()}};
    m["labels"] = nlohmann::json::object();
    for (const auto& s : sessions) {
        m["splits"][s.split].push_back(s.session_id);
        m["labels"][s.session_id] = std::string(to_string(s.label));
    }
    m["params"] = to_json(params);
    return m;
}

SynthDataset gen_dataset(SplitCounts counts, std::span<const Behavior> classes,
                         const GenParams& params, std::uint64_t seed) {
    params.validate();
    if (counts.train < 1 || counts.val < 1 || counts.test < 1) {
        throw InvalidParams("every split needs at least one session");
    }
    if (classes.empty()) throw InvalidParams("at least one class is required");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (classes[i] == classes[j]) throw InvalidParams("classes must be distinct");
        }
    }

    SynthDataset ds;
    ds.seed = seed;
    ds.classes.assign(classes.begin(), classes.end());
    ds.counts = counts;
    ds.params = params;

    const std::pair<const char*, std::size_t> splits[] = {
        {"train", counts.train}, {"val", counts.val}, {"test", counts.test}};
    std::uint64_t global = 0;
    for (const auto& [split, total] : splits) {
        const std::size_t c = classes.size();
        std::vector<std::size_t> quota(c);
        for (std::size_t i = 0; i < c; ++i) quota[i] = total / c + (i < total % c ? 1 : 0);
        for (std::size_t made = 0, turn = 0; made < total; ++turn) {
            std::size_t ci = turn % c;
            if (quota[ci] == 0) continue;
            --quota[ci];
            char id[32];
            std::snprintf(id, sizeof id, "%s-%03zu", split, made);
            char user[16];
            std::snprintf(user, sizeof user, "u%02llu",
                          static_cast<unsigned long long>(global % 24));
            SessionMeta meta{id, user, 1'700'000'000'000 + static_cast<std::int64_t>(global) * 3'600'000};
            GeneratedSession g;
            g.split = split;
            g.label = classes[ci];
            g.session_id = id;
            g.events = gen_session(classes[ci], params, Rng::derive(seed, global), meta);
            ds.sessions.push_back(std::move(g));
            ++made;
            ++global;
        }
    }
    return ds;
}

SynthDataset gen_dataset(SplitCounts counts, const GenParams& params, std::uint64_t seed) {
    return gen_dataset(counts, kAllBehaviors, params, seed);
}

}  // namespace clickpath::synth
