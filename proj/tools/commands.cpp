#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clickpath/apm.hpp"
#include "clickpath/dataset.hpp"
#include "clickpath/error.hpp"
#include "clickpath/eval.hpp"
#include "clickpath/events.hpp"
#include "clickpath/linearize.hpp"
#include "clickpath/patterns.hpp"
#include "clickpath/stats.hpp"
#include "clickpath/synthgen.hpp"
#include "clickpath/url.hpp"
#include "clickpath/url2vec.hpp"
#include "clickpath/vocabulary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace clickpath::cli {
namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw InvalidArgument(std::string(flag) + " is required");
}

Behavior behavior_arg(const std::string& s) {
    auto b = parse_behavior(s);
    if (!b) throw InvalidArgument("unknown behavior '" + s + "'");
    return *b;
}

std::vector<LinearizedSession> linearize_all(const std::vector<Session>& sessions) {
    std::vector<LinearizedSession> out;
    out.reserve(sessions.size());
    for (const auto& s : sessions) out.push_back(linearize(s.events));
    return out;
}

std::vector<LinearizedSession> load_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return linearize_all(ingest_events_strict(in));
}

struct Model {
    apm::Checkpoint checkpoint;
    Vocabulary vocab;
};

Model load_model(const std::string& path) {
    require(path, "--model");
    json j = read_json(path);
    if (!j.contains("vocabulary")) throw DataError("model '" + path + "' has no vocabulary");
    Model m{apm::checkpoint_from_json(j), Vocabulary::from_json(j["vocabulary"])};
    if (m.vocab.size() != m.checkpoint.params.vocab_size)
        throw DataError("model vocabulary does not match its weights");
    return m;
}

ActionPath path_from_json(const json& j, const Vocabulary& vocab, std::size_t index) {
    if (!j.is_object() || !j.contains("actions") || !j["actions"].is_array())
        throw DataError("path " + std::to_string(index) + " needs an \"actions\" array");
    ActionPath p;
    p.session_id = j.value("session_id", "path" + std::to_string(index));
    p.user_id = j.value("user_id", std::string());
    if (j.contains("label") && j["label"].is_string()) p.label = behavior_arg(j["label"]);
    for (const auto& a : j["actions"]) {
        std::string url = a.at("url").get<std::string>();
        if (looks_like_absolute_url(url)) url = normalize_url(url);
        p.actions.push_back({vocab.id_of(url), a.value("dwell", 0.0)});
    }
    if (p.actions.empty()) throw EmptyPath();
    return p;
}

// A path file holds one {"actions": [{"url", "dwell"}...]} object or an array of them.
std::vector<ActionPath> load_paths(const std::string& path_file, const std::string& events_file,
                                   const Vocabulary& vocab) {
    std::vector<ActionPath> paths;
    if (!path_file.empty()) {
        json j = read_json(path_file);
        if (j.is_array()) {
            for (std::size_t i = 0; i < j.size(); ++i) paths.push_back(path_from_json(j[i], vocab, i));
        } else {
            paths.push_back(path_from_json(j, vocab, 0));
        }
    }
    if (!events_file.empty()) {
        for (const auto& s : load_log(events_file)) paths.push_back(vocab.encode(s));
    }
    if (paths.empty()) throw InvalidArgument("give --path or --events");
    return paths;
}

json probs_json(const std::array<double, 3>& probs) {
    json j = json::object();
    for (Behavior b : kAllBehaviors) j[std::string(to_string(b))] = probs[behavior_index(b)];
    return j;
}

json tokens_json(const std::vector<TokenId>& ids, const Vocabulary& vocab) {
    json j = json::array();
    for (TokenId id : ids) j.push_back(vocab.token(id));
    return j;
}

apm::CandidateMode mode_arg(const std::string& s) { return apm::parse_candidate_mode(s); }

}  // namespace

int run_gen(const Global& g, const GenOptions& o, std::ostream& out) {
    if (o.counts.size() != 3) throw InvalidArgument("--counts takes train,val,test");
    std::vector<Behavior> classes;
    for (const auto& c : o.classes) classes.push_back(behavior_arg(c));
    synth::GenParams params = synth::GenParams::defaults();
    if (!o.params_file.empty()) params = synth::gen_params_from_json(read_json(o.params_file));
    params.seed = g.seed;
    auto ds = synth::gen_dataset({o.counts[0], o.counts[1], o.counts[2]}, classes, params, g.seed);

    const fs::path dir = g.out.empty() ? fs::path("dataset") : fs::path(g.out);
    const std::string log = ds.to_jsonl();
    write_text(dir / "events.jsonl", log);
    write_text(dir / "manifest.json", ds.manifest().dump(2) + "\n");

    std::size_t events = 0;
    for (const auto& s : ds.sessions) events += s.events.size();
    emit(out, {{"out", dir.string()},
               {"seed", g.seed},
               {"sessions", ds.sessions.size()},
               {"events", events},
               {"counts", {{"train", o.counts[0]}, {"val", o.counts[1]}, {"test", o.counts[2]}}}});
    return 0;
}

int run_ingest(const Global& g, const IngestOptions& o, std::ostream& out) {
    require(o.in, "--in");
    std::ifstream in(o.in, std::ios::binary);
    if (!in) throw DataError("cannot open '" + o.in + "'");
    clickpath::IngestOptions opts;
    opts.order_tolerance_ms = o.tolerance_ms;
    opts.normalize_urls = !o.no_normalize;
    IngestResult res = ingest_events(in, opts);

    json errors = json::array();
    for (const auto& e : res.errors) {
        errors.push_back(
            {{"kind", e.kind == IngestIssue::Kind::kSchemaViolation ? "SchemaViolation" : "OrderViolation"},
             {"line", e.line},
             {"field", e.field},
             {"session_id", e.session_id},
             {"message", e.message}});
    }
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';

    json report = {{"events", res.event_count},
                   {"sessions", res.sessions.size()},
                   {"errors", errors},
                   {"warnings", res.warnings.size()},
                   {"salt", res.salt ? json(*res.salt) : json(nullptr)}};
    if (!res.ok()) {
        emit(out, report);
        std::cerr << "error: " << res.errors.size() << " invalid line(s)\n";
        return 2;
    }

    auto linear = linearize_all(res.sessions);
    Vocabulary vocab = Vocabulary::build(linear);
    report["vocabulary_size"] = vocab.size();
    if (!g.out.empty()) {
        json paths = json::array();
        for (const auto& s : linear) {
            json actions = json::array();
            for (const auto& v : s.visits) actions.push_back({{"url", v.url}, {"dwell", v.dwell}});
            paths.push_back({{"session_id", s.session_id},
                             {"user_id", s.user_id},
                             {"label", s.label ? json(std::string(to_string(*s.label))) : json(nullptr)},
                             {"actions", actions}});
        }
        write_text(g.out, json{{"vocabulary", vocab.to_json()}, {"paths", paths}}.dump(2) + "\n");
        report["out"] = g.out;
    }
    emit(out, report);
    return 0;
}

int run_embed(const Global& g, const EmbedOptions& o, std::ostream& out) {
    Vocabulary vocab;
    std::vector<ActionPath> paths;
    if (!o.data.empty()) {
        Dataset data = load_dataset(o.data);
        vocab = data.vocab;
        paths = data.train;
    } else {
        require(o.in, "--data or --in");
        auto linear = load_log(o.in);
        vocab = Vocabulary::build(linear);
        for (const auto& s : linear) paths.push_back(vocab.encode(s));
    }

    url2vec::Config cfg;
    cfg.dim = o.dim;
    cfg.window = o.window;
    cfg.negatives = o.negatives;
    cfg.epochs = o.epochs;
    cfg.learning_rate = o.learning_rate;
    cfg.seed = g.seed;
    cfg.objective = o.exact ? url2vec::Objective::kExactSoftmax : url2vec::Objective::kNegativeSampling;
    auto pairs = url2vec::build_pairs(paths, cfg.window);
    auto table = url2vec::train_embeddings(pairs, vocab.size(), cfg);

    json report = {{"vocabulary_size", vocab.size()},
                   {"paths", paths.size()},
                   {"pairs", pairs.size()},
                   {"config", url2vec::to_json(cfg)}};
    if (!o.nearest.empty()) {
        std::string url = looks_like_absolute_url(o.nearest) ? normalize_url(o.nearest) : o.nearest;
        json near = json::array();
        for (const auto& [id, cos] : url2vec::nearest(table, vocab.id_of(url), o.top))
            near.push_back({{"url", vocab.token(id)}, {"cosine", cos}});
        report["nearest"] = near;
    }
    if (!g.out.empty()) {
        json file = url2vec::to_json(table, cfg);
        file["vocabulary"] = vocab.to_json();
        write_text(g.out, file.dump() + "\n");
        report["out"] = g.out;
    }
    emit(out, report);
    return 0;
}

int run_train(const Global& g, const TrainOptions& o, std::ostream& out) {
    require(o.data, "--data");
    Dataset data = load_dataset(o.data);

    apm::TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.learning_rate = o.learning_rate;
    cfg.l2_lambda = o.l2;
    cfg.early_stop_patience = o.patience;
    cfg.seed = g.seed;
    cfg.prefix_fractions = o.fractions;
    if (o.task == "classification") {
        cfg.task = apm::TrainTask::kClassification;
    } else if (o.task != "sequence") {
        throw InvalidParams("--task must be sequence or classification");
    }
    cfg.validate();

    auto init = apm::ApmParams::random(data.vocab.size(), o.embedding_dim, o.latent, g.seed,
                                       mode_arg(o.mode));
    if (!o.no_pretrain) {
        url2vec::Config ec;
        ec.dim = o.embedding_dim;
        ec.epochs = o.embed_epochs;
        ec.seed = g.seed;
        auto pairs = url2vec::build_pairs(data.train, ec.window);
        init.load_embedding(url2vec::train_embeddings(pairs, data.vocab.size(), ec).input_vectors);
    }

    auto result = apm::train(data.train, data.val, std::move(init), cfg, [&](const apm::EpochRecord& r) {
        if (o.verbose)
            std::cerr << "epoch " << r.epoch << " train " << r.train_loss << " val " << r.val_loss << '\n';
    });

    const fs::path model_path = g.out.empty() ? fs::path("model.json") : fs::path(g.out);
    json model = apm::to_json(apm::Checkpoint{result.params, cfg, result.history});
    model["vocabulary"] = data.vocab.to_json();
    write_text(model_path, model.dump() + "\n");

    json report = {{"model", model_path.string()},
                   {"epochs_run", result.history.size()},
                   {"best_epoch", result.best_epoch},
                   {"best_val_loss", result.best_val_loss},
                   {"stopped_early", result.stopped_early},
                   {"parameters", result.params.parameter_count()}};
    if (!data.test.empty()) report["test_accuracy"] = eval::classification_accuracy(result.params, data.test);
    emit(out, report);
    return 0;
}

int run_classify(const Global&, const ClassifyOptions& o, std::ostream& out) {
    Model m = load_model(o.model);
    apm::ClassifyMode mode;
    if (o.strictness == "restricted") {
        mode = apm::ClassifyMode::kRestricted;
    } else if (o.strictness == "strict") {
        mode = apm::ClassifyMode::kStrict;
    } else {
        throw InvalidArgument("--mode must be restricted or strict");
    }
    auto paths = load_paths(o.path, o.events, m.vocab);
    json results = json::array();
    for (const auto& p : paths) {
        auto c = apm::classify(m.checkpoint.params, p, mode);
        results.push_back({{"session_id", p.session_id},
                           {"label", c.label ? json(std::string(to_string(*c.label))) : json(nullptr)},
                           {"probs", probs_json(c.probs)}});
    }
    if (results.size() == 1 && o.events.empty()) {
        json single = results[0];
        single.erase("session_id");
        emit(out, single);
    } else {
        emit(out, {{"results", results}});
    }
    return 0;
}

int run_predict(const Global&, const PredictOptions& o, std::ostream& out) {
    Model m = load_model(o.model);
    auto paths = load_paths(o.path, {}, m.vocab);
    json results = json::array();
    for (const auto& p : paths) {
        auto pred = apm::predict_suffix(m.checkpoint.params, p, o.max_len);
        results.push_back({{"session_id", p.session_id},
                           {"tokens", tokens_json(pred.tokens, m.vocab)},
                           {"urls", tokens_json(pred.urls, m.vocab)}});
    }
    emit(out, results.size() == 1 ? results[0] : json{{"results", results}});
    return 0;
}

int run_eval_curve(const Global& g, const CurveOptions& o, std::ostream& out) {
    Model m = load_model(o.model);
    require(o.data, "--data");
    Dataset data = load_dataset(o.data);
    if (!(data.vocab == m.vocab)) throw DataError("dataset vocabulary differs from the model's");
    const auto& paths = data.split(o.split);
    auto curve = eval::fraction_curve(m.checkpoint.params, paths, o.fractions);
    if (!g.out.empty()) write_text(g.out, eval::curve_csv(curve));
    emit(out, {{"split", o.split},
               {"paths", paths.size()},
               {"accuracy", eval::classification_accuracy(m.checkpoint.params, paths)},
               {"curve", eval::curve_json(curve)}});
    return 0;
}

int run_patterns(const Global& g, const PatternOptions& o, std::ostream& out) {
    std::vector<LinearizedSession> linear;
    if (!o.in.empty()) {
        linear = load_log(o.in);
    } else {
        require(o.data, "--in or --data");
        linear = load_log((fs::path(o.data) / "events.jsonl").string());
    }
    Vocabulary vocab = Vocabulary::build(linear);

    patterns::AnalyzeOptions opts;
    opts.min_cluster_size = o.min_cluster;
    opts.min_ring_length = o.min_ring;

    std::vector<patterns::ClickGraph> graphs;
    std::vector<patterns::PatternReport> reports;
    std::map<std::string, patterns::ClickGraph> by_user;
    json sessions = json::array();
    for (const auto& s : linear) {
        if (!o.sessions.empty() &&
            std::find(o.sessions.begin(), o.sessions.end(), s.session_id) == o.sessions.end())
            continue;
        ActionPath path = vocab.encode(s);
        auto graph = patterns::build_graph(path);
        graph.set_owner(s.session_id);
        auto report = patterns::analyze(graph, opts);

        auto [it, fresh] = by_user.try_emplace(s.user_id, patterns::ClickGraph(s.user_id));
        for (std::size_t i = 0; i < path.actions.size(); ++i) {
            if (i == 0) {
                it->second.add_node(path.actions[i].url_id);
            } else {
                it->second.add_edge(path.actions[i - 1].url_id, path.actions[i].url_id);
            }
        }

        sessions.push_back({{"session_id", s.session_id},
                            {"user_id", s.user_id},
                            {"nodes", graph.size()},
                            {"edges", graph.edges().size()},
                            {"patterns", patterns::to_json(report, &vocab)}});
        graphs.push_back(std::move(graph));
        reports.push_back(std::move(report));
    }
    if (graphs.empty()) throw EmptyDataset();

    patterns::PatternReport shared;
    if (by_user.size() >= 2) {
        std::vector<patterns::ClickGraph> users;
        for (auto& [user, graph] : by_user) users.push_back(std::move(graph));
        shared.overlaps = patterns::find_overlaps(users);
    }

    json report = {{"sessions", sessions},
                   {"users", by_user.size()},
                   {"overlaps", patterns::to_json(shared, &vocab)["overlaps"]}};
    if (o.dot) {
        require(g.out, "--out");
        write_text(g.out, patterns::export_dot(graphs, reports, shared.overlaps));
        report["dot"] = g.out;
    }
    emit(out, report);
    return 0;
}

int run_stats(const Global&, const StatsOptions& o, std::ostream& out) {
    std::vector<double> x = o.x;
    std::vector<double> y = o.y;
    if (!o.data.empty()) {
        require(o.x_class, "--x-class");
        require(o.y_class, "--y-class");
        if (o.metric != "actions" && o.metric != "dwell")
            throw InvalidArgument("--metric must be actions or dwell");
        const Behavior bx = behavior_arg(o.x_class);
        const Behavior by = behavior_arg(o.y_class);
        Dataset data = load_dataset(o.data);
        for (const auto* split : {&data.train, &data.val, &data.test}) {
            for (const auto& p : *split) {
                double v = static_cast<double>(p.size());
                if (o.metric == "dwell") {
                    v = 0.0;
                    for (const auto& a : p.actions) v += a.dwell;
                    v /= static_cast<double>(p.size());
                }
                if (p.label == bx) x.push_back(v);
                if (p.label == by) y.push_back(v);
            }
        }
    }
    auto res = stats::mann_whitney_one_tailed(x, y, stats::parse_alternative(o.alternative));
    emit(out, {{"alternative", o.alternative},
               {"nx", x.size()},
               {"ny", y.size()},
               {"u", res.u},
               {"p", res.p},
               {"exact", res.exact}});
    return 0;
}

int run_params_report(const Global&, const ParamsOptions& o, std::ostream& out) {
    if (!o.model.empty()) {
        emit(out, apm::parameter_report(load_model(o.model).checkpoint.params));
        return 0;
    }
    if (o.vocab == 0) throw InvalidArgument("give --model or --vocab");
    emit(out, apm::parameter_report(
                  apm::ApmParams::zeros(o.vocab, o.embedding_dim, o.latent, mode_arg(o.mode))));
    return 0;
}

}  // namespace clickpath::cli
