// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "clickpath/apm.hpp"
#include "clickpath/dataset.hpp"
#include "clickpath/eval.hpp"
#include "clickpath/events.hpp"
#include "clickpath/numkernel.hpp"
#include "clickpath/patterns.hpp"
#include "clickpath/random.hpp"
#include "clickpath/stats.hpp"
#include "clickpath/synthgen.hpp"
#include "clickpath/url2vec.hpp"
#include "clickpath/vocabulary.hpp"
#include "support/oracles.hpp"

using namespace clickpath;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream ss;
    ss.precision(digits);
    ss << std::fixed << v;
    return ss.str();
}

std::string sci(double v) {
    std::ostringstream ss;
    ss.precision(2);
    ss << std::scientific << v;
    return ss.str();
}

std::string joined(const std::set<std::size_t>& s) {
    std::string out;
    for (auto v : s) out += (out.empty() ? "" : " ") + std::to_string(v);
    return out;
}

ActionPath labeled(std::vector<TokenId> ids, std::vector<double> dwell, Behavior label) {
    ActionPath p;
    p.session_id = "p";
    for (std::size_t i = 0; i < ids.size(); ++i) p.actions.push_back({ids[i], dwell[i]});
    p.label = label;
    return p;
}

// Training run shared by the classification and curve criteria.
struct TrainedModel {
    Dataset data;
    apm::ApmParams params;
    double seconds = 0.0;
    std::size_t best_epoch = 0;
};

TrainedModel train_on_synthetic() {
    const auto t0 = std::chrono::steady_clock::now();
    auto ds = synth::gen_dataset({132, 38, 19}, synth::GenParams::defaults(), 7);
    auto ingested = ingest_events_string(ds.to_jsonl());
    TrainedModel m{assemble_dataset(ingested.sessions, ds.manifest()), {}, 0.0, 0};

    constexpr std::size_t kEmbeddingDim = 16;
    auto init = apm::ApmParams::random(m.data.vocab.size(), kEmbeddingDim, 10, 1);
    url2vec::Config ec;
    ec.dim = kEmbeddingDim;
    auto pairs = url2vec::build_pairs(m.data.train, ec.window);
    init.load_embedding(url2vec::train_embeddings(pairs, m.data.vocab.size(), ec).input_vectors);

    apm::TrainConfig cfg;
    cfg.epochs = 500;
    cfg.batch_size = 32;
    auto result = apm::train(m.data.train, m.data.val, std::move(init), cfg);
    m.params = std::move(result.params);
    m.best_epoch = result.best_epoch;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

void classification_and_curve() {
    auto m = train_on_synthetic();
    const double acc = eval::classification_accuracy(m.params, m.data.test);
    report("behavior-classification", acc >= 0.95 && m.seconds <= 600.0,
           "test accuracy " + fmt(acc) + " (>= 0.95) on " + std::to_string(m.data.test.size()) +
               " paths, " + fmt(m.seconds, 1) + " s (<= 600 s), best epoch " +
               std::to_string(m.best_epoch));

    const std::vector<double> fractions = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
    auto curve = eval::fraction_curve(m.params, m.data.test, fractions);
    const double at02 = curve.front().accuracy;
    const double at09 = curve[7].accuracy;
    const double at099 = curve.back().accuracy;
    report("fraction-curve", at09 - at02 >= 0.15 && at099 == acc,
           "acc(0.9) - acc(0.2) = " + fmt(at09) + " - " + fmt(at02) + " = " + fmt(at09 - at02) +
               " (>= 0.15); acc(0.99) = " + fmt(at099) + " vs classification " + fmt(acc) +
               " (exact)");
}

double apm_gradient_error(apm::CandidateMode mode) {
    auto p = apm::ApmParams::random(10, 3, 3, 13, mode);
    Rng rng(14);
    for (double& v : p.out_bias.data()) v = rng.uniform(-0.5, 0.5);
    std::vector<ActionPath> paths{labeled({7, 8, 9, 7}, {1.5, 0.2, 4.0, 2.0}, Behavior::kTargeted),
                                  labeled({9, 8}, {0.7, 3.0}, Behavior::kExplorative)};
    apm::TrainConfig cfg;
    cfg.prefix_fractions = {0.5, 1.0};
    auto ex = apm::make_examples(paths, cfg);
    const double lambda = 0.01;
    auto r = num::grad_check(
        [&](std::span<const double> x) {
            auto q = p;
            q.unflatten(x);
            return apm::sequence_loss(q, ex, lambda);
        },
        p.flatten(),
        [&](std::span<const double> x) {
            auto q = p;
            q.unflatten(x);
            return apm::loss_and_gradient(q, ex, lambda).grad.flatten();
        });
    return r.max_relative_error;
}

double url2vec_gradient_error() {
    using url2vec::EmbeddingTable;
    Rng rng(5);
    const TokenId a = kFirstUrlId, b = a + 1, c = a + 2;
    EmbeddingTable t{num::Matrix(kFirstUrlId + 4, 4), num::Matrix(kFirstUrlId + 4, 4)};
    for (double& v : t.input_vectors.data()) v = rng.uniform(-1, 1);
    for (double& v : t.output_vectors.data()) v = rng.uniform(-1, 1);
    const url2vec::ContextPair pair{a, b};
    const std::vector<TokenId> negs{c, a + 3, c};
    const std::size_t n = t.input_vectors.size();
    auto unpack = [&](std::span<const double> x) {
        EmbeddingTable u = t;
        std::copy(x.begin(), x.begin() + static_cast<long>(n), u.input_vectors.data().begin());
        std::copy(x.begin() + static_cast<long>(n), x.end(), u.output_vectors.data().begin());
        return u;
    };
    auto flat = [](const EmbeddingTable& g) {
        std::vector<double> out(g.input_vectors.data().begin(), g.input_vectors.data().end());
        out.insert(out.end(), g.output_vectors.data().begin(), g.output_vectors.data().end());
        return out;
    };
    auto r = num::grad_check(
        [&](std::span<const double> v) { return url2vec::ns_pair_loss(unpack(v), pair, negs); }, flat(t),
        [&](std::span<const double> v) { return flat(url2vec::ns_pair_gradient(unpack(v), pair, negs)); });
    return r.max_relative_error;
}

void gradients() {
    const double paper = apm_gradient_error(apm::CandidateMode::kUngated);
    const double standard = apm_gradient_error(apm::CandidateMode::kStandard);
    const double u2v = url2vec_gradient_error();
    report("gradient-correctness", paper < 1e-4 && standard < 1e-4 && u2v < 1e-4,
           "max relative error apm/paper " + sci(paper) + ", apm/standard " + sci(standard) +
               ", url2vec " + sci(u2v) + " (< 1e-4)");
}

void overfit() {
    auto path = labeled({7, 8, 9, 10, 11, 12, 13, 14, 15, 16}, {1, 3, 2, 8, 1, 1, 4, 2, 6, 1},
                        Behavior::kPurposive);
    apm::TrainConfig cfg;
    cfg.epochs = 500;
    cfg.learning_rate = 0.01;
    std::vector<ActionPath> one{path};
    auto r = apm::train(one, one, apm::ApmParams::random(17, 8, 10, 1), cfg);
    const double loss = apm::sequence_loss(r.params, apm::make_examples(one, cfg), cfg.l2_lambda);
    const std::size_t cut = apm::prefix_length(path.size(), 0.8);
    auto pred = apm::predict_suffix(r.params, prefix_of(path, cut), path.size());
    std::vector<TokenId> want;
    for (std::size_t i = cut; i < path.size(); ++i) want.push_back(path.actions[i].url_id);
    want.push_back(kEoaPur);
    report("overfit-sanity", loss < 0.01 && pred.tokens == want,
           "loss " + fmt(loss, 6) + " (< 0.01), 80% prefix suffix " +
               (pred.tokens == want ? "exact" : "wrong"));
}

void url2vec_structure() {
    Rng rng(9);
    std::vector<ActionPath> paths;
    const std::vector<TokenId> g1{7, 8, 9, 10}, g2{11, 12, 13, 14};
    for (int i = 0; i < 60; ++i) {
        const auto& g = i % 2 ? g2 : g1;
        ActionPath p;
        for (int k = 0; k < 12; ++k) p.actions.push_back({g[rng.below(g.size())], 1.0});
        paths.push_back(p);
    }
    url2vec::Config c;
    c.epochs = 30;
    auto t = url2vec::train_embeddings(url2vec::build_pairs(paths, 2), 15, c);
    double intra = 0.0, inter = 0.0;
    int ni = 0, nx = 0;
    for (TokenId a = 7; a < 15; ++a)
        for (TokenId b = a + 1; b < 15; ++b) {
            if ((a < 11) == (b < 11)) {
                intra += url2vec::similarity(t, a, b);
                ++ni;
            } else {
                inter += url2vec::similarity(t, a, b);
                ++nx;
            }
        }
    const double gap = intra / ni - inter / nx;

    const TokenId A = kFirstUrlId, B = A + 1, C = A + 2;
    ActionPath alt;
    for (int i = 0; i < 200; ++i) alt.actions.push_back({i % 2 ? B : A, 1.0});
    auto pairs = url2vec::build_pairs(std::vector<ActionPath>{alt}, 1);
    url2vec::Config toy;
    toy.window = 1;
    toy.dim = 8;
    toy.negatives = 5;
    toy.epochs = 50;
    auto ns = url2vec::train_embeddings(pairs, kFirstUrlId + 3, toy);
    auto exact = oracle::softmax_oracle(url2vec::initialize(pairs, kFirstUrlId + 3, toy), pairs, 0.5, 300);
    auto ranking = [](const url2vec::EmbeddingTable& e, TokenId u) {
        std::vector<TokenId> out;
        for (auto [id, cos] : url2vec::nearest(e, u, e.vocab_size())) out.push_back(id);
        return out;
    };
    bool agree = true;
    for (TokenId u : {A, B, C}) agree &= ranking(ns, u) == ranking(exact, u);
    report("url2vec-structure", gap >= 0.2 && agree,
           "intra - inter cosine " + fmt(gap) + " (>= 0.2); nearest-neighbor rankings " +
               (agree ? "agree" : "differ") + " with the exact-softmax oracle");
}

ActionPath fixture(std::initializer_list<int> seq, std::string user = "u") {
    ActionPath p;
    p.user_id = std::move(user);
    for (int n : seq) p.actions.push_back({100 + static_cast<TokenId>(n), 1.0});
    return p;
}

std::set<std::size_t> visit_orders(const patterns::ClickGraph& g, const std::vector<TokenId>& ids) {
    std::set<std::size_t> out;
    for (auto id : ids) out.insert(g.node(id).first_visit_order);
    return out;
}

void pattern_fixtures() {
    using namespace patterns;
    auto g4 = build_graph(fixture({1, 2, 3, 4, 3, 5, 2, 1, 6, 7, 8, 7, 9, 6, 1, 10, 11, 12, 13, 10, 12,
                                  14, 12, 10, 1, 15, 16}));
    std::set<std::size_t> leaves;
    for (const auto& l : analyze(g4).hesitation_leaves) {
        auto o = visit_orders(g4, l.nodes);
        leaves.insert(o.begin(), o.end());
    }
    const bool leaves_ok = leaves == std::set<std::size_t>{4, 8, 14};

    auto g5 = build_graph(fixture({1, 2, 3, 1, 3, 4, 5, 4, 6, 4, 7, 8, 7, 9, 7, 10}));
    std::set<std::size_t> roots;
    for (const auto& s : find_breadth_stars(g5)) roots.insert(g5.node(s.root).first_visit_order);
    const bool stars_ok = roots == std::set<std::size_t>{4, 7};

    std::vector<ClickGraph> users{build_graph(fixture({1, 2, 10, 2, 11}, "p1")),
                                  build_graph(fixture({1, 2, 3, 20, 3}, "p2")),
                                  build_graph(fixture({30, 3, 4, 31}, "p3")),
                                  build_graph(fixture({40, 4, 41, 1}, "p4"))};
    const auto overlaps = find_overlaps(users);

    Rng rng(2024);
    int agree = 0;
    constexpr int kTrials = 200;
    for (int trial = 0; trial < kTrials; ++trial) {
        auto g = oracle::random_graph(rng);
        auto adj = oracle::adjacency_of(g);
        const std::uint32_t all = (1u << g.size()) - 1;
        std::set<std::set<std::size_t>> blocks;
        for (const auto& b : biconnected_blocks(g)) {
            std::set<std::size_t> s;
            for (auto id : b) s.insert(g.index_of(id));
            blocks.insert(s);
        }
        std::set<std::size_t> cuts;
        for (auto id : articulation_points(g)) cuts.insert(g.index_of(id));
        std::map<std::set<std::size_t>, std::size_t> clusters;
        for (const auto& c : find_concentrated_clusters(g)) {
            std::set<std::size_t> s;
            for (auto id : c.nodes) s.insert(g.index_of(id));
            clusters[s] = g.index_of(c.articulation);
        }
        agree += blocks == oracle::brute_blocks(adj, all) && cuts == oracle::brute_cuts(adj, all) &&
                 clusters == oracle::brute_clusters(adj, 3);
    }

    report("pattern-fixtures", leaves_ok && stars_ok && !overlaps.empty() && agree == kTrials,
           "leaves {" + joined(leaves) + "} want {4 8 14}; stars {" + joined(roots) +
               "} want {4 7}; overlap nodes " + std::to_string(overlaps.size()) + " (> 0); brute-force " +
               std::to_string(agree) + "/" + std::to_string(kTrials));
}

void statistics() {
    Rng rng(31);
    int agree = 0;
    constexpr int kTrials = 100;
    for (int trial = 0; trial < kTrials; ++trial) {
        const std::size_t nx = 1 + rng.below(5);
        const std::size_t ny = 1 + rng.below(10 - nx);
        std::vector<double> x(nx), y(ny);
        for (double& v : x) v = static_cast<double>(rng.between(0, 6));
        for (double& v : y) v = static_cast<double>(rng.between(0, 6));
        const auto alt = rng.bernoulli(0.5) ? stats::Alternative::kGreater : stats::Alternative::kLess;
        auto r = stats::mann_whitney_one_tailed(x, y, alt);
        agree += r.exact && std::abs(r.p - oracle::enumerate_p(x, y, alt)) <= 1e-12;
    }
    const std::vector<double> x{1, 2}, y{3, 4};
    const double p = stats::mann_whitney_one_tailed(x, y, stats::Alternative::kLess).p;
    report("statistics-oracle", agree == kTrials && std::abs(p - 1.0 / 6.0) <= 1e-12,
           "exact p equals enumeration in " + std::to_string(agree) + "/" + std::to_string(kTrials) +
               " trials; x=[1,2] y=[3,4] p = " + fmt(p, 6) + " (1/6)");
}

#ifdef CLICKPATH_CLI_PATH
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the full CLI pipeline inside `dir`; every command's stdout is kept.
bool run_pipeline(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = CLICKPATH_CLI_PATH;
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"gen", "gen --classes trg,pur,exp --counts 12,6,6 --seed 7 --out ds"},
        {"ingest", "ingest --in ds/events.jsonl --out paths.json"},
        {"embed", "embed --data ds --seed 3 --out emb.json"},
        {"train", "train --data ds --epochs 5 --seed 3 --out model.json"},
        {"classify", "classify --model model.json --events ds/events.jsonl"},
        {"curve", "eval-curve --model model.json --data ds --out curve.csv"},
        {"patterns", "patterns --data ds --dot --out graphs.dot"},
        {"stats", "stats --data ds --metric dwell --x-class exp --y-class trg"},
        {"params", "params-report --model model.json"},
    };
    for (const auto& [name, args] : steps) {
        const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " > " + name +
                                ".out 2> " + name + ".err";
        if (std::system(cmd.c_str()) != 0) {
            std::cout << "  step '" << name << "' failed in " << dir << std::endl;
            return false;
        }
    }
    return true;
}

void determinism() {
    const fs::path root = fs::temp_directory_path() / ("clickpath_accept_" + std::to_string(::getpid()));
    const bool ran = run_pipeline(root / "a") && run_pipeline(root / "b");
    std::size_t compared = 0;
    std::vector<std::string> differing;
    if (ran) {
        for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
            if (!entry.is_regular_file() || entry.path().extension() == ".err") continue;
            auto rel = fs::relative(entry.path(), root / "a");
            ++compared;
            if (slurp(entry.path()) != slurp(root / "b" / rel)) differing.push_back(rel.string());
        }
    }
    fs::remove_all(root);
    std::string detail = ran ? std::to_string(compared) + " JSON/CSV/DOT/JSONL outputs compared, " +
                                   std::to_string(differing.size()) + " differ"
                             : "pipeline did not run";
    for (const auto& d : differing) detail += " " + d;
    report("determinism", ran && differing.empty() && compared > 0, detail);
}
#else
void determinism() { report("determinism", false, "built without the command-line tool"); }
#endif

}  // namespace

int main() {
    gradients();
    overfit();
    url2vec_structure();
    pattern_fixtures();
    statistics();
    determinism();
    classification_and_curve();
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
