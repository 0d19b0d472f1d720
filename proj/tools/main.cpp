#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"
#include "commands.hpp"
#include "json_config.hpp"

using namespace clickpath;
using namespace clickpath::cli;

namespace {

int run(int argc, char** argv) {
    CLI::App app{"clickpath: browsing sessions to action paths, models and patterns"};
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file; flags override its values");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Global g;
    app.add_option("--seed", g.seed, "Seed for all randomness")->capture_default_str();
    app.add_option("--out", g.out, "Output path");

    int code = 0;
    std::ostream& out = std::cout;

    GenOptions gen;
    auto* c = app.add_subcommand("gen", "Generate a labeled synthetic dataset");
    c->add_option("--classes", gen.classes, "Behavior classes")->delimiter(',');
    c->add_option("--counts", gen.counts, "train,val,test path counts")->delimiter(',')->expected(3);
    c->add_option("--params", gen.params_file, "Generator parameters (JSON)");
    c->callback([&] { code = run_gen(g, gen, out); });

    IngestOptions ingest;
    c = app.add_subcommand("ingest", "Validate a JSONL session log");
    c->add_option("--in", ingest.in, "Session log")->required();
    c->add_option("--tolerance-ms", ingest.tolerance_ms, "Allowed backwards ts jump");
    c->add_flag("--no-normalize", ingest.no_normalize, "Keep URLs verbatim");
    c->callback([&] { code = run_ingest(g, ingest, out); });

    EmbedOptions embed;
    c = app.add_subcommand("embed", "Train URL embeddings");
    c->add_option("--data", embed.data, "Dataset directory (uses the train split)");
    c->add_option("--in", embed.in, "Session log (uses every session)");
    c->add_option("--dim", embed.dim);
    c->add_option("--window", embed.window);
    c->add_option("--negatives", embed.negatives);
    c->add_option("--epochs", embed.epochs);
    c->add_option("--lr", embed.learning_rate);
    c->add_flag("--exact", embed.exact, "Full softmax instead of negative sampling");
    c->add_option("--nearest", embed.nearest, "Report neighbors of this URL");
    c->add_option("--top", embed.top);
    c->callback([&] { code = run_embed(g, embed, out); });

    TrainOptions train;
    c = app.add_subcommand("train", "Train the action path model");
    c->add_option("--data", train.data, "Dataset directory")->required();
    c->add_option("--epochs", train.epochs);
    c->add_option("--batch", train.batch);
    c->add_option("--latent", train.latent);
    c->add_option("--embedding-dim", train.embedding_dim);
    c->add_option("--lr", train.learning_rate);
    c->add_option("--l2", train.l2);
    c->add_option("--patience", train.patience);
    c->add_option("--mode", train.mode, "ungated or standard candidate");
    c->add_option("--task", train.task, "sequence or classification");
    c->add_option("--fractions", train.fractions)->delimiter(',');
    c->add_option("--embed-epochs", train.embed_epochs);
    c->add_flag("--no-pretrain", train.no_pretrain, "Skip URL embedding initialization");
    c->add_flag("--verbose", train.verbose, "Per-epoch losses on stderr");
    c->callback([&] { code = run_train(g, train, out); });

    ClassifyOptions classify;
    c = app.add_subcommand("classify", "Label paths with a behavior");
    c->add_option("--model", classify.model)->required();
    c->add_option("--path", classify.path, "Path JSON file");
    c->add_option("--events", classify.events, "Session log");
    c->add_option("--mode", classify.strictness, "restricted or strict");
    c->callback([&] { code = run_classify(g, classify, out); });

    PredictOptions predict;
    c = app.add_subcommand("predict", "Predict the continuation of a path");
    c->add_option("--model", predict.model)->required();
    c->add_option("--path", predict.path, "Path JSON file")->required();
    c->add_option("--max-len", predict.max_len);
    c->callback([&] { code = run_predict(g, predict, out); });

    CurveOptions curve;
    c = app.add_subcommand("eval-curve", "Accuracy against observed path fraction");
    c->add_option("--model", curve.model)->required();
    c->add_option("--data", curve.data)->required();
    c->add_option("--split", curve.split);
    c->add_option("--fractions", curve.fractions)->delimiter(',');
    c->callback([&] { code = run_eval_curve(g, curve, out); });

    PatternOptions pat;
    c = app.add_subcommand("patterns", "Mine browsing patterns");
    c->add_option("--in", pat.in, "Session log");
    c->add_option("--data", pat.data, "Dataset directory");
    c->add_option("--session", pat.sessions, "Only these sessions")->delimiter(',');
    c->add_flag("--dot", pat.dot, "Write DOT to --out");
    c->add_option("--min-cluster", pat.min_cluster);
    c->add_option("--min-ring", pat.min_ring);
    c->callback([&] { code = run_patterns(g, pat, out); });

    StatsOptions st;
    c = app.add_subcommand("stats", "One-tailed Mann-Whitney U test");
    c->add_option("--x", st.x)->delimiter(',');
    c->add_option("--y", st.y)->delimiter(',');
    c->add_option("--alternative", st.alternative, "greater or less");
    c->add_option("--data", st.data, "Compare two classes of a dataset");
    c->add_option("--metric", st.metric, "actions or dwell");
    c->add_option("--x-class", st.x_class);
    c->add_option("--y-class", st.y_class);
    c->callback([&] { code = run_stats(g, st, out); });

    ParamsOptions pr;
    c = app.add_subcommand("params-report", "Trainable parameter counts");
    c->add_option("--model", pr.model);
    c->add_option("--vocab", pr.vocab);
    c->add_option("--embedding-dim", pr.embedding_dim);
    c->add_option("--latent", pr.latent);
    c->add_option("--mode", pr.mode);
    c->callback([&] { code = run_params_report(g, pr, out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InvariantViolation& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const SchemaViolation& e) {
        std::cerr << "SchemaViolation: line " << e.line() << " field '" << e.field() << "': " << e.what()
                  << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
