#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace clickpath::cli {

struct Global {
    std::uint64_t seed = 1;
    std::string out;
};

struct GenOptions {
    std::vector<std::string> classes = {"trg", "pur", "exp"};
    std::vector<std::size_t> counts = {132, 38, 19};
    std::string params_file;
};

struct IngestOptions {
    std::string in;
    std::int64_t tolerance_ms = 0;
    bool no_normalize = false;
};

struct EmbedOptions {
    std::string data;
    std::string in;
    std::size_t dim = 16;
    std::size_t window = 2;
    std::size_t negatives = 5;
    std::size_t epochs = 20;
    double learning_rate = 0.025;
    bool exact = false;
    std::string nearest;
    std::size_t top = 5;
};

struct TrainOptions {
    std::string data;
    std::size_t epochs = 500;
    std::size_t batch = 32;
    std::size_t latent = 10;
    std::size_t embedding_dim = 16;
    double learning_rate = 0.001;
    double l2 = 1e-7;
    std::size_t patience = 1000;
    std::string mode = "ungated";
    std::string task = "sequence";
    std::vector<double> fractions = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t embed_epochs = 20;
    bool no_pretrain = false;
    bool verbose = false;
};

struct ClassifyOptions {
    std::string model;
    std::string path;
    std::string events;
    std::string strictness = "restricted";
};

struct PredictOptions {
    std::string model;
    std::string path;
    std::size_t max_len = 20;
};

struct CurveOptions {
    std::string model;
    std::string data;
    std::string split = "test";
    std::vector<double> fractions = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
};

struct PatternOptions {
    std::string in;
    std::string data;
    std::vector<std::string> sessions;
    bool dot = false;
    std::size_t min_cluster = 3;
    std::size_t min_ring = 3;
};

struct StatsOptions {
    std::vector<double> x;
    std::vector<double> y;
    std::string alternative = "greater";
    std::string data;
    std::string metric = "actions";
    std::string x_class;
    std::string y_class;
};

struct ParamsOptions {
    std::string model;
    std::size_t vocab = 0;
    std::size_t embedding_dim = 16;
    std::size_t latent = 10;
    std::string mode = "ungated";
};

// Each command writes its JSON result to `out` and returns an exit code.
// Library errors propagate to the caller.
int run_gen(const Global& g, const GenOptions& o, std::ostream& out);
int run_ingest(const Global& g, const IngestOptions& o, std::ostream& out);
int run_embed(const Global& g, const EmbedOptions& o, std::ostream& out);
int run_train(const Global& g, const TrainOptions& o, std::ostream& out);
int run_classify(const Global& g, const ClassifyOptions& o, std::ostream& out);
int run_predict(const Global& g, const PredictOptions& o, std::ostream& out);
int run_eval_curve(const Global& g, const CurveOptions& o, std::ostream& out);
int run_patterns(const Global& g, const PatternOptions& o, std::ostream& out);
int run_stats(const Global& g, const StatsOptions& o, std::ostream& out);
int run_params_report(const Global& g, const ParamsOptions& o, std::ostream& out);

}  // namespace clickpath::cli
