#include <algorithm>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"
#include "clickpath/eval.hpp"
#include "clickpath/random.hpp"
#include "clickpath/vocabulary.hpp"

namespace clickpath::eval {

double token_accuracy(std::span<const TokenId> predicted, std::span<const TokenId> truth) {
    if (truth.empty()) throw EmptyTruth();
    std::size_t common = std::min(predicted.size(), truth.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < common; ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<CurvePoint> fraction_curve(const apm::ApmParams& p, std::span<const ActionPath> paths,
                                       std::span<const double> fractions) {
    if (paths.empty()) throw EmptyDataset();
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) {
            throw InvalidArgument("fractions must lie in (0, 1]");
        }
        if (i > 0 && fractions[i] < fractions[i - 1]) {
            throw InvalidArgument("fractions must be sorted");
        }
    }
    for (const auto& path : paths) {
        if (!path.label) throw LabelMissing(path.session_id);
        if (path.empty()) throw EmptyPath();
    }

    std::vector<CurvePoint> curve;
    for (double f : fractions) {
        double total = 0.0;
        for (const auto& path : paths) {
            std::size_t k = apm::prefix_length(path.size(), f);
            std::vector<TokenId> target;
            for (std::size_t i = k; i < path.size(); ++i) target.push_back(path.actions[i].url_id);
            target.push_back(eoa_for(*path.label));
            auto pred = apm::predict_suffix(p, prefix_of(path, k), target.size());
            total += token_accuracy(pred.tokens, target);
        }
        curve.push_back(CurvePoint{f, total / static_cast<double>(paths.size()), paths.size()});
    }
    return curve;
}

std::string curve_csv(std::span<const CurvePoint> curve) {
    std::string out = "fraction,accuracy\n";
    char buf[64];
    for (const auto& pt : curve) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", pt.fraction, pt.accuracy);
        out += buf;
    }
    return out;
}

nlohmann::json curve_json(std::span<const CurvePoint> curve) {
    auto arr = nlohmann::json::array();
    for (const auto& pt : curve) {
        arr.push_back({{"fraction", pt.fraction}, {"accuracy", pt.accuracy}, {"paths", pt.paths}});
    }
    return arr;
}

double classification_accuracy(const apm::ApmParams& p, std::span<const ActionPath> paths,
                               apm::ClassifyMode mode) {
    if (paths.empty()) throw EmptyDataset();
    std::size_t hits = 0;
    for (const auto& path : paths) {
        if (!path.label) throw LabelMissing(path.session_id);
        auto c = apm::classify(p, path, mode);
        if (c.label && *c.label == *path.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(paths.size());
}

double label_accuracy(std::span<const std::optional<Behavior>> predicted,
                      std::span<const Behavior> truth) {
    if (truth.empty()) throw EmptyDataset();
    if (predicted.size() != truth.size()) {
        throw InvalidArgument("predicted and true label counts differ");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] && *predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<std::vector<std::size_t>> kfold_split(std::span<const std::optional<Behavior>> labels,
                                                  std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > labels.size()) throw InvalidK(k, labels.size());
    // Unlabeled items sort after the three classes.
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int key = labels[i] ? static_cast<int>(behavior_index(*labels[i])) : 3;
        groups[key].push_back(i);
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (auto& [key, members] : groups) {
        rng.shuffle(members.begin(), members.end());
        for (auto i : members) {
            folds[next].push_back(i);
            next = (next + 1) % k;
        }
    }
    return folds;
}

std::vector<std::vector<std::size_t>> kfold_split(std::span<const ActionPath> paths, std::size_t k,
                                                  std::uint64_t seed) {
    std::vector<std::optional<Behavior>> labels;
    labels.reserve(paths.size());
    for (const auto& p : paths) labels.push_back(p.label);
    return kfold_split(labels, k, seed);
}

}  // namespace clickpath::eval
