#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/action_path.hpp"
#include "clickpath/apm.hpp"

namespace clickpath::eval {

/// Positional matches over the common length divided by the truth length.
/// Throws EmptyTruth.
double token_accuracy(std::span<const TokenId> predicted, std::span<const TokenId> truth);

struct CurvePoint {
    double fraction = 0.0;
    double accuracy = 0.0;
    std::size_t paths = 0;
};

/// Greedy accuracy when only the first ceil(f*n) actions are observed. The
/// target is the rest of the path followed by the label's EOA mark and the
/// decoder may emit at most as many tokens as the target holds.
/// Throws EmptyDataset, LabelMissing, InvalidArgument (unsorted or out of (0,1]).
std::vector<CurvePoint> fraction_curve(const apm::ApmParams& p, std::span<const ActionPath> paths,
                                       std::span<const double> fractions);

/// "fraction,accuracy\n" header plus one row per point, 6 decimals.
std::string curve_csv(std::span<const CurvePoint> curve);
nlohmann::json curve_json(std::span<const CurvePoint> curve);

/// Share of labeled paths whose predicted label equals the true one. The
/// strict mode counts a path as correct only when the full-vocabulary argmax
/// after the whole path is the right EOA mark, which is exactly the first
/// decoded token scored by fraction_curve once the suffix is empty.
/// Throws EmptyDataset, LabelMissing.
double classification_accuracy(const apm::ApmParams& p, std::span<const ActionPath> paths,
                               apm::ClassifyMode mode = apm::ClassifyMode::kStrict);

/// Throws EmptyDataset, InvalidArgument on length mismatch.
double label_accuracy(std::span<const std::optional<Behavior>> predicted,
                      std::span<const Behavior> truth);

/// Stratified k-fold assignment over item indices. Items are grouped by
/// label (unlabeled items form their own group), each group is shuffled,
/// then dealt round-robin with the dealing position carried across groups.
/// Fold sizes differ by at most one. Throws InvalidK.
std::vector<std::vector<std::size_t>> kfold_split(std::span<const std::optional<Behavior>> labels,
                                                  std::size_t k, std::uint64_t seed);
std::vector<std::vector<std::size_t>> kfold_split(std::span<const ActionPath> paths, std::size_t k,
                                                  std::uint64_t seed);

}  // namespace clickpath::eval
