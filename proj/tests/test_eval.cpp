#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "clickpath/apm.hpp"
#include "clickpath/error.hpp"
#include "clickpath/eval.hpp"
#include "clickpath/random.hpp"
#include "clickpath/stats.hpp"
#include "clickpath/vocabulary.hpp"
#include "support/oracles.hpp"

using namespace clickpath;
using namespace clickpath::eval;
using stats::Alternative;
using clickpath::oracle::enumerate_p;
using clickpath::oracle::pair_u;

namespace {

ActionPath make_path(std::vector<TokenId> ids, Behavior label) {
    ActionPath p;
    for (auto id : ids) p.actions.push_back({id, 1.0});
    p.label = label;
    return p;
}

apm::ApmParams rigged(TokenId winner) {
    auto p = apm::ApmParams::zeros(12, 2, 2);
    p.out_bias(winner, 0) = 5.0;
    return p;
}

std::vector<double> random_sample(Rng& rng, std::size_t n, int range) {
    std::vector<double> v(n);
    for (double& x : v) x = static_cast<double>(rng.between(0, range));
    return v;
}

}  // namespace

TEST(TokenAccuracy, Examples) {
    std::vector<TokenId> a{7, 8, 9};
    EXPECT_EQ(token_accuracy(a, a), 1.0);
    EXPECT_EQ(token_accuracy(std::vector<TokenId>{10, 11, 12}, a), 0.0);
    EXPECT_NEAR(token_accuracy(std::vector<TokenId>{7, 8}, std::vector<TokenId>{7, 10, 11}), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(token_accuracy(std::vector<TokenId>{7, 8, 9, 10}, std::vector<TokenId>{7, 8}), 1.0);
    EXPECT_EQ(token_accuracy({}, a), 0.0);
    EXPECT_THROW(token_accuracy(a, {}), EmptyTruth);
}

TEST(ClassificationAccuracy, Examples) {
    std::vector<ActionPath> paths{make_path({7, 8}, Behavior::kTargeted), make_path({9}, Behavior::kTargeted),
                                  make_path({10, 11}, Behavior::kExplorative)};
    auto p = rigged(kEoaTrg);
    EXPECT_NEAR(classification_accuracy(p, paths), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(classification_accuracy(p, std::span(paths.data(), 2)), 1.0);
    EXPECT_EQ(classification_accuracy(p, std::span(paths.data() + 2, 1)), 0.0);
    EXPECT_EQ(classification_accuracy(rigged(9), paths), 0.0);
    EXPECT_NEAR(classification_accuracy(rigged(9), paths, apm::ClassifyMode::kRestricted), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(classification_accuracy(p, {}), EmptyDataset);
    paths[0].label.reset();
    EXPECT_THROW(classification_accuracy(p, paths), LabelMissing);
}

TEST(LabelAccuracy, CountsMatches) {
    std::vector<std::optional<Behavior>> pred{Behavior::kTargeted, std::nullopt, Behavior::kExplorative};
    std::vector<Behavior> truth{Behavior::kTargeted, Behavior::kPurposive, Behavior::kPurposive};
    EXPECT_NEAR(label_accuracy(pred, truth), 1.0 / 3.0, 1e-15);
    EXPECT_THROW(label_accuracy(pred, std::span(truth.data(), 2)), InvalidArgument);
    EXPECT_THROW(label_accuracy({}, {}), EmptyDataset);
}

TEST(FractionCurve, LastPointEqualsClassificationAccuracy) {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        auto p = apm::ApmParams::random(14, 3, 4, 900 + trial);
        for (double& v : p.out_bias.data()) v = rng.uniform(-1, 1);
        for (TokenId e : {kEoaTrg, kEoaPur, kEoaExp}) p.out_bias(e, 0) += 2.0;
        std::vector<ActionPath> paths;
        for (int i = 0; i < 12; ++i) {
            std::vector<TokenId> ids;
            for (std::uint64_t k = 0, n = 1 + rng.below(9); k < n; ++k)
                ids.push_back(kFirstUrlId + static_cast<TokenId>(rng.below(7)));
            paths.push_back(make_path(ids, kAllBehaviors[rng.below(3)]));
        }
        std::vector<double> fr{0.2, 0.5, 0.99};
        auto curve = fraction_curve(p, paths, fr);
        ASSERT_EQ(curve.size(), 3u);
        EXPECT_EQ(curve[2].accuracy, classification_accuracy(p, paths));
        EXPECT_EQ(curve[2].paths, paths.size());
    }
}

TEST(FractionCurve, MemorizedPathScoresOneEverywhere) {
    auto path = make_path({7, 8, 9, 10, 11, 12, 13, 14, 15, 16}, Behavior::kExplorative);
    std::vector<ActionPath> one{path};
    apm::TrainConfig cfg;
    cfg.epochs = 500;
    cfg.learning_rate = 0.01;
    auto r = apm::train(one, one, apm::ApmParams::random(17, 8, 10, 3), cfg);
    std::vector<double> fr{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
    for (const auto& pt : fraction_curve(r.params, one, fr)) EXPECT_EQ(pt.accuracy, 1.0) << pt.fraction;
}

TEST(FractionCurve, RejectsBadFractionsAndEmptyData) {
    auto p = rigged(kEoaTrg);
    std::vector<ActionPath> paths{make_path({7}, Behavior::kTargeted)};
    EXPECT_THROW(fraction_curve(p, paths, std::vector<double>{0.5, 0.2}), InvalidArgument);
    EXPECT_THROW(fraction_curve(p, paths, std::vector<double>{0.0}), InvalidArgument);
    EXPECT_THROW(fraction_curve(p, paths, std::vector<double>{1.5}), InvalidArgument);
    EXPECT_THROW(fraction_curve(p, {}, std::vector<double>{0.5}), EmptyDataset);
}

TEST(FractionCurve, CsvAndJson) {
    std::vector<CurvePoint> c{{0.2, 0.125, 4}, {0.99, 1.0, 4}};
    EXPECT_EQ(curve_csv(c), "fraction,accuracy\n0.200000,0.125000\n0.990000,1.000000\n");
    auto j = curve_json(c);
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["fraction"], 0.2);
    EXPECT_EQ(j[1]["accuracy"], 1.0);
}

TEST(KFold, Sizes) {
    std::vector<std::optional<Behavior>> ten(10, std::nullopt), eleven(11, std::nullopt);
    auto f10 = kfold_split(ten, 5, 1);
    ASSERT_EQ(f10.size(), 5u);
    for (const auto& f : f10) EXPECT_EQ(f.size(), 2u);
    std::multiset<std::size_t> sizes;
    for (const auto& f : kfold_split(eleven, 5, 1)) sizes.insert(f.size());
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{3, 2, 2, 2, 2}));
    EXPECT_THROW(kfold_split(ten, 1, 1), InvalidK);
    EXPECT_THROW(kfold_split(ten, 11, 1), InvalidK);
}

TEST(KFold, SeededPartitionStratified) {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::optional<Behavior>> labels(5 + rng.below(60));
        for (auto& l : labels)
            if (!rng.bernoulli(0.1)) l = kAllBehaviors[rng.below(3)];
        const std::size_t k = 2 + rng.below(std::min<std::size_t>(labels.size() - 1, 9));
        auto a = kfold_split(labels, k, 100 + trial);
        EXPECT_EQ(a, kfold_split(labels, k, 100 + trial));
        std::vector<int> seen(labels.size(), 0);
        std::size_t lo = SIZE_MAX, hi = 0;
        std::map<int, std::pair<std::size_t, std::size_t>> per_class;
        for (const auto& fold : a) {
            lo = std::min(lo, fold.size());
            hi = std::max(hi, fold.size());
            std::map<int, std::size_t> counts;
            for (auto i : fold) {
                ++seen[i];
                ++counts[labels[i] ? static_cast<int>(*labels[i]) : 3];
            }
            for (int c = 0; c <= 3; ++c) {
                auto& [mn, mx] = per_class.try_emplace(c, SIZE_MAX, 0).first->second;
                mn = std::min(mn, counts[c]);
                mx = std::max(mx, counts[c]);
            }
        }
        EXPECT_LE(hi - lo, 1u);
        for (int s : seen) EXPECT_EQ(s, 1);
        for (const auto& [c, range] : per_class) EXPECT_LE(range.second - range.first, 1u) << "class " << c;
    }
}

TEST(KFold, PathOverloadUsesLabels) {
    std::vector<ActionPath> paths;
    for (int i = 0; i < 9; ++i) paths.push_back(make_path({7}, kAllBehaviors[i % 3]));
    auto folds = kfold_split(paths, 3, 4);
    for (const auto& f : folds) {
        std::set<Behavior> classes;
        for (auto i : f) classes.insert(*paths[i].label);
        EXPECT_EQ(classes.size(), 3u);
    }
}

TEST(MannWhitney, TwoByTwoExample) {
    std::vector<double> x{1, 2}, y{3, 4};
    auto r = stats::mann_whitney_one_tailed(x, y, Alternative::kLess);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(r.u, 0.0);
    EXPECT_NEAR(r.p, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(stats::mann_whitney_one_tailed(x, y, Alternative::kGreater).p, 1.0, 1e-12);
}

TEST(MannWhitney, IdenticalValuesShowNoEvidence) {
    std::vector<double> x{3}, y{3};
    EXPECT_GE(stats::mann_whitney_one_tailed(x, y, Alternative::kGreater).p, 0.5);
    EXPECT_GE(stats::mann_whitney_one_tailed(x, y, Alternative::kLess).p, 0.5);
    std::vector<double> many(20, 1.0);
    auto r = stats::mann_whitney_one_tailed(many, many, Alternative::kGreater);
    EXPECT_FALSE(r.exact);
    EXPECT_EQ(r.p, 1.0);
}

TEST(MannWhitney, ExactMatchesEnumeration) {
    Rng rng(100);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nx = 1 + rng.below(9);
        const std::size_t ny = 1 + rng.below(10 - nx);
        auto x = random_sample(rng, nx, 6), y = random_sample(rng, ny, 6);
        for (auto alt : {Alternative::kGreater, Alternative::kLess}) {
            auto r = stats::mann_whitney_one_tailed(x, y, alt);
            EXPECT_TRUE(r.exact);
            EXPECT_NEAR(r.u, pair_u(x, y), 1e-12);
            EXPECT_NEAR(r.p, enumerate_p(x, y, alt), 1e-12) << "trial " << trial;
        }
    }
}

TEST(MannWhitney, UStatisticsAddUpWithoutTies) {
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> pool(4 + rng.below(20));
        std::iota(pool.begin(), pool.end(), 0.0);
        rng.shuffle(pool.begin(), pool.end());
        const std::size_t nx = 1 + rng.below(pool.size() - 1);
        std::vector<double> x(pool.begin(), pool.begin() + static_cast<long>(nx));
        std::vector<double> y(pool.begin() + static_cast<long>(nx), pool.end());
        auto a = stats::mann_whitney_one_tailed(x, y, Alternative::kGreater);
        auto b = stats::mann_whitney_one_tailed(y, x, Alternative::kGreater);
        EXPECT_NEAR(a.u + b.u, static_cast<double>(x.size() * y.size()), 1e-9);
    }
}

TEST(MannWhitney, NormalApproximationTracksExactForSmallUntiedSamples) {
    Rng rng(102);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t nx = 2 + rng.below(5), ny = 2 + rng.below(5);
        std::vector<double> pool(nx + ny);
        std::iota(pool.begin(), pool.end(), 0.0);
        rng.shuffle(pool.begin(), pool.end());
        std::vector<double> x(pool.begin(), pool.begin() + static_cast<long>(nx));
        std::vector<double> y(pool.begin() + static_cast<long>(nx), pool.end());
        for (auto alt : {Alternative::kGreater, Alternative::kLess}) {
            const double gap = std::abs(stats::mann_whitney_normal_p(x, y, alt) - stats::mann_whitney_exact_p(x, y, alt));
            worst = std::max(worst, gap);
        }
    }
    EXPECT_LE(worst, 0.05);
}

TEST(MannWhitney, NormalApproximationDivergesOnTinyTiedSamples) {
    std::vector<double> x{5}, y{5, 5, 5, 1};
    EXPECT_NEAR(stats::mann_whitney_exact_p(x, y, Alternative::kGreater), 0.8, 1e-12);
    EXPECT_NEAR(stats::mann_whitney_normal_p(x, y, Alternative::kGreater), 0.5, 1e-12);
}

TEST(MannWhitney, LargeSamplesUseNormalApproximation) {
    std::vector<double> x, y;
    for (int i = 0; i < 15; ++i) {
        x.push_back(i);
        y.push_back(i + 7.5);
    }
    auto r = stats::mann_whitney_one_tailed(x, y, Alternative::kLess);
    EXPECT_FALSE(r.exact);
    EXPECT_LT(r.p, 0.01);
    EXPECT_NEAR(r.p, stats::mann_whitney_normal_p(x, y, Alternative::kLess), 0.0);
}

TEST(MannWhitney, Errors) {
    std::vector<double> x{1.0};
    EXPECT_THROW(stats::mann_whitney_one_tailed({}, x, Alternative::kLess), EmptySample);
    EXPECT_THROW(stats::mann_whitney_normal_p(x, {}, Alternative::kLess), EmptySample);
    std::vector<double> big(61, 1.0);
    EXPECT_THROW(stats::mann_whitney_exact_p(big, x, Alternative::kLess), InvalidArgument);
    EXPECT_EQ(stats::parse_alternative("greater"), Alternative::kGreater);
    EXPECT_EQ(stats::parse_alternative("less"), Alternative::kLess);
    EXPECT_THROW(stats::parse_alternative("two-sided"), InvalidArgument);
}
