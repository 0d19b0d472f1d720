#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "clickpath/apm.hpp"
#include "clickpath/error.hpp"
#include "clickpath/numkernel.hpp"
#include "clickpath/random.hpp"

namespace clickpath::apm {

void TrainConfig::validate() const {
    if (epochs == 0) throw InvalidParams("train: epochs must be positive");
    if (batch_size == 0) throw InvalidParams("train: batch_size must be positive");
    if (!(learning_rate > 0.0)) throw InvalidParams("train: learning_rate must be positive");
    if (!(l2_lambda >= 0.0)) throw InvalidParams("train: l2_lambda must be non-negative");
    if (early_stop_patience == 0) throw InvalidParams("train: early_stop_patience must be positive");
    if (task == TrainTask::kSequence) {
        if (prefix_fractions.empty()) throw InvalidParams("train: prefix_fractions is empty");
        for (double f : prefix_fractions)
            if (!(f > 0.0 && f <= 1.0)) throw InvalidParams("train: prefix fractions must be in (0,1]");
    }
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"l2_lambda", c.l2_lambda},
            {"early_stop_patience", c.early_stop_patience},
            {"seed", c.seed},
            {"task", c.task == TrainTask::kClassification ? "classification" : "sequence"},
            {"prefix_fractions", c.prefix_fractions}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.seed = j.value("seed", c.seed);
    const std::string task = j.value("task", std::string("sequence"));
    if (task == "classification") {
        c.task = TrainTask::kClassification;
    } else if (task != "sequence") {
        throw InvalidParams("train: unknown task '" + task + "'");
    }
    c.prefix_fractions = j.value("prefix_fractions", c.prefix_fractions);
    return c;
}

TrainResult train(std::span<const ActionPath> train_paths, std::span<const ActionPath> val_paths,
                  ApmParams init, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
    config.validate();
    if (train_paths.empty()) throw EmptyDataset();
    init.validate();

    std::vector<TrainExample> examples = make_examples(train_paths, config);
    const std::vector<TrainExample> val_examples = make_examples(val_paths, config);

    std::vector<num::AdamState> adam;
    init.for_each([&](std::string_view, const num::Matrix& m) {
        adam.push_back(num::AdamState::for_param(m, config.learning_rate));
    });

    TrainResult result;
    result.params = init;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    ApmParams params = std::move(init);
    Rng rng(Rng::derive(config.seed, 2));
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(examples.begin(), examples.end());
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < examples.size(); start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, examples.size() - start);
            std::span<const TrainExample> batch(examples.data() + start, len);
            LossAndGradient lg = loss_and_gradient(params, batch, config.l2_lambda);

            std::vector<num::Matrix*> grads;
            lg.grad.for_each([&](std::string_view, num::Matrix& m) { grads.push_back(&m); });
            std::size_t i = 0;
            params.for_each([&](std::string_view, num::Matrix& m) {
                num::adam_step(m, *grads[i], adam[i]);
                ++i;
            });

            loss_sum += lg.loss * static_cast<double>(len);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(examples.size());
        rec.val_loss = val_examples.empty() ? rec.train_loss
                                            : sequence_loss(params, val_examples, config.l2_lambda);
        if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss))
            throw InvariantViolation("train: loss became non-finite at epoch " +
                                     std::to_string(epoch));
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (rec.val_loss < result.best_val_loss) {
            result.best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            result.params = params;
            since_best = 0;
        } else if (++since_best >= config.early_stop_patience) {
            result.stopped_early = true;
            break;
        }
    }
    result.params.validate();
    return result;
}

}  // namespace clickpath::apm
