#include <nlohmann/json.hpp>

#include "clickpath/apm.hpp"
#include "clickpath/error.hpp"

namespace clickpath::apm {

nlohmann::json to_json(const Checkpoint& c) {
    const ApmParams& p = c.params;
    nlohmann::json weights = nlohmann::json::object();
    p.for_each([&](std::string_view name, const num::Matrix& m) {
        weights[std::string(name)] = num::to_json(m);
    });
    nlohmann::json history = nlohmann::json::array();
    for (const auto& r : c.history)
        history.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}});
    nlohmann::json j = {{"latent_dim", p.latent_dim},
                        {"embedding_dim", p.embedding_dim},
                        {"vocab_size", p.vocab_size},
                        {"candidate_mode", std::string(to_string(p.mode))},
                        {"weights", weights},
                        {"loss_history", history}};
    j["train_config"] = c.train_config ? to_json(*c.train_config) : nlohmann::json(nullptr);
    return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    for (const char* key : {"latent_dim", "embedding_dim", "vocab_size", "candidate_mode", "weights"})
        if (!j.contains(key)) throw DataError(std::string("checkpoint missing '") + key + "'");
    Checkpoint c;
    c.params = ApmParams::zeros(j["vocab_size"].get<std::size_t>(),
                                j["embedding_dim"].get<std::size_t>(),
                                j["latent_dim"].get<std::size_t>(),
                                parse_candidate_mode(j["candidate_mode"].get<std::string>()));
    const auto& weights = j["weights"];
    c.params.for_each([&](std::string_view name, num::Matrix& m) {
        const std::string key(name);
        if (!weights.contains(key)) throw DataError("checkpoint missing weight '" + key + "'");
        num::Matrix loaded = num::matrix_from_json(weights[key]);
        if (!loaded.same_shape(m)) throw DataError("checkpoint weight '" + key + "' has wrong shape");
        m = std::move(loaded);
    });
    c.params.validate();
    if (j.contains("train_config") && !j["train_config"].is_null())
        c.train_config = train_config_from_json(j["train_config"]);
    if (j.contains("loss_history")) {
        for (const auto& r : j["loss_history"])
            c.history.push_back({r.at("epoch").get<std::size_t>(), r.at("train_loss").get<double>(),
                                 r.at("val_loss").get<double>()});
    }
    return c;
}

nlohmann::json parameter_report(const ApmParams& p) {
    nlohmann::json tensors = nlohmann::json::array();
    p.for_each([&](std::string_view name, const num::Matrix& m) {
        tensors.push_back({{"name", std::string(name)},
                           {"rows", m.rows()},
                           {"cols", m.cols()},
                           {"count", m.size()}});
    });
    return {{"vocab_size", p.vocab_size},
            {"embedding_dim", p.embedding_dim},
            {"latent_dim", p.latent_dim},
            {"candidate_mode", std::string(to_string(p.mode))},
            {"tensors", tensors},
            {"total", p.parameter_count()}};
}

}  // namespace clickpath::apm
