#include "clickpath/url2vec.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"
#include "clickpath/numkernel.hpp"
#include "clickpath/random.hpp"
#include "clickpath/vocabulary.hpp"

namespace clickpath::url2vec {

using num::Matrix;
using num::sigmoid;

void Config::validate() const {
    if (window < 1) throw InvalidParams("url2vec: window must be >= 1");
    if (dim < 2) throw InvalidParams("url2vec: dim must be >= 2");
    if (negatives < 1) throw InvalidParams("url2vec: negatives must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InvalidParams("url2vec: learning_rate must be positive");
}

nlohmann::json to_json(const Config& c) {
    return {{"window", c.window},
            {"dim", c.dim},
            {"negatives", c.negatives},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"seed", c.seed},
            {"objective", c.objective == Objective::kExactSoftmax ? "exact_softmax"
                                                                  : "negative_sampling"}};
}

Config config_from_json(const nlohmann::json& j) {
    Config c;
    c.window = j.value("window", c.window);
    c.dim = j.value("dim", c.dim);
    c.negatives = j.value("negatives", c.negatives);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    const std::string obj = j.value("objective", std::string("negative_sampling"));
    if (obj == "exact_softmax") {
        c.objective = Objective::kExactSoftmax;
    } else if (obj != "negative_sampling") {
        throw InvalidParams("url2vec: unknown objective '" + obj + "'");
    }
    return c;
}

std::vector<ContextPair> build_pairs(std::span<const std::vector<TokenId>> sequences,
                                     std::size_t window) {
    std::vector<ContextPair> pairs;
    std::vector<TokenId> urls;
    for (const auto& seq : sequences) {
        urls.clear();
        std::copy_if(seq.begin(), seq.end(), std::back_inserter(urls),
                     [](TokenId id) { return !is_mark(id); });
        const std::size_t n = urls.size();
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t lo = t >= window ? t - window : 0;
            const std::size_t hi = std::min(n - 1, t + window);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (j != t) pairs.push_back({urls[t], urls[j]});
            }
        }
    }
    return pairs;
}

std::vector<ContextPair> build_pairs(std::span<const ActionPath> paths, std::size_t window) {
    std::vector<std::vector<TokenId>> seqs;
    seqs.reserve(paths.size());
    for (const auto& p : paths) {
        std::vector<TokenId> ids;
        ids.reserve(p.actions.size());
        for (const auto& a : p.actions) ids.push_back(a.url_id);
        seqs.push_back(std::move(ids));
    }
    return build_pairs(seqs, window);
}

namespace {

void check_ids(std::span<const ContextPair> pairs, std::size_t vocab_size) {
    for (const auto& p : pairs) {
        if (p.center >= vocab_size) throw IndexOutOfRange(p.center, vocab_size);
        if (p.context >= vocab_size) throw IndexOutOfRange(p.context, vocab_size);
    }
}

// Ids in order of first appearance in the pair stream, then the rest ascending.
std::vector<TokenId> appearance_order(std::span<const ContextPair> pairs, std::size_t vocab_size) {
    std::vector<char> seen(vocab_size, 0);
    std::vector<TokenId> order;
    order.reserve(vocab_size);
    auto visit = [&](TokenId id) {
        if (!seen[id]) {
            seen[id] = 1;
            order.push_back(id);
        }
    };
    for (const auto& p : pairs) {
        visit(p.center);
        visit(p.context);
    }
    for (TokenId id = 0; id < vocab_size; ++id) visit(id);
    return order;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Unigram^0.75 sampler over contexts, laid out in first-appearance order.
class NegativeSampler {
public:
    explicit NegativeSampler(std::span<const ContextPair> pairs) {
        std::vector<std::pair<TokenId, double>> counts;
        std::vector<std::size_t> slot;
        for (const auto& p : pairs) {
            if (p.context >= slot.size()) slot.resize(p.context + 1, SIZE_MAX);
            if (slot[p.context] == SIZE_MAX) {
                slot[p.context] = counts.size();
                counts.push_back({p.context, 0.0});
            }
            counts[slot[p.context]].second += 1.0;
        }
        double acc = 0.0;
        for (const auto& [id, c] : counts) {
            acc += std::pow(c, 0.75);
            ids_.push_back(id);
            cumulative_.push_back(acc);
        }
    }

    TokenId draw(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return ids_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

private:
    std::vector<TokenId> ids_;
    std::vector<double> cumulative_;
};

}  // namespace

EmbeddingTable initialize(std::span<const ContextPair> pairs, std::size_t vocab_size,
                          const Config& config) {
    config.validate();
    if (vocab_size == 0) throw InvalidParams("url2vec: vocab_size must be positive");
    check_ids(pairs, vocab_size);
    EmbeddingTable t{Matrix(vocab_size, config.dim), Matrix(vocab_size, config.dim)};
    Rng rng(config.seed);
    const double half = 0.5 / static_cast<double>(config.dim);
    for (TokenId id : appearance_order(pairs, vocab_size)) {
        for (double& v : t.input_vectors.row(id)) v = rng.uniform(-half, half);
    }
    return t;
}

double ns_pair_loss(const EmbeddingTable& t, ContextPair pair, std::span<const TokenId> negatives) {
    auto vc = t.input_vectors.row(pair.center);
    double loss = -std::log(std::max(sigmoid(dot(t.output_vectors.row(pair.context), vc)),
                                     num::kProbFloor));
    for (TokenId n : negatives)
        loss -= std::log(std::max(sigmoid(-dot(t.output_vectors.row(n), vc)), num::kProbFloor));
    return loss;
}

EmbeddingTable ns_pair_gradient(const EmbeddingTable& t, ContextPair pair,
                                std::span<const TokenId> negatives) {
    const std::size_t dim = t.dim();
    EmbeddingTable g{Matrix(t.vocab_size(), dim), Matrix(t.vocab_size(), dim)};
    auto vc = t.input_vectors.row(pair.center);
    auto gc = g.input_vectors.row(pair.center);

    auto vo = t.output_vectors.row(pair.context);
    const double coef_pos = sigmoid(dot(vo, vc)) - 1.0;
    auto go = g.output_vectors.row(pair.context);
    for (std::size_t k = 0; k < dim; ++k) {
        gc[k] += coef_pos * vo[k];
        go[k] += coef_pos * vc[k];
    }
    for (TokenId n : negatives) {
        auto vn = t.output_vectors.row(n);
        const double coef = sigmoid(dot(vn, vc));
        auto gn = g.output_vectors.row(n);
        for (std::size_t k = 0; k < dim; ++k) {
            gc[k] += coef * vn[k];
            gn[k] += coef * vc[k];
        }
    }
    return g;
}

std::vector<double> context_distribution(const EmbeddingTable& t, TokenId center) {
    if (center >= t.vocab_size()) throw IndexOutOfRange(center, t.vocab_size());
    std::vector<double> logits;
    auto vc = t.input_vectors.row(center);
    for (TokenId id = kFirstUrlId; id < t.vocab_size(); ++id)
        logits.push_back(dot(t.output_vectors.row(id), vc));
    num::softmax_inplace(logits);
    return logits;
}

double exact_softmax_loss(const EmbeddingTable& t, std::span<const ContextPair> pairs) {
    if (pairs.empty()) throw EmptyCorpus();
    double loss = 0.0;
    for (const auto& p : pairs) {
        if (p.context < kFirstUrlId) throw InvalidArgument("exact softmax: context is a mark");
        auto probs = context_distribution(t, p.center);
        loss += num::cross_entropy(p.context - kFirstUrlId, probs);
    }
    return loss / static_cast<double>(pairs.size());
}

EmbeddingTable exact_softmax_gradient(const EmbeddingTable& t, std::span<const ContextPair> pairs) {
    if (pairs.empty()) throw EmptyCorpus();
    const std::size_t dim = t.dim();
    EmbeddingTable g{Matrix(t.vocab_size(), dim), Matrix(t.vocab_size(), dim)};
    const double scale = 1.0 / static_cast<double>(pairs.size());
    for (const auto& p : pairs) {
        auto probs = context_distribution(t, p.center);
        probs[p.context - kFirstUrlId] -= 1.0;
        auto vc = t.input_vectors.row(p.center);
        auto gc = g.input_vectors.row(p.center);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double coef = probs[i] * scale;
            const TokenId id = kFirstUrlId + static_cast<TokenId>(i);
            auto vo = t.output_vectors.row(id);
            auto go = g.output_vectors.row(id);
            for (std::size_t k = 0; k < dim; ++k) {
                gc[k] += coef * vo[k];
                go[k] += coef * vc[k];
            }
        }
    }
    return g;
}

EmbeddingTable train_embeddings(std::span<const ContextPair> pairs, std::size_t vocab_size,
                                const Config& config) {
    if (pairs.empty()) throw EmptyCorpus();
    EmbeddingTable t = initialize(pairs, vocab_size, config);

    if (config.objective == Objective::kExactSoftmax) {
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
            EmbeddingTable g = exact_softmax_gradient(t, pairs);
            auto ti = t.input_vectors.data();
            auto to = t.output_vectors.data();
            auto gi = g.input_vectors.data();
            auto go = g.output_vectors.data();
            for (std::size_t k = 0; k < ti.size(); ++k) {
                ti[k] -= config.learning_rate * gi[k];
                to[k] -= config.learning_rate * go[k];
            }
        }
    } else {
        NegativeSampler sampler(pairs);
        Rng rng(Rng::derive(config.seed, 1));
        std::vector<TokenId> negatives;
        std::vector<TokenId> touched;
        const std::size_t dim = config.dim;
        std::vector<double> grad_center(dim);
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
            for (const auto& p : pairs) {
                negatives.clear();
                for (std::size_t k = 0; k < config.negatives; ++k) {
                    TokenId n = sampler.draw(rng);
                    if (n != p.context) negatives.push_back(n);
                }
                // Sparse form of ns_pair_gradient followed by one SGD step; all
                // gradients are taken at the pre-update values.
                auto vc = t.input_vectors.row(p.center);
                std::fill(grad_center.begin(), grad_center.end(), 0.0);
                touched.assign(1, p.context);
                for (TokenId n : negatives) touched.push_back(n);
                std::vector<double> coefs;
                coefs.reserve(touched.size());
                coefs.push_back(sigmoid(dot(t.output_vectors.row(p.context), vc)) - 1.0);
                for (TokenId n : negatives) coefs.push_back(sigmoid(dot(t.output_vectors.row(n), vc)));
                for (std::size_t i = 0; i < touched.size(); ++i) {
                    auto vo = t.output_vectors.row(touched[i]);
                    for (std::size_t k = 0; k < dim; ++k) grad_center[k] += coefs[i] * vo[k];
                }
                for (std::size_t i = 0; i < touched.size(); ++i) {
                    auto vo = t.output_vectors.row(touched[i]);
                    for (std::size_t k = 0; k < dim; ++k)
                        vo[k] -= config.learning_rate * coefs[i] * vc[k];
                }
                for (std::size_t k = 0; k < dim; ++k) vc[k] -= config.learning_rate * grad_center[k];
            }
        }
    }
    if (!t.input_vectors.all_finite() || !t.output_vectors.all_finite())
        throw InvariantViolation("url2vec: training produced non-finite embeddings");
    return t;
}

double similarity(const EmbeddingTable& t, TokenId a, TokenId b) {
    if (a >= t.vocab_size()) throw IndexOutOfRange(a, t.vocab_size());
    if (b >= t.vocab_size()) throw IndexOutOfRange(b, t.vocab_size());
    auto va = t.input_vectors.row(a);
    auto vb = t.input_vectors.row(b);
    const double na = std::sqrt(dot(va, va));
    const double nb = std::sqrt(dot(vb, vb));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot(va, vb) / (na * nb), -1.0, 1.0);
}

std::vector<std::pair<TokenId, double>> nearest(const EmbeddingTable& t, TokenId u, std::size_t n) {
    if (u >= t.vocab_size()) throw IndexOutOfRange(u, t.vocab_size());
    if (n == 0) throw InvalidArgument("nearest: n must be >= 1");
    std::vector<std::pair<TokenId, double>> scored;
    for (TokenId id = kFirstUrlId; id < t.vocab_size(); ++id) {
        if (id != u) scored.push_back({id, similarity(t, u, id)});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (scored.size() > n) scored.resize(n);
    return scored;
}

nlohmann::json to_json(const EmbeddingTable& t, const Config& config) {
    return {{"config", to_json(config)},
            {"vocab_size", t.vocab_size()},
            {"input_vectors", num::to_json(t.input_vectors)},
            {"output_vectors", num::to_json(t.output_vectors)}};
}

std::pair<EmbeddingTable, Config> embeddings_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("input_vectors") || !j.contains("output_vectors"))
        throw DataError("embedding file needs input_vectors and output_vectors");
    EmbeddingTable t{num::matrix_from_json(j["input_vectors"]),
                     num::matrix_from_json(j["output_vectors"])};
    if (!t.input_vectors.same_shape(t.output_vectors))
        throw DataError("embedding file: input/output vector shapes differ");
    if (j.contains("vocab_size") && j["vocab_size"].get<std::size_t>() != t.vocab_size())
        throw DataError("embedding file: vocab_size does not match matrix rows");
    Config c = j.contains("config") ? config_from_json(j["config"]) : Config{};
    c.dim = t.dim();
    return {std::move(t), c};
}

}  // namespace clickpath::url2vec
