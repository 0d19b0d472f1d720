#include <algorithm>
#include <cmath>
#include <set>

#include "apm_internal.hpp"
#include "clickpath/error.hpp"
#include "clickpath/numkernel.hpp"
#include "clickpath/random.hpp"
#include "clickpath/vocabulary.hpp"

namespace clickpath::apm {

using num::Matrix;

std::string_view to_string(CandidateMode m) {
    return m == CandidateMode::kStandard ? "standard" : "ungated";
}

CandidateMode parse_candidate_mode(std::string_view s) {
    if (s == "ungated") return CandidateMode::kUngated;
    if (s == "standard") return CandidateMode::kStandard;
    throw InvalidParams("unknown candidate mode '" + std::string(s) + "'");
}

namespace {

CellWeights zero_cell(std::size_t e, std::size_t h) {
    return {Matrix(h, e), Matrix(h, h), Matrix(h, e), Matrix(h, h), Matrix(h, e), Matrix(h, h)};
}

void fill_uniform(Matrix& m, Rng& rng, double limit) {
    for (double& v : m.data()) v = rng.uniform(-limit, limit);
}

void fill_glorot(Matrix& m, Rng& rng) {
    fill_uniform(m, rng, std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols())));
}

template <class Params, class Fn>
void visit_tensors(Params& p, Fn&& fn) {
    fn("embedding", p.embedding);
    auto cell = [&](const char* prefix, auto& c) {
        const std::string s(prefix);
        fn(s + ".pz", c.pz);
        fn(s + ".qz", c.qz);
        fn(s + ".pr", c.pr);
        fn(s + ".qr", c.qr);
        fn(s + ".ph", c.ph);
        fn(s + ".qh", c.qh);
    };
    cell("encoder", p.encoder);
    cell("decoder", p.decoder);
    fn("out_weight", p.out_weight);
    fn("out_bias", p.out_bias);
}

}  // namespace

ApmParams ApmParams::zeros(std::size_t vocab_size, std::size_t embedding_dim,
                           std::size_t latent_dim, CandidateMode mode) {
    ApmParams p;
    p.vocab_size = vocab_size;
    p.embedding_dim = embedding_dim;
    p.latent_dim = latent_dim;
    p.mode = mode;
    p.embedding = Matrix(vocab_size, embedding_dim);
    p.encoder = zero_cell(embedding_dim, latent_dim);
    p.decoder = zero_cell(embedding_dim, latent_dim);
    p.out_weight = Matrix(vocab_size, latent_dim);
    p.out_bias = Matrix(vocab_size, 1);
    return p;
}

ApmParams ApmParams::random(std::size_t vocab_size, std::size_t embedding_dim,
                            std::size_t latent_dim, std::uint64_t seed, CandidateMode mode) {
    ApmParams p = zeros(vocab_size, embedding_dim, latent_dim, mode);
    Rng rng(seed);
    fill_uniform(p.embedding, rng, 0.5);
    for (CellWeights* c : {&p.encoder, &p.decoder}) {
        for (Matrix* m : {&c->pz, &c->qz, &c->pr, &c->qr, &c->ph, &c->qh}) fill_glorot(*m, rng);
    }
    fill_glorot(p.out_weight, rng);
    return p;
}

void ApmParams::load_embedding(const Matrix& vectors) {
    if (!vectors.same_shape(embedding)) {
        throw ShapeMismatch("load_embedding", embedding.rows(), embedding.cols(), vectors.rows(),
                            vectors.cols());
    }
    embedding = vectors;
}

void ApmParams::for_each(const std::function<void(std::string_view, Matrix&)>& fn) {
    visit_tensors(*this, [&](const std::string& name, Matrix& m) { fn(name, m); });
}

void ApmParams::for_each(const std::function<void(std::string_view, const Matrix&)>& fn) const {
    visit_tensors(*this, [&](const std::string& name, const Matrix& m) { fn(name, m); });
}

std::size_t ApmParams::parameter_count() const {
    std::size_t n = 0;
    for_each([&](std::string_view, const Matrix& m) { n += m.size(); });
    return n;
}

void ApmParams::validate() const {
    if (vocab_size == 0 || embedding_dim == 0 || latent_dim == 0)
        throw InvariantViolation("APM dimensions must be positive");
    if (embedding.rows() != vocab_size || embedding.cols() != embedding_dim)
        throw InvariantViolation("APM embedding shape inconsistent");
    try {
        detail::check_shapes(encoder, embedding_dim, latent_dim);
        detail::check_shapes(decoder, embedding_dim, latent_dim);
    } catch (const ShapeMismatch& e) {
        throw InvariantViolation(std::string("APM cell: ") + e.what());
    }
    if (out_weight.rows() != vocab_size || out_weight.cols() != latent_dim ||
        out_bias.rows() != vocab_size || out_bias.cols() != 1)
        throw InvariantViolation("APM output projection shape inconsistent");
    if (vocab_size < kFirstUrlId) throw InvariantViolation("APM vocabulary lacks reserved marks");
    for_each([](std::string_view name, const Matrix& m) {
        if (!m.all_finite())
            throw InvariantViolation("APM tensor '" + std::string(name) + "' is not finite");
    });
}

std::vector<double> ApmParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each([&](std::string_view, const Matrix& m) {
        out.insert(out.end(), m.data().begin(), m.data().end());
    });
    return out;
}

void ApmParams::unflatten(std::span<const double> values) {
    if (values.size() != parameter_count())
        throw ShapeMismatch("unflatten", values.size(), 1, parameter_count(), 1);
    std::size_t offset = 0;
    for_each([&](std::string_view, Matrix& m) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), m.size(),
                    m.data().begin());
        offset += m.size();
    });
}

namespace {

void check_token(const ApmParams& p, TokenId id) {
    if (id >= p.vocab_size) throw IndexOutOfRange(id, p.vocab_size);
}

struct Trace {
    std::vector<detail::StepCache> encoder;
    std::vector<detail::StepCache> decoder;
    std::vector<TokenId> encoder_tokens;
    std::vector<TokenId> decoder_inputs;
    std::vector<std::vector<double>> probs;
};

std::vector<double> run_encoder(const ApmParams& p, const ActionPath& path, Trace* trace) {
    if (path.empty()) throw EmptyPath();
    std::vector<double> h(p.latent_dim, 0.0);
    detail::StepCache cache;
    auto step = [&](TokenId id, double seconds) {
        check_token(p, id);
        detail::cell_forward(p.encoder, p.mode, p.embedding.row(id), h, seconds, cache);
        h = cache.h;
        if (trace) {
            trace->encoder.push_back(cache);
            trace->encoder_tokens.push_back(id);
        }
    };
    step(kSoa, 0.0);
    for (const Action& a : path.actions) step(a.url_id, a.dwell);
    step(kCoi, 0.0);
    return h;
}

// Teacher-forced decoder pass; returns summed cross-entropy.
double run_decoder(const ApmParams& p, std::span<const double> ctx,
                   std::span<const TokenId> target, Trace* trace) {
    std::vector<double> h(ctx.begin(), ctx.end());
    detail::StepCache cache;
    double loss = 0.0;
    TokenId input = kSop;
    for (TokenId y : target) {
        check_token(p, input);
        check_token(p, y);
        detail::cell_forward(p.decoder, p.mode, p.embedding.row(input), h, 0.0, cache);
        h = cache.h;
        std::vector<double> probs = output_distribution(p, h);
        loss += num::cross_entropy(y, probs);
        if (trace) {
            trace->decoder.push_back(cache);
            trace->decoder_inputs.push_back(input);
            trace->probs.push_back(std::move(probs));
        }
        input = y;
    }
    return loss;
}

void check_examples(std::span<const TrainExample> examples) {
    if (examples.empty()) throw EmptyDataset();
    for (const auto& ex : examples) {
        if (ex.target.empty()) throw InvalidArgument("training example with empty target");
        if (ex.prefix.empty()) throw EmptyPath();
    }
}

double l2_term(const ApmParams& p, double lambda) {
    if (lambda == 0.0) return 0.0;
    double s = 0.0;
    p.for_each([&](std::string_view, const Matrix& m) {
        for (double v : m.data()) s += v * v;
    });
    return lambda * s;
}

}  // namespace

ContextTensor encode(const ApmParams& p, const ActionPath& path) {
    return {run_encoder(p, path, nullptr)};
}

std::vector<double> output_distribution(const ApmParams& p, std::span<const double> h) {
    std::vector<double> logits(p.vocab_size);
    num::gemv(p.out_weight, h, logits);
    auto bias = p.out_bias.data();
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += bias[i];
    num::softmax_inplace(logits);
    return logits;
}

namespace {

std::vector<double> first_decoder_state(const ApmParams& p, const ContextTensor& ctx) {
    return cell_step(p.decoder, p.mode, p.embedding.row(kSop), ctx.value, 0.0);
}

TokenId argmax_lowest(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return static_cast<TokenId>(best);
}

}  // namespace

std::vector<TokenId> decode_greedy(const ApmParams& p, const ContextTensor& ctx,
                                   std::size_t max_len) {
    if (max_len == 0) throw InvalidArgument("decode_greedy: max_len must be >= 1");
    if (ctx.value.size() != p.latent_dim)
        throw ShapeMismatch("decode_greedy", ctx.value.size(), 1, p.latent_dim, 1);
    std::vector<TokenId> out;
    std::vector<double> h = ctx.value;
    TokenId input = kSop;
    while (out.size() < max_len) {
        h = cell_step(p.decoder, p.mode, p.embedding.row(input), h, 0.0);
        const TokenId next = argmax_lowest(output_distribution(p, h));
        out.push_back(next);
        if (is_eoa(next)) break;
        input = next;
    }
    return out;
}

Classification classify(const ApmParams& p, const ActionPath& path, ClassifyMode mode) {
    const ContextTensor ctx = encode(p, path);
    const std::vector<double> h = first_decoder_state(p, ctx);
    std::vector<double> logits(p.vocab_size);
    num::gemv(p.out_weight, h, logits);
    auto bias = p.out_bias.data();
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += bias[i];

    Classification c;
    std::array<double, 3> eoa = {logits[kEoaTrg], logits[kEoaPur], logits[kEoaExp]};
    num::softmax_inplace(eoa);
    c.probs = eoa;
    if (mode == ClassifyMode::kRestricted) {
        c.label = kAllBehaviors[argmax_lowest(eoa)];
    } else {
        c.label = behavior_for(argmax_lowest(logits));
    }
    return c;
}

Prediction predict_suffix(const ApmParams& p, const ActionPath& prefix, std::size_t max_len) {
    Prediction pred;
    pred.tokens = decode_greedy(p, encode(p, prefix), max_len);
    std::copy_if(pred.tokens.begin(), pred.tokens.end(), std::back_inserter(pred.urls),
                 [](TokenId id) { return !is_mark(id); });
    return pred;
}

std::size_t prefix_length(std::size_t n, double fraction) {
    if (n == 0) return 0;
    const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
    const auto k = static_cast<std::size_t>(std::max(1.0, raw));
    return std::min(k, n);
}

std::vector<TrainExample> make_examples(std::span<const ActionPath> paths,
                                        const TrainConfig& config) {
    std::vector<TrainExample> out;
    for (const ActionPath& path : paths) {
        if (!path.label) throw LabelMissing(path.session_id);
        if (path.empty()) throw EmptyPath();
        const TokenId eoa = eoa_for(*path.label);
        const std::size_t n = path.size();
        std::set<std::size_t> lengths;
        if (config.task == TrainTask::kClassification) {
            lengths.insert(n);
        } else {
            for (double f : config.prefix_fractions) lengths.insert(prefix_length(n, f));
        }
        for (std::size_t k : lengths) {
            TrainExample ex{prefix_of(path, k), {}};
            for (std::size_t i = k; i < n; ++i) ex.target.push_back(path.actions[i].url_id);
            ex.target.push_back(eoa);
            out.push_back(std::move(ex));
        }
    }
    return out;
}

double sequence_loss(const ApmParams& p, std::span<const TrainExample> examples,
                     double l2_lambda) {
    check_examples(examples);
    double ce = 0.0;
    for (const auto& ex : examples) {
        const std::vector<double> ctx = run_encoder(p, ex.prefix, nullptr);
        ce += run_decoder(p, ctx, ex.target, nullptr) / static_cast<double>(ex.target.size());
    }
    return ce / static_cast<double>(examples.size()) + l2_term(p, l2_lambda);
}

LossAndGradient loss_and_gradient(const ApmParams& p, std::span<const TrainExample> examples,
                                  double l2_lambda) {
    check_examples(examples);
    const double per_example = 1.0 / static_cast<double>(examples.size());
    const std::size_t H = p.latent_dim;
    const std::size_t E = p.embedding_dim;

    LossAndGradient out{0.0, ApmParams::zeros(p.vocab_size, E, H, p.mode)};
    ApmParams& g = out.grad;
    double ce = 0.0;

    std::vector<double> dh(H), dh_prev(H), du(E), dlogits(p.vocab_size);
    Trace trace;
    for (const auto& ex : examples) {
        trace = Trace{};
        const double scale = per_example / static_cast<double>(ex.target.size());
        const std::vector<double> ctx = run_encoder(p, ex.prefix, &trace);
        ce += run_decoder(p, ctx, ex.target, &trace) * scale;

        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t j = trace.decoder.size(); j-- > 0;) {
            const auto& cache = trace.decoder[j];
            dlogits = trace.probs[j];
            dlogits[ex.target[j]] -= 1.0;
            for (double& v : dlogits) v *= scale;
            num::outer_acc(g.out_weight, dlogits, cache.h);
            auto db = g.out_bias.data();
            for (std::size_t i = 0; i < dlogits.size(); ++i) db[i] += dlogits[i];
            num::gemv_transposed_acc(p.out_weight, dlogits, dh);

            std::fill(du.begin(), du.end(), 0.0);
            detail::cell_backward(p.decoder, p.mode, cache, dh, g.decoder, du, dh_prev);
            auto demb = g.embedding.row(trace.decoder_inputs[j]);
            for (std::size_t k = 0; k < E; ++k) demb[k] += du[k];
            dh.swap(dh_prev);
        }
        for (std::size_t t = trace.encoder.size(); t-- > 0;) {
            std::fill(du.begin(), du.end(), 0.0);
            detail::cell_backward(p.encoder, p.mode, trace.encoder[t], dh, g.encoder, du, dh_prev);
            auto demb = g.embedding.row(trace.encoder_tokens[t]);
            for (std::size_t k = 0; k < E; ++k) demb[k] += du[k];
            dh.swap(dh_prev);
        }
    }

    out.loss = ce + l2_term(p, l2_lambda);
    if (l2_lambda != 0.0) {
        std::vector<const Matrix*> src;
        p.for_each([&](std::string_view, const Matrix& m) { src.push_back(&m); });
        std::size_t i = 0;
        g.for_each([&](std::string_view, Matrix& m) {
            auto pd = src[i++]->data();
            auto gd = m.data();
            for (std::size_t k = 0; k < gd.size(); ++k) gd[k] += 2.0 * l2_lambda * pd[k];
        });
    }
    return out;
}

}  // namespace clickpath::apm
