#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "clickpath/patterns.hpp"
#include "clickpath/random.hpp"
#include "clickpath/stats.hpp"
#include "clickpath/url2vec.hpp"
#include "clickpath/vocabulary.hpp"

// Independent reference implementations shared by the unit and acceptance
// tests. None of them call the library routine they are compared against.
namespace clickpath::oracle {

using patterns::ClickGraph;
using stats::Alternative;
using url2vec::ContextPair;
using url2vec::EmbeddingTable;

using Adj = std::vector<std::set<std::size_t>>;

inline Adj adjacency_of(const ClickGraph& g) {
    Adj adj(g.size());
    for (const auto& e : g.edges()) {
        auto a = g.index_of(e.from), b = g.index_of(e.to);
        if (a == b) continue;
        adj[a].insert(b);
        adj[b].insert(a);
    }
    return adj;
}

inline std::size_t components(const Adj& adj, std::uint32_t mask) {
    std::size_t count = 0;
    std::uint32_t seen = 0;
    for (std::size_t s = 0; s < adj.size(); ++s) {
        if (!(mask >> s & 1) || (seen >> s & 1)) continue;
        ++count;
        std::vector<std::size_t> stack{s};
        seen |= 1u << s;
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            for (auto w : adj[v])
                if ((mask >> w & 1) && !(seen >> w & 1)) {
                    seen |= 1u << w;
                    stack.push_back(w);
                }
        }
    }
    return count;
}

// Articulation points by deletion: v is a cut vertex of the subgraph induced
// by `mask` when removing it raises the component count.
inline std::set<std::size_t> brute_cuts(const Adj& adj, std::uint32_t mask) {
    std::set<std::size_t> out;
    const auto base = components(adj, mask);
    for (std::size_t v = 0; v < adj.size(); ++v) {
        if (!(mask >> v & 1)) continue;
        bool isolated = true;
        for (auto w : adj[v]) isolated &= !(mask >> w & 1);
        if (!isolated && components(adj, mask & ~(1u << v)) > base) out.insert(v);
    }
    return out;
}

// Blocks as inclusion-maximal vertex sets whose induced subgraph is connected
// and has no cut vertex (an edge counts as a block).
inline std::set<std::set<std::size_t>> brute_blocks(const Adj& adj, std::uint32_t within) {
    std::vector<std::uint32_t> good;
    for (std::uint32_t m = 1; m < (1u << adj.size()); ++m) {
        if ((m & within) != m || __builtin_popcount(m) < 2) continue;
        if (components(adj, m) != 1 || !brute_cuts(adj, m).empty()) continue;
        good.push_back(m);
    }
    std::set<std::set<std::size_t>> out;
    for (auto m : good) {
        bool maximal = std::none_of(good.begin(), good.end(), [&](std::uint32_t o) { return o != m && (o & m) == m; });
        if (!maximal) continue;
        std::set<std::size_t> s;
        for (std::size_t v = 0; v < adj.size(); ++v)
            if (m >> v & 1) s.insert(v);
        out.insert(s);
    }
    return out;
}

inline std::uint32_t brute_core(const Adj& adj) {
    std::uint32_t mask = (1u << adj.size()) - 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t v = 0; v < adj.size(); ++v) {
            if (!(mask >> v & 1)) continue;
            std::size_t deg = 0;
            for (auto w : adj[v]) deg += mask >> w & 1;
            if (deg <= 1) {
                mask &= ~(1u << v);
                changed = true;
            }
        }
    }
    return mask;
}

inline std::map<std::set<std::size_t>, std::size_t> brute_clusters(const Adj& adj, std::size_t min_size) {
    const auto core = brute_core(adj);
    const auto cuts = brute_cuts(adj, core);
    std::map<std::set<std::size_t>, std::size_t> out;
    for (const auto& block : brute_blocks(adj, core)) {
        if (block.size() < min_size) continue;
        std::set<std::size_t> gates;
        for (auto v : block)
            if (cuts.count(v)) gates.insert(v);
        if (gates.empty()) {
            const std::uint32_t outside = ((1u << adj.size()) - 1) & ~core;
            for (std::size_t start = 0; start < adj.size(); ++start) {
                if (!(outside >> start & 1)) continue;
                // Grow the pendant tree containing `start` and note its anchors.
                std::uint32_t tree = 1u << start;
                for (bool grew = true; grew;) {
                    grew = false;
                    for (std::size_t v = 0; v < adj.size(); ++v)
                        if (tree >> v & 1)
                            for (auto w : adj[v])
                                if ((outside >> w & 1) && !(tree >> w & 1)) {
                                    tree |= 1u << w;
                                    grew = true;
                                }
                }
                if (static_cast<std::size_t>(__builtin_popcount(tree)) < block.size()) continue;
                for (std::size_t v = 0; v < adj.size(); ++v)
                    if (tree >> v & 1)
                        for (auto w : adj[v])
                            if (block.count(w)) gates.insert(w);
            }
            if (gates.empty()) gates.insert(*block.begin());
        }
        if (gates.size() == 1) out[block] = *gates.begin();
    }
    return out;
}

inline ClickGraph random_graph(Rng& rng) {
    const std::size_t n = 1 + rng.below(8);
    const double density = rng.uniform(0.15, 0.7);
    std::vector<std::pair<TokenId, TokenId>> edges;
    for (TokenId a = 0; a < n; ++a)
        for (TokenId b = a + 1; b < n; ++b)
            if (rng.bernoulli(density)) edges.push_back(rng.bernoulli(0.5) ? std::pair{a + 10, b + 10} : std::pair{b + 10, a + 10});
    rng.shuffle(edges.begin(), edges.end());
    std::vector<TokenId> isolated;
    for (TokenId a = 0; a < n; ++a) isolated.push_back(a + 10);
    return ClickGraph::from_edges(edges, isolated);
}

// U of the first sample by direct pair counting (ties count one half).
inline double pair_u(const std::vector<double>& x, const std::vector<double>& y) {
    double u = 0.0;
    for (double a : x)
        for (double b : y) u += a > b ? 1.0 : a == b ? 0.5 : 0.0;
    return u;
}

// Exact one-tailed p by enumerating every choice of |x| positions out of the
// pooled sample.
inline double enumerate_p(const std::vector<double>& x, const std::vector<double>& y, Alternative alt) {
    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::size_t n = pooled.size();
    const double observed = pair_u(x, y);
    std::size_t hits = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != x.size()) continue;
        std::vector<double> a, b;
        for (std::size_t i = 0; i < n; ++i) (mask >> i & 1 ? a : b).push_back(pooled[i]);
        const double u = pair_u(a, b);
        ++total;
        if (alt == Alternative::kGreater ? u >= observed - 1e-9 : u <= observed + 1e-9) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

// Plain gradient descent on the full softmax objective, written out per
// coordinate without the library's loss or gradient routines.
inline EmbeddingTable softmax_oracle(EmbeddingTable t, const std::vector<ContextPair>& pairs, double lr,
                              int steps, std::vector<double>* losses = nullptr) {
    const std::size_t V = t.vocab_size(), D = t.dim();
    for (int step = 0; step < steps; ++step) {
        std::vector<double> gi(V * D, 0.0), go(V * D, 0.0);
        double loss = 0.0;
        for (const auto& pr : pairs) {
            std::vector<double> score;
            for (TokenId w = kFirstUrlId; w < V; ++w) {
                double s = 0.0;
                for (std::size_t k = 0; k < D; ++k) s += t.output_vectors(w, k) * t.input_vectors(pr.center, k);
                score.push_back(s);
            }
            double mx = *std::max_element(score.begin(), score.end());
            double z = 0.0;
            for (double s : score) z += std::exp(s - mx);
            loss -= score[pr.context - kFirstUrlId] - mx - std::log(z);
            for (TokenId w = kFirstUrlId; w < V; ++w) {
                double coef = std::exp(score[w - kFirstUrlId] - mx) / z - (w == pr.context ? 1.0 : 0.0);
                coef /= static_cast<double>(pairs.size());
                for (std::size_t k = 0; k < D; ++k) {
                    gi[pr.center * D + k] += coef * t.output_vectors(w, k);
                    go[w * D + k] += coef * t.input_vectors(pr.center, k);
                }
            }
        }
        if (losses) losses->push_back(loss / static_cast<double>(pairs.size()));
        for (std::size_t i = 0; i < V * D; ++i) {
            t.input_vectors.data()[i] -= lr * gi[i];
            t.output_vectors.data()[i] -= lr * go[i];
        }
    }
    return t;
}

}  // namespace clickpath::oracle
