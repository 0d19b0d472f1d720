#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "clickpath/error.hpp"
#include "clickpath/patterns.hpp"
#include "clickpath/vocabulary.hpp"
#include "patterns_internal.hpp"

namespace clickpath::patterns {

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

std::vector<bool> membership(const ClickGraph& g, std::span<const TokenId> ids) {
    std::vector<bool> in(g.size(), false);
    for (TokenId id : ids) in[g.index_of(id)] = true;
    return in;
}

// Connected components of the subgraph induced by `allowed`, each sorted,
// listed in order of their earliest node.
std::vector<std::vector<std::size_t>> components(const Adjacency& adj,
                                                 const std::vector<bool>& allowed) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<bool> seen(adj.size(), false);
    for (std::size_t s = 0; s < adj.size(); ++s) {
        if (!allowed[s] || seen[s]) continue;
        std::vector<std::size_t> comp{s};
        seen[s] = true;
        for (std::size_t k = 0; k < comp.size(); ++k) {
            for (auto w : adj[comp[k]]) {
                if (allowed[w] && !seen[w]) {
                    seen[w] = true;
                    comp.push_back(w);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

std::vector<TokenId> to_ids(const ClickGraph& g, const std::vector<std::size_t>& idx) {
    std::vector<TokenId> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(g.nodes()[i].id);
    return out;
}

void id_list(const std::vector<TokenId>& ids, const Vocabulary* vocab, nlohmann::json& obj) {
    obj["nodes"] = ids;
    if (vocab != nullptr) {
        auto urls = nlohmann::json::array();
        for (auto id : ids) urls.push_back(vocab->token(id));
        obj["urls"] = std::move(urls);
    }
}

}  // namespace

std::vector<Cluster> find_concentrated_clusters(const ClickGraph& g, std::size_t min_size) {
    if (min_size < 3) throw InvalidArgument("min_size must be at least 3");
    auto adj = g.undirected_adjacency();
    auto in_core = membership(g, core_nodes(g));
    Adjacency core_adj(adj.size());
    for (std::size_t v = 0; v < adj.size(); ++v) {
        if (!in_core[v]) continue;
        for (auto w : adj[v]) {
            if (in_core[w]) core_adj[v].push_back(w);
        }
    }
    auto s = detail::block_structure(core_adj);

    // Size of the pendant trees hanging off each core node.
    std::vector<std::vector<std::size_t>> pendant_sizes(adj.size());
    std::vector<bool> outside(adj.size());
    for (std::size_t v = 0; v < adj.size(); ++v) outside[v] = !in_core[v];
    for (const auto& tree : components(adj, outside)) {
        std::set<std::size_t> anchors;
        for (auto v : tree) {
            for (auto w : adj[v]) {
                if (in_core[w]) anchors.insert(w);
            }
        }
        for (auto a : anchors) pendant_sizes[a].push_back(tree.size());
    }

    std::vector<Cluster> out;
    for (const auto& block : s.blocks) {
        if (block.size() < min_size) continue;
        std::vector<std::size_t> gateways;
        for (auto v : block) {
            if (s.is_cut[v]) gateways.push_back(v);
        }
        if (gateways.empty()) {
            // A whole core component: only trees at least as large as the
            // block count as the rest of the clickstream, smaller ones are
            // detours. With no such tree the entry node is the gateway.
            for (auto v : block) {
                if (std::any_of(pendant_sizes[v].begin(), pendant_sizes[v].end(),
                                [&](std::size_t n) { return n >= block.size(); }))
                    gateways.push_back(v);
            }
            if (gateways.empty()) gateways.push_back(*std::min_element(block.begin(), block.end()));
        }
        if (gateways.size() != 1) continue;
        out.push_back(Cluster{to_ids(g, block), g.nodes()[gateways.front()].id});
    }
    return out;
}

std::vector<Ring> find_directed_rings(const ClickGraph& g, std::span<const Cluster> clusters,
                                      std::size_t min_length) {
    if (min_length < 2) throw InvalidArgument("min_length must be at least 2");
    auto adj = g.undirected_adjacency();
    std::vector<bool> allowed(adj.size(), false);
    for (std::size_t v = 0; v < adj.size(); ++v) allowed[v] = adj[v].size() <= 2;
    for (const auto& c : clusters) {
        for (auto id : c.nodes) allowed[g.index_of(id)] = false;
    }

    std::vector<Ring> out;
    for (const auto& comp : components(adj, allowed)) {
        if (comp.size() < min_length) continue;
        auto inner_degree = [&](std::size_t v) {
            return std::count_if(adj[v].begin(), adj[v].end(),
                                 [&](std::size_t w) { return allowed[w]; });
        };
        // comp is sorted, so the first endpoint found is the earlier-visited one.
        auto start = std::find_if(comp.begin(), comp.end(),
                                  [&](std::size_t v) { return inner_degree(v) < 2; });
        if (start == comp.end()) continue;  // closed loop
        std::vector<std::size_t> chain{*start};
        std::size_t prev = *start;
        std::size_t cur = *start;
        while (true) {
            std::size_t next = cur;
            for (auto w : adj[cur]) {
                if (allowed[w] && w != prev && w != cur) next = w;
            }
            if (next == cur || (chain.size() > 1 && next == prev)) break;
            chain.push_back(next);
            prev = cur;
            cur = next;
        }
        auto& ends = adj[chain.front()];
        if (std::binary_search(ends.begin(), ends.end(), chain.back())) continue;
        out.push_back(Ring{to_ids(g, chain)});
    }
    return out;
}

std::vector<LeafChain> find_hesitation_leaves(const ClickGraph& g, const PatternReport& so_far,
                                              std::size_t min_size) {
    auto adj = g.undirected_adjacency();
    auto in_core = membership(g, core_nodes(g));
    std::vector<bool> on_ring(adj.size(), false);
    std::vector<bool> anchor(adj.size(), false);
    for (const auto& r : so_far.directed_rings) {
        for (auto id : r.nodes) {
            on_ring[g.index_of(id)] = true;
            anchor[g.index_of(id)] = true;
        }
    }
    std::size_t threshold = min_size;
    if (!so_far.clusters.empty()) {
        threshold = so_far.clusters.front().nodes.size();
        for (const auto& c : so_far.clusters) {
            threshold = std::min(threshold, c.nodes.size());
            for (auto id : c.nodes) anchor[g.index_of(id)] = true;
        }
    }

    std::vector<bool> allowed(adj.size());
    for (std::size_t v = 0; v < adj.size(); ++v) allowed[v] = !in_core[v] && !on_ring[v];

    std::vector<LeafChain> out;
    for (const auto& comp : components(adj, allowed)) {
        if (comp.size() >= threshold) continue;
        std::set<std::size_t> boundary;
        for (auto v : comp) {
            for (auto w : adj[v]) {
                if (!allowed[w]) boundary.insert(w);
            }
        }
        if (boundary.size() != 1 || !anchor[*boundary.begin()]) continue;
        out.push_back(LeafChain{to_ids(g, comp), g.nodes()[*boundary.begin()].id});
    }
    return out;
}

std::vector<Star> find_breadth_stars(const ClickGraph& g) {
    std::vector<std::vector<TokenId>> children(g.size());
    for (const auto& n : g.nodes()) {
        if (n.tree_parent) children[g.index_of(*n.tree_parent)].push_back(n.id);
    }
    std::vector<Star> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (children[i].size() >= 2) out.push_back(Star{g.nodes()[i].id, std::move(children[i])});
    }
    return out;
}

std::vector<Overlap> find_overlaps(std::span<const ClickGraph> graphs) {
    if (graphs.size() < 2) throw FewerThanTwoGraphs();
    std::set<std::string> owners;
    for (const auto& g : graphs) {
        if (!owners.insert(g.owner()).second) {
            throw InvalidArgument("duplicate graph owner '" + g.owner() + "'");
        }
    }
    std::map<TokenId, std::vector<std::string>> seen;
    for (const auto& g : graphs) {
        for (const auto& n : g.nodes()) seen[n.id].push_back(g.owner());
    }
    std::vector<Overlap> out;
    for (auto& [id, who] : seen) {
        if (who.size() >= 2) out.push_back(Overlap{id, std::move(who)});
    }
    return out;
}

PatternReport analyze(const ClickGraph& g, const AnalyzeOptions& options) {
    PatternReport r;
    r.clusters = find_concentrated_clusters(g, options.min_cluster_size);
    r.directed_rings = find_directed_rings(g, r.clusters, options.min_ring_length);
    r.hesitation_leaves = find_hesitation_leaves(g, r, options.min_cluster_size);
    r.breadth_stars = find_breadth_stars(g);
    return r;
}

nlohmann::json to_json(const PatternReport& r, const Vocabulary* vocab) {
    auto url = [&](TokenId id) { return vocab != nullptr ? vocab->token(id) : std::string(); };
    nlohmann::json j;
    j["clusters"] = nlohmann::json::array();
    for (const auto& c : r.clusters) {
        nlohmann::json o;
        id_list(c.nodes, vocab, o);
        o["articulation"] = c.articulation;
        if (vocab != nullptr) o["articulation_url"] = url(c.articulation);
        j["clusters"].push_back(std::move(o));
    }
    j["hesitation_leaves"] = nlohmann::json::array();
    for (const auto& l : r.hesitation_leaves) {
        nlohmann::json o;
        id_list(l.nodes, vocab, o);
        o["attachment"] = l.attachment;
        if (vocab != nullptr) o["attachment_url"] = url(l.attachment);
        j["hesitation_leaves"].push_back(std::move(o));
    }
    j["directed_rings"] = nlohmann::json::array();
    for (const auto& ring : r.directed_rings) {
        nlohmann::json o;
        id_list(ring.nodes, vocab, o);
        j["directed_rings"].push_back(std::move(o));
    }
    j["breadth_stars"] = nlohmann::json::array();
    for (const auto& s : r.breadth_stars) {
        nlohmann::json o;
        o["root"] = s.root;
        if (vocab != nullptr) o["root_url"] = url(s.root);
        o["children"] = s.children;
        j["breadth_stars"].push_back(std::move(o));
    }
    j["overlaps"] = nlohmann::json::array();
    for (const auto& ov : r.overlaps) {
        nlohmann::json o;
        o["node"] = ov.node;
        if (vocab != nullptr) o["url"] = url(ov.node);
        o["owners"] = ov.owners;
        j["overlaps"].push_back(std::move(o));
    }
    return j;
}

}  // namespace clickpath::patterns
