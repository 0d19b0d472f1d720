#include <algorithm>

#include "clickpath/error.hpp"
#include "clickpath/patterns.hpp"
#include "patterns_internal.hpp"

namespace clickpath::patterns {

namespace {

std::uint64_t edge_key(TokenId from, TokenId to) {
    return (static_cast<std::uint64_t>(from) << 32) | to;
}

// Hopcroft-Tarjan lowpoint search over the undirected simple view.
struct BlockSearch {
    const std::vector<std::vector<std::size_t>>& adj;
    std::vector<std::size_t> disc, low;
    std::vector<bool> is_cut;
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    std::size_t timer = 0;

    explicit BlockSearch(const std::vector<std::vector<std::size_t>>& a)
        : adj(a), disc(a.size(), 0), low(a.size(), 0), is_cut(a.size(), false) {}

    void run() {
        for (std::size_t v = 0; v < adj.size(); ++v) {
            if (disc[v] == 0) visit(v, v, true);
        }
    }

    void visit(std::size_t v, std::size_t parent, bool root) {
        disc[v] = low[v] = ++timer;
        std::size_t children = 0;
        for (std::size_t w : adj[v]) {
            if (disc[w] == 0) {
                ++children;
                stack.emplace_back(v, w);
                visit(w, v, false);
                low[v] = std::min(low[v], low[w]);
                if (low[w] >= disc[v]) {
                    if (!root) is_cut[v] = true;
                    pop_block(v, w);
                }
            } else if (w != parent && disc[w] < disc[v]) {
                stack.emplace_back(v, w);
                low[v] = std::min(low[v], disc[w]);
            }
        }
        if (root && children >= 2) is_cut[v] = true;
    }

    void pop_block(std::size_t v, std::size_t w) {
        std::vector<std::size_t> block;
        while (!stack.empty()) {
            auto e = stack.back();
            stack.pop_back();
            block.push_back(e.first);
            block.push_back(e.second);
            if (e.first == v && e.second == w) break;
        }
        std::sort(block.begin(), block.end());
        block.erase(std::unique(block.begin(), block.end()), block.end());
        blocks.push_back(std::move(block));
    }
};

std::vector<TokenId> ids_of(const ClickGraph& g, const std::vector<std::size_t>& idx) {
    std::vector<TokenId> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(g.nodes()[i].id);
    return out;
}

}  // namespace

detail::BlockStructure detail::block_structure(const std::vector<std::vector<std::size_t>>& adj) {
    BlockSearch s(adj);
    s.run();
    std::sort(s.blocks.begin(), s.blocks.end());
    return {std::move(s.blocks), std::move(s.is_cut)};
}

const Node& ClickGraph::node(TokenId id) const { return nodes_[index_of(id)]; }

std::size_t ClickGraph::index_of(TokenId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw InvalidArgument("node " + std::to_string(id) + " is not in the graph");
    }
    return it->second;
}

Node& ClickGraph::add_node(TokenId id) {
    auto it = index_.find(id);
    if (it != index_.end()) return nodes_[it->second];
    index_.emplace(id, nodes_.size());
    Node n;
    n.id = id;
    n.first_visit_order = nodes_.size() + 1;
    nodes_.push_back(n);
    return nodes_.back();
}

void ClickGraph::add_edge(TokenId from, TokenId to) {
    add_node(from);
    add_node(to);
    auto key = edge_key(from, to);
    auto it = edge_index_.find(key);
    if (it != edge_index_.end()) {
        ++edges_[it->second].count;
        return;
    }
    edge_index_.emplace(key, edges_.size());
    edges_.push_back(Edge{from, to, 1});
}

std::vector<std::vector<std::size_t>> ClickGraph::undirected_adjacency() const {
    std::vector<std::vector<std::size_t>> adj(nodes_.size());
    for (const auto& e : edges_) {
        if (e.from == e.to) continue;
        auto a = index_.at(e.from);
        auto b = index_.at(e.to);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
}

ClickGraph ClickGraph::from_edges(std::span<const std::pair<TokenId, TokenId>> edges,
                                  std::span<const TokenId> isolated, std::string owner) {
    ClickGraph g(std::move(owner));
    for (const auto& [a, b] : edges) g.add_edge(a, b);
    for (TokenId id : isolated) g.add_node(id);
    return g;
}

ClickGraph build_graph(const ActionPath& path) {
    if (path.actions.empty()) throw EmptyPath();
    ClickGraph g(path.user_id);
    const Action* prev = nullptr;
    for (const auto& a : path.actions) {
        bool fresh = !g.contains(a.url_id);
        Node& n = g.add_node(a.url_id);
        n.total_dwell += a.dwell;
        ++n.visit_count;
        if (fresh && prev != nullptr) n.tree_parent = prev->url_id;
        if (prev != nullptr) g.add_edge(prev->url_id, a.url_id);
        prev = &a;
    }
    return g;
}

std::vector<std::vector<TokenId>> biconnected_blocks(const ClickGraph& g) {
    auto s = detail::block_structure(g.undirected_adjacency());
    std::vector<std::vector<TokenId>> out;
    out.reserve(s.blocks.size());
    for (const auto& b : s.blocks) out.push_back(ids_of(g, b));
    return out;
}

std::vector<TokenId> articulation_points(const ClickGraph& g) {
    auto s = detail::block_structure(g.undirected_adjacency());
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.is_cut.size(); ++i) {
        if (s.is_cut[i]) idx.push_back(i);
    }
    return ids_of(g, idx);
}

std::vector<TokenId> core_nodes(const ClickGraph& g) {
    auto adj = g.undirected_adjacency();
    std::vector<std::size_t> degree(adj.size());
    std::vector<bool> removed(adj.size(), false);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < adj.size(); ++i) {
        degree[i] = adj[i].size();
        if (degree[i] <= 1) {
            removed[i] = true;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        auto v = queue.back();
        queue.pop_back();
        for (auto w : adj[v]) {
            if (removed[w]) continue;
            if (--degree[w] <= 1) {
                removed[w] = true;
                queue.push_back(w);
            }
        }
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < adj.size(); ++i) {
        if (!removed[i]) idx.push_back(i);
    }
    return ids_of(g, idx);
}

}  // namespace clickpath::patterns
