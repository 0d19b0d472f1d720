#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/action_path.hpp"

namespace clickpath {
class Vocabulary;
}

// Clickstream graphs and the five browsing patterns: concentrated clusters,
// hesitation leaves, directed rings, breadth stars and intersected overlaps.
namespace clickpath::patterns {

struct Node {
    TokenId id = 0;
    std::size_t first_visit_order = 0;  // 1-based
    double total_dwell = 0.0;
    std::size_t visit_count = 0;
    /// Node from which this node was first reached; empty for the first node.
    std::optional<TokenId> tree_parent;
};

struct Edge {
    TokenId from = 0;
    TokenId to = 0;
    std::size_t count = 0;
};

/// Directed multigraph of one user's clickstream with traversal counts.
class ClickGraph {
public:
    ClickGraph() = default;
    explicit ClickGraph(std::string owner) : owner_(std::move(owner)) {}

    /// Builds from an edge list over ids; nodes are numbered in order of
    /// first appearance in `edges` (then `isolated`). No spanning-tree parents.
    static ClickGraph from_edges(std::span<const std::pair<TokenId, TokenId>> edges,
                                 std::span<const TokenId> isolated = {}, std::string owner = {});

    const std::string& owner() const { return owner_; }
    void set_owner(std::string owner) { owner_ = std::move(owner); }

    /// Nodes in first-visit order.
    const std::vector<Node>& nodes() const { return nodes_; }
    /// Edges in order of first traversal.
    const std::vector<Edge>& edges() const { return edges_; }

    bool contains(TokenId id) const { return index_.contains(id); }
    const Node& node(TokenId id) const;
    std::size_t index_of(TokenId id) const;
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    /// Undirected simple neighbor lists over node indices (self-loops dropped),
    /// each sorted ascending.
    std::vector<std::vector<std::size_t>> undirected_adjacency() const;

    Node& add_node(TokenId id);
    void add_edge(TokenId from, TokenId to);

private:
    std::string owner_;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<TokenId, std::size_t> index_;
    std::unordered_map<std::uint64_t, std::size_t> edge_index_;
};

/// One node per distinct URL, one counted edge per consecutive pair.
/// Throws EmptyPath.
ClickGraph build_graph(const ActionPath& path);

/// Undirected biconnected blocks (>= 2 nodes), each sorted by visit order.
std::vector<std::vector<TokenId>> biconnected_blocks(const ClickGraph& g);
/// Articulation points of the undirected view, in visit order.
std::vector<TokenId> articulation_points(const ClickGraph& g);
/// Nodes surviving iterative removal of degree <= 1 nodes (the 2-core).
std::vector<TokenId> core_nodes(const ClickGraph& g);

struct Cluster {
    std::vector<TokenId> nodes;
    TokenId articulation = 0;
};

struct LeafChain {
    std::vector<TokenId> nodes;
    TokenId attachment = 0;
};

struct Ring {
    std::vector<TokenId> nodes;  // chain order, starting at the earlier-visited end
};

struct Star {
    TokenId root = 0;
    std::vector<TokenId> children;
};

struct Overlap {
    TokenId node = 0;
    std::vector<std::string> owners;
};

struct PatternReport {
    std::vector<Cluster> clusters;
    std::vector<LeafChain> hesitation_leaves;
    std::vector<Ring> directed_rings;
    std::vector<Star> breadth_stars;
    std::vector<Overlap> overlaps;
};

/// Blocks of the 2-core with at least `min_size` nodes that connect to the
/// rest of the graph through exactly one node. That node is the block's only
/// articulation point within the core. A block forming a whole core component
/// instead counts the pendant trees at least as large as itself; with none,
/// its first-visited node is the gateway.
std::vector<Cluster> find_concentrated_clusters(const ClickGraph& g, std::size_t min_size = 3);

/// Pendant trees hanging off a cluster or ring node whose size is below the
/// smallest reported cluster (or `min_size` when there are no clusters).
std::vector<LeafChain> find_hesitation_leaves(const ClickGraph& g, const PatternReport& so_far,
                                              std::size_t min_size = 3);

/// Maximal chains of >= `min_length` nodes with undirected degree <= 2,
/// disjoint from clusters, whose ends are not adjacent.
std::vector<Ring> find_directed_rings(const ClickGraph& g, std::span<const Cluster> clusters,
                                      std::size_t min_length = 3);

/// Nodes with >= 2 children in the first-visit spanning tree.
std::vector<Star> find_breadth_stars(const ClickGraph& g);

/// Nodes present in >= 2 graphs with their owners. Throws FewerThanTwoGraphs,
/// InvalidArgument on duplicate owners.
std::vector<Overlap> find_overlaps(std::span<const ClickGraph> graphs);

struct AnalyzeOptions {
    std::size_t min_cluster_size = 3;
    std::size_t min_ring_length = 3;
};

/// Runs every single-graph detector in dependency order.
PatternReport analyze(const ClickGraph& g, const AnalyzeOptions& options = {});

/// `vocab` (optional) adds URL strings next to node ids.
nlohmann::json to_json(const PatternReport& r, const Vocabulary* vocab = nullptr);

/// Graphviz DOT rendering of one or more graphs with pattern annotations.
/// `reports` is either empty or parallel to `graphs`; `overlaps` marks
/// shared nodes. Output is byte-stable for fixed input.
std::string export_dot(std::span<const ClickGraph> graphs, std::span<const PatternReport> reports,
                       std::span<const Overlap> overlaps = {});
std::string export_dot(const ClickGraph& g, const PatternReport& report);

}  // namespace clickpath::patterns
