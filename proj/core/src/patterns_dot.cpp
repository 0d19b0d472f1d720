#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "clickpath/error.hpp"
#include "clickpath/patterns.hpp"

namespace clickpath::patterns {

namespace {

constexpr std::array<const char*, 8> kOwnerFill = {"#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f",
                                                   "#cab2d6", "#ffff99", "#8dd3c7", "#d9d9d9"};
constexpr const char* kLeafColor = "#2ca02c";
constexpr const char* kRingColor = "#ff7f0e";
constexpr const char* kStarColor = "#9467bd";

std::string node_name(TokenId id) { return "\"n" + std::to_string(id) + "\""; }

std::string fixed3(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

struct NodeStyle {
    std::size_t label = 0;
    double dwell = 0.0;
    std::size_t owner = 0;
    std::size_t owner_count = 0;
    bool shared = false;
    std::set<std::string> roles;
};

}  // namespace

std::string export_dot(std::span<const ClickGraph> graphs, std::span<const PatternReport> reports,
                       std::span<const Overlap> overlaps) {
    if (!reports.empty() && reports.size() != graphs.size()) {
        throw InvalidArgument("export_dot needs one report per graph");
    }
    std::ostringstream out;
    if (graphs.empty()) {
        out << "digraph {\n}\n";
        return out.str();
    }

    std::vector<TokenId> order;
    std::map<TokenId, NodeStyle> style;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        for (const auto& n : graphs[gi].nodes()) {
            auto [it, fresh] = style.try_emplace(n.id);
            if (fresh) {
                order.push_back(n.id);
                it->second.label = n.first_visit_order;
                it->second.owner = gi;
            }
            it->second.dwell += n.total_dwell;
            ++it->second.owner_count;
        }
    }
    for (auto& [id, s] : style) s.shared = s.owner_count >= 2;
    for (const auto& ov : overlaps) {
        auto it = style.find(ov.node);
        if (it != style.end()) it->second.shared = true;
    }
    for (const auto& r : reports) {
        for (const auto& l : r.hesitation_leaves) {
            for (auto id : l.nodes) style[id].roles.insert("leaf");
        }
        for (const auto& ring : r.directed_rings) {
            for (auto id : ring.nodes) style[id].roles.insert("ring");
        }
        for (const auto& s : r.breadth_stars) {
            style[s.root].roles.insert("star_root");
            for (auto id : s.children) style[id].roles.insert("star_child");
        }
        for (const auto& c : r.clusters) {
            for (auto id : c.nodes) style[id].roles.insert("cluster");
        }
    }

    out << "digraph clickstream {\n";
    out << "  graph [rankdir=LR, fontname=\"Helvetica\"];\n";
    out << "  node [shape=circle, style=filled, fontname=\"Helvetica\", fontsize=10];\n";
    out << "  edge [arrowsize=0.6];\n";

    std::set<TokenId> placed;
    for (std::size_t gi = 0; gi < reports.size(); ++gi) {
        for (std::size_t ci = 0; ci < reports[gi].clusters.size(); ++ci) {
            const auto& c = reports[gi].clusters[ci];
            out << "  subgraph cluster_" << gi << '_' << ci << " {\n";
            out << "    style=dotted;\n";
            out << "    label=\"cluster " << ci + 1 << "\";\n";
            for (auto id : c.nodes) {
                if (placed.insert(id).second) out << "    " << node_name(id) << ";\n";
            }
            out << "  }\n";
        }
    }

    for (auto id : order) {
        const auto& s = style.at(id);
        out << "  " << node_name(id) << " [label=\"" << s.label << "\", width="
            << fixed3(0.35 + 0.12 * std::log1p(s.dwell));
        if (s.shared) {
            out << ", fillcolor=\"black\", fontcolor=\"white\"";
        } else {
            out << ", fillcolor=\"" << kOwnerFill[s.owner % kOwnerFill.size()] << '"';
        }
        const char* border = nullptr;
        if (s.roles.contains("ring")) {
            border = kRingColor;
        } else if (s.roles.contains("star_root")) {
            border = kStarColor;
        } else if (s.roles.contains("leaf")) {
            border = kLeafColor;
        } else if (s.roles.contains("star_child")) {
            border = kStarColor;
        }
        if (border != nullptr) out << ", color=\"" << border << "\", penwidth=2.5";
        if (!s.roles.empty()) {
            out << ", comment=\"";
            bool first = true;
            for (const auto& r : s.roles) {
                out << (first ? "" : ",") << r;
                first = false;
            }
            out << '"';
        }
        out << "];\n";
    }

    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const char* color = kOwnerFill[gi % kOwnerFill.size()];
        for (const auto& e : graphs[gi].edges()) {
            out << "  " << node_name(e.from) << " -> " << node_name(e.to);
            out << " [color=\"" << (graphs.size() > 1 ? color : "#555555") << '"';
            if (e.count > 1) out << ", label=\"" << e.count << "\", penwidth=" << fixed3(1.0 + std::log(double(e.count)));
            out << "];\n";
        }
    }
    out << "}\n";
    return out.str();
}

std::string export_dot(const ClickGraph& g, const PatternReport& report) {
    return export_dot(std::span<const ClickGraph>(&g, 1), std::span<const PatternReport>(&report, 1));
}

}  // namespace clickpath::patterns
