#pragma once

#include <cstddef>
#include <vector>

namespace clickpath::patterns::detail {

struct BlockStructure {
    std::vector<std::vector<std::size_t>> blocks;  // each sorted, list sorted
    std::vector<bool> is_cut;
};

/// Biconnected blocks and articulation points of an undirected simple graph.
BlockStructure block_structure(const std::vector<std::vector<std::size_t>>& adj);

}  // namespace clickpath::patterns::detail
