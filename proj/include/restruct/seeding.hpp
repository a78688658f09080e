#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/schema.hpp"

namespace restruct {

/// Schema meta-paths with between `min_edges` and `max_edges` edges, ordered
/// by length and then by edge-type sequence. `from`/`to` restrict the end
/// types when set. Stops early once `limit` paths are collected.
inline std::vector<MetaPath> schema_meta_paths(const Schema& schema, std::optional<int> from, std::optional<int> to,
                                               std::size_t min_edges, std::size_t max_edges,
                                               std::size_t limit = std::numeric_limits<std::size_t>::max()) {
    std::vector<MetaPath> out;
    if (limit == 0) return out;
    std::vector<MetaPath> frontier;
    for (const auto& t : schema.node_types())
        if (!from || *from == t.id) frontier.push_back({{t.id}, {}});
    for (std::size_t len = 1; len <= max_edges && !frontier.empty(); ++len) {
        std::vector<MetaPath> next;
        for (const auto& p : frontier) {
            for (const auto& e : schema.edge_types()) {
                if (e.src != p.node_types.back()) continue;
                MetaPath q = p;
                q.edge_types.push_back(e.id);
                q.node_types.push_back(e.dst);
                next.push_back(std::move(q));
            }
        }
        std::sort(next.begin(), next.end(),
                  [](const MetaPath& a, const MetaPath& b) { return std::tie(a.node_types[0], a.edge_types) < std::tie(b.node_types[0], b.edge_types); });
        if (len >= min_edges) {
            for (const auto& p : next) {
                if (to && p.node_types.back() != *to) continue;
                out.push_back(p);
                if (out.size() >= limit) return out;
            }
        }
        frontier = std::move(next);
    }
    return out;
}

/// Initial population: the `size` shortest distinct meta-paths from
/// `source_type` to `target_type`, padded by repeating them cyclically when
/// fewer exist within `max_nodes`.
inline std::vector<MetaStructure> seed_population(const Schema& schema, int source_type, int target_type,
                                                  std::size_t size, std::size_t max_nodes = 10) {
    if (size == 0) return {};
    const std::size_t max_edges = max_nodes > 1 ? max_nodes - 1 : 0;
    const auto paths = schema_meta_paths(schema, source_type, target_type, 1, max_edges, size);
    if (paths.empty())
        throw DataError("no schema path from node type '" + schema.node_type(source_type).name + "' to '" +
                        schema.node_type(target_type).name + "' within " + std::to_string(max_nodes) + " nodes");
    std::vector<MetaStructure> out;
    for (std::size_t i = 0; i < size; ++i) out.push_back(from_meta_path(paths[i % paths.size()]));
    return out;
}

} // namespace restruct
