#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/io.hpp"
#include "restruct/schema.hpp"

namespace restruct {

/// Alternating node types and edge types: node_types.size() == edge_types.size() + 1.
struct MetaPath {
    std::vector<int> node_types;
    std::vector<int> edge_types;

    std::size_t length() const { return edge_types.size(); }
    auto operator<=>(const MetaPath&) const = default;
};

struct MetaEdge {
    int from = 0;
    int to = 0;
    int type = 0;
    auto operator<=>(const MetaEdge&) const = default;
};

/// A DAG over positions; each position carries a node type. Positions are
/// identities, so two positions may share a type.
struct MetaStructure {
    std::vector<int> nodes;
    std::vector<MetaEdge> edges;
    int source = 0;
    int target = 0;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t edge_count() const { return edges.size(); }
    int source_type() const { return nodes.at(static_cast<std::size_t>(source)); }
    int target_type() const { return nodes.at(static_cast<std::size_t>(target)); }
    bool operator==(const MetaStructure&) const = default;
};

inline bool path_is_valid(const MetaPath& p, const Schema& schema) {
    if (p.edge_types.empty() || p.node_types.size() != p.edge_types.size() + 1) return false;
    for (int t : p.node_types)
        if (t < 0 || t >= schema.node_type_count()) return false;
    for (std::size_t i = 0; i < p.edge_types.size(); ++i) {
        const int e = p.edge_types[i];
        if (e < 0 || e >= schema.edge_type_count()) return false;
        const auto& et = schema.edge_type(e);
        if (et.src != p.node_types[i] || et.dst != p.node_types[i + 1]) return false;
    }
    return true;
}

/// The linear structure with one position per node of the path.
inline MetaStructure from_meta_path(const MetaPath& p) {
    MetaStructure ms;
    ms.nodes = p.node_types;
    for (std::size_t i = 0; i < p.edge_types.size(); ++i)
        ms.edges.push_back({static_cast<int>(i), static_cast<int>(i + 1), p.edge_types[i]});
    ms.source = 0;
    ms.target = static_cast<int>(p.node_types.size()) - 1;
    return ms;
}

namespace detail {

inline bool in_range(const MetaStructure& ms, int pos) {
    return pos >= 0 && pos < static_cast<int>(ms.nodes.size());
}

/// Adjacency lists of edge indices, each sorted by (to, type).
inline std::vector<std::vector<int>> out_edges(const MetaStructure& ms) {
    std::vector<std::vector<int>> out(ms.nodes.size());
    for (std::size_t i = 0; i < ms.edges.size(); ++i) {
        const auto& e = ms.edges[i];
        if (in_range(ms, e.from) && in_range(ms, e.to)) out[static_cast<std::size_t>(e.from)].push_back(static_cast<int>(i));
    }
    for (auto& lst : out)
        std::sort(lst.begin(), lst.end(), [&](int a, int b) {
            const auto& ea = ms.edges[static_cast<std::size_t>(a)];
            const auto& eb = ms.edges[static_cast<std::size_t>(b)];
            return std::tie(ea.to, ea.type, a) < std::tie(eb.to, eb.type, b);
        });
    return out;
}

/// Reachability from `start` along (reverse) edges.
inline std::vector<bool> reach(const MetaStructure& ms, int start, bool reverse) {
    std::vector<bool> seen(ms.nodes.size(), false);
    if (!in_range(ms, start)) return seen;
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (const auto& e : ms.edges) {
            if (!in_range(ms, e.from) || !in_range(ms, e.to)) continue;
            const int a = reverse ? e.to : e.from;
            const int b = reverse ? e.from : e.to;
            if (a == v && !seen[static_cast<std::size_t>(b)]) {
                seen[static_cast<std::size_t>(b)] = true;
                stack.push_back(b);
            }
        }
    }
    return seen;
}

inline bool has_cycle(const MetaStructure& ms) {
    // Kahn's algorithm
    const auto n = ms.nodes.size();
    std::vector<int> indeg(n, 0);
    for (const auto& e : ms.edges)
        if (in_range(ms, e.from) && in_range(ms, e.to)) ++indeg[static_cast<std::size_t>(e.to)];
    std::vector<int> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(static_cast<int>(v));
    std::size_t done = 0;
    while (!ready.empty()) {
        const int v = ready.back();
        ready.pop_back();
        ++done;
        for (const auto& e : ms.edges)
            if (e.from == v && in_range(ms, e.to) && --indeg[static_cast<std::size_t>(e.to)] == 0) ready.push_back(e.to);
    }
    return done != n;
}

} // namespace detail

/// Every violated invariant, as human-readable messages; empty iff valid.
/// `max_nodes` of 0 disables the size check.
inline std::vector<std::string> validate(const MetaStructure& ms, const Schema& schema, std::size_t max_nodes = 0) {
    std::vector<std::string> v;
    const int n = static_cast<int>(ms.nodes.size());
    if (n == 0) {
        v.emplace_back("no nodes");
        return v;
    }
    for (int i = 0; i < n; ++i) {
        const int t = ms.nodes[static_cast<std::size_t>(i)];
        if (t < 0 || t >= schema.node_type_count())
            v.push_back("unknown node type " + std::to_string(t) + " at position " + std::to_string(i));
    }
    if (!detail::in_range(ms, ms.source)) v.push_back("source position out of range");
    if (!detail::in_range(ms, ms.target)) v.push_back("target position out of range");
    if (ms.edges.empty()) v.emplace_back("no edges");
    if (ms.source == ms.target) v.emplace_back("source equals target");
    if (max_nodes > 0 && ms.nodes.size() > max_nodes)
        v.push_back("too many nodes: " + std::to_string(ms.nodes.size()) + " > " + std::to_string(max_nodes));

    bool self_loop = false;
    for (std::size_t i = 0; i < ms.edges.size(); ++i) {
        const auto& e = ms.edges[i];
        const auto tag = "edge " + std::to_string(i) + " (" + std::to_string(e.from) + "->" + std::to_string(e.to) + ")";
        if (!detail::in_range(ms, e.from) || !detail::in_range(ms, e.to)) {
            v.push_back(tag + ": endpoint position out of range");
            continue;
        }
        if (e.from == e.to) self_loop = true;
        if (e.type < 0 || e.type >= schema.edge_type_count()) {
            v.push_back(tag + ": unknown edge type " + std::to_string(e.type));
            continue;
        }
        const auto& et = schema.edge_type(e.type);
        if (et.src != ms.nodes[static_cast<std::size_t>(e.from)] || et.dst != ms.nodes[static_cast<std::size_t>(e.to)])
            v.push_back(tag + ": edge type mismatch for '" + et.name + "'");
        for (std::size_t k = 0; k < i; ++k)
            if (ms.edges[k] == e) {
                v.push_back(tag + ": duplicate edge");
                break;
            }
    }
    if (self_loop || detail::has_cycle(ms)) v.emplace_back("cycle");
    if (detail::in_range(ms, ms.source) && detail::in_range(ms, ms.target)) {
        for (const auto& e : ms.edges) {
            if (e.to == ms.source) {
                v.emplace_back("source has incoming edge");
                break;
            }
        }
        for (const auto& e : ms.edges) {
            if (e.from == ms.target) {
                v.emplace_back("target has outgoing edge");
                break;
            }
        }
        const auto fwd = detail::reach(ms, ms.source, false);
        const auto bwd = detail::reach(ms, ms.target, true);
        for (int i = 0; i < n; ++i)
            if (!fwd[static_cast<std::size_t>(i)] || !bwd[static_cast<std::size_t>(i)])
                v.push_back("node off all source-target paths: position " + std::to_string(i));
    }
    return v;
}

inline bool is_valid(const MetaStructure& ms, const Schema& schema, std::size_t max_nodes = 0) {
    return validate(ms, schema, max_nodes).empty();
}

/// All simple source-to-target paths as edge-index sequences, in
/// lexicographic order of (position, edge type) sequences.
inline std::vector<std::vector<int>> enumerate_edge_paths(const MetaStructure& ms) {
    std::vector<std::vector<int>> result;
    if (!detail::in_range(ms, ms.source) || !detail::in_range(ms, ms.target)) return result;
    const auto out = detail::out_edges(ms);
    std::vector<int> stack_edges;
    std::vector<bool> on_path(ms.nodes.size(), false);
    auto dfs = [&](auto&& self, int v) -> void {
        if (v == ms.target) {
            result.push_back(stack_edges);
            return;
        }
        on_path[static_cast<std::size_t>(v)] = true;
        for (int ei : out[static_cast<std::size_t>(v)]) {
            const int w = ms.edges[static_cast<std::size_t>(ei)].to;
            if (on_path[static_cast<std::size_t>(w)]) continue;
            stack_edges.push_back(ei);
            self(self, w);
            stack_edges.pop_back();
        }
        on_path[static_cast<std::size_t>(v)] = false;
    };
    dfs(dfs, ms.source);
    return result;
}

/// Position sequence (source first) of an edge-index path.
inline std::vector<int> path_positions(const MetaStructure& ms, const std::vector<int>& edge_path) {
    std::vector<int> pos{ms.source};
    for (int ei : edge_path) pos.push_back(ms.edges[static_cast<std::size_t>(ei)].to);
    return pos;
}

inline MetaPath to_meta_path(const MetaStructure& ms, const std::vector<int>& edge_path) {
    MetaPath p;
    for (int pos : path_positions(ms, edge_path)) p.node_types.push_back(ms.nodes[static_cast<std::size_t>(pos)]);
    for (int ei : edge_path) p.edge_types.push_back(ms.edges[static_cast<std::size_t>(ei)].type);
    return p;
}

/// Decomposition into meta-paths, one per simple source-to-target path.
inline std::vector<MetaPath> enumerate_paths(const MetaStructure& ms) {
    std::vector<MetaPath> out;
    for (const auto& ep : enumerate_edge_paths(ms)) out.push_back(to_meta_path(ms, ep));
    return out;
}

inline json to_json(const MetaStructure& ms) {
    json edges = json::array();
    for (const auto& e : ms.edges) edges.push_back({e.from, e.to, e.type});
    return {{"nodes", ms.nodes}, {"edges", edges}, {"source", ms.source}, {"target", ms.target}};
}

inline MetaStructure metastructure_from_json(const json& j) {
    MetaStructure ms;
    try {
        ms.nodes = j.at("nodes").get<std::vector<int>>();
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 3) throw DataError("structure edge must be [from, to, type]");
            ms.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
        }
        ms.source = j.at("source").get<int>();
        ms.target = j.at("target").get<int>();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed structure JSON: ") + e.what());
    }
    return ms;
}

inline MetaStructure load_metastructure(const fs::path& path) {
    return metastructure_from_json(read_json_file(path));
}

inline json to_json(const MetaPath& p) {
    return {{"node_types", p.node_types}, {"edge_types", p.edge_types}};
}

/// True when `small` maps injectively into `big` with node types preserved
/// and every typed edge of `small` present in `big`. Endpoint roles are not
/// required to match.
inline bool contains_subgraph(const MetaStructure& big, const MetaStructure& small) {
    if (small.nodes.size() > big.nodes.size()) return false;
    std::vector<int> map(small.nodes.size(), -1);
    std::vector<bool> used(big.nodes.size(), false);
    auto has = [&](int f, int t, int type) {
        return std::find(big.edges.begin(), big.edges.end(), MetaEdge{f, t, type}) != big.edges.end();
    };
    auto consistent = [&](std::size_t v) {
        for (const auto& e : small.edges) {
            const auto a = map[static_cast<std::size_t>(e.from)], b = map[static_cast<std::size_t>(e.to)];
            if ((static_cast<std::size_t>(e.from) == v || static_cast<std::size_t>(e.to) == v) && a >= 0 && b >= 0 &&
                !has(a, b, e.type))
                return false;
        }
        return true;
    };
    auto assign = [&](auto&& self, std::size_t v) -> bool {
        if (v == small.nodes.size()) return true;
        for (std::size_t w = 0; w < big.nodes.size(); ++w) {
            if (used[w] || big.nodes[w] != small.nodes[v]) continue;
            map[v] = static_cast<int>(w);
            used[w] = true;
            if (consistent(v) && self(self, v + 1)) return true;
            used[w] = false;
            map[v] = -1;
        }
        return false;
    };
    return assign(assign, 0);
}

} // namespace restruct
