#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "restruct/canonical.hpp"
#include "restruct/io.hpp"
#include "restruct/log.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/random.hpp"
#include "restruct/schema.hpp"
#include "restruct/seeding.hpp"

namespace restruct {

struct ComponentLimits {
    std::size_t insertion_max_interior = 1; ///< interior nodes of an insertion component
    std::size_t grafting_max_nodes = 3;     ///< total nodes of a grafting component
    std::size_t max_structure_nodes = 10;   ///< size cap on produced structures
};

struct ComponentLibrary {
    std::vector<MetaPath> insertion;
    std::vector<MetaPath> grafting;
    ComponentLimits limits;
};

inline ComponentLibrary build_component_library(const Schema& schema, ComponentLimits limits = {}) {
    ComponentLibrary lib;
    lib.limits = limits;
    lib.insertion = schema_meta_paths(schema, std::nullopt, std::nullopt, 1, limits.insertion_max_interior + 1);
    if (limits.grafting_max_nodes >= 2)
        lib.grafting = schema_meta_paths(schema, std::nullopt, std::nullopt, 1, limits.grafting_max_nodes - 1);
    log_info("component library: insertion <= " + std::to_string(limits.insertion_max_interior) +
             " interior nodes (" + std::to_string(lib.insertion.size()) + " components), grafting <= " +
             std::to_string(limits.grafting_max_nodes) + " nodes (" + std::to_string(lib.grafting.size()) +
             " components), structures <= " + std::to_string(limits.max_structure_nodes) + " nodes");
    return lib;
}

enum class OpKind { insertion, grafting, deletion };

inline std::string to_string(OpKind k) {
    switch (k) {
    case OpKind::insertion: return "insertion";
    case OpKind::grafting: return "grafting";
    case OpKind::deletion: return "deletion";
    }
    return "?";
}

struct OperationDescriptor {
    OpKind op = OpKind::insertion;
    json detail;

    json to_json() const { return {{"op", to_string(op)}, {"detail", detail}}; }
};

struct Neighbor {
    MetaStructure structure;
    OperationDescriptor op;
    CanonicalKey key;
};

namespace detail {

inline bool has_edge(const MetaStructure& ms, const MetaEdge& e) {
    return std::find(ms.edges.begin(), ms.edges.end(), e) != ms.edges.end();
}

/// Append the component's interior as fresh positions and chain u -> ... -> w.
inline void splice_path(MetaStructure& ms, const MetaPath& comp, int u, int w) {
    int prev = u;
    for (std::size_t i = 0; i < comp.edge_types.size(); ++i) {
        int next;
        if (i + 1 == comp.edge_types.size()) {
            next = w;
        } else {
            ms.nodes.push_back(comp.node_types[i + 1]);
            next = static_cast<int>(ms.nodes.size()) - 1;
        }
        MetaEdge e{prev, next, comp.edge_types[i]};
        if (!has_edge(ms, e)) ms.edges.push_back(e);
        prev = next;
    }
}

inline json path_json(const MetaPath& p) { return to_json(p); }

/// Validated, key-deduplicated collector that drops the origin.
class NeighborSink {
public:
    NeighborSink(const MetaStructure& origin, const Schema& schema, std::size_t max_nodes)
        : schema_(schema), max_nodes_(max_nodes) {
        seen_.insert(canonical_key(origin));
    }
    void offer(MetaStructure ms, OperationDescriptor op) {
        if (max_nodes_ > 0 && ms.nodes.size() > max_nodes_) return;
        if (!is_valid(ms, schema_)) return;
        auto key = canonical_key(ms);
        if (!seen_.insert(key).second) return;
        out_.push_back({std::move(ms), std::move(op), std::move(key)});
    }
    std::vector<Neighbor> take() { return std::move(out_); }

private:
    const Schema& schema_;
    std::size_t max_nodes_;
    std::set<CanonicalKey> seen_;
    std::vector<Neighbor> out_;
};

} // namespace detail

/// Replace one edge (u, v) by a component whose end types match u and v.
inline std::vector<Neighbor> neighbors_insertion(const MetaStructure& ms, const ComponentLibrary& lib,
                                                 const Schema& schema) {
    detail::NeighborSink sink(ms, schema, lib.limits.max_structure_nodes);
    for (std::size_t i = 0; i < ms.edges.size(); ++i) {
        const auto edge = ms.edges[i];
        const int tu = ms.nodes[static_cast<std::size_t>(edge.from)];
        const int tv = ms.nodes[static_cast<std::size_t>(edge.to)];
        for (const auto& comp : lib.insertion) {
            if (comp.node_types.front() != tu || comp.node_types.back() != tv) continue;
            if (comp.edge_types.size() == 1 && comp.edge_types[0] == edge.type) continue;
            MetaStructure n = ms;
            n.edges.erase(n.edges.begin() + static_cast<std::ptrdiff_t>(i));
            detail::splice_path(n, comp, edge.from, edge.to);
            sink.offer(std::move(n), {OpKind::insertion,
                                      {{"edge", {edge.from, edge.to, edge.type}}, {"component", detail::path_json(comp)}}});
        }
    }
    return sink.take();
}

/// Merge a component's first and last node into two existing positions,
/// adding its interior as a new branch.
inline std::vector<Neighbor> neighbors_grafting(const MetaStructure& ms, const ComponentLibrary& lib,
                                                const Schema& schema) {
    detail::NeighborSink sink(ms, schema, lib.limits.max_structure_nodes);
    const int n = static_cast<int>(ms.nodes.size());
    for (const auto& comp : lib.grafting) {
        for (int u = 0; u < n; ++u) {
            if (ms.nodes[static_cast<std::size_t>(u)] != comp.node_types.front() || u == ms.target) continue;
            for (int w = 0; w < n; ++w) {
                if (w == u || w == ms.source || ms.nodes[static_cast<std::size_t>(w)] != comp.node_types.back()) continue;
                MetaStructure next = ms;
                detail::splice_path(next, comp, u, w);
                sink.offer(std::move(next),
                           {OpKind::grafting, {{"from", u}, {"to", w}, {"component", detail::path_json(comp)}}});
            }
        }
    }
    return sink.take();
}

/// Remove one interior position and reconnect each predecessor/successor
/// pair through a schema edge type; one neighbor per choice of types.
inline std::vector<Neighbor> neighbors_deletion(const MetaStructure& ms, const Schema& schema,
                                                std::size_t max_nodes = 0) {
    detail::NeighborSink sink(ms, schema, max_nodes);
    const int n = static_cast<int>(ms.nodes.size());
    for (int v = 0; v < n; ++v) {
        if (v == ms.source || v == ms.target) continue;
        std::set<int> preds, succs;
        for (const auto& e : ms.edges) {
            if (e.to == v) preds.insert(e.from);
            if (e.from == v) succs.insert(e.to);
        }
        auto renum = [v](int p) { return p > v ? p - 1 : p; };
        MetaStructure base;
        for (int p = 0; p < n; ++p)
            if (p != v) base.nodes.push_back(ms.nodes[static_cast<std::size_t>(p)]);
        for (const auto& e : ms.edges)
            if (e.from != v && e.to != v) base.edges.push_back({renum(e.from), renum(e.to), e.type});
        base.source = renum(ms.source);
        base.target = renum(ms.target);

        struct Slot {
            int p, s;
            std::vector<int> options;
        };
        std::vector<Slot> slots;
        for (int p : preds)
            for (int s : succs) {
                auto opts = schema.edge_types_between(ms.nodes[static_cast<std::size_t>(p)], ms.nodes[static_cast<std::size_t>(s)]);
                if (!opts.empty()) slots.push_back({p, s, std::move(opts)});
            }
        // odometer over the option choices
        std::vector<std::size_t> choice(slots.size(), 0);
        for (;;) {
            MetaStructure next = base;
            json reconnect = json::array();
            for (std::size_t k = 0; k < slots.size(); ++k) {
                const int t = slots[k].options[choice[k]];
                MetaEdge e{renum(slots[k].p), renum(slots[k].s), t};
                if (!detail::has_edge(next, e)) next.edges.push_back(e);
                reconnect.push_back({slots[k].p, slots[k].s, t});
            }
            sink.offer(std::move(next), {OpKind::deletion, {{"node", v}, {"reconnect", reconnect}}});
            std::size_t k = 0;
            while (k < slots.size() && ++choice[k] == slots[k].options.size()) choice[k++] = 0;
            if (k == slots.size()) break;
        }
    }
    return sink.take();
}

struct CandidateSet {
    MetaStructure origin;
    std::vector<Neighbor> candidates;
    bool sampled = false;
    std::size_t total = 0; ///< neighbor count before sampling
};

/// Union of the three operations, deduplicated by canonical key. When more
/// than `cap` neighbors exist, a uniform sample of `cap` is kept (in union
/// order). An empty candidate list means the structure has no neighbor.
inline CandidateSet one_step_neighbors(const MetaStructure& ms, const ComponentLibrary& lib, const Schema& schema,
                                       Rng& rng, std::size_t cap = 20) {
    CandidateSet cs;
    cs.origin = ms;
    std::set<CanonicalKey> seen{canonical_key(ms)};
    auto take = [&](std::vector<Neighbor> v) {
        for (auto& nb : v)
            if (seen.insert(nb.key).second) cs.candidates.push_back(std::move(nb));
    };
    take(neighbors_insertion(ms, lib, schema));
    take(neighbors_grafting(ms, lib, schema));
    take(neighbors_deletion(ms, schema, lib.limits.max_structure_nodes));
    cs.total = cs.candidates.size();
    if (cs.candidates.size() > cap) {
        const auto idx = sample_indices(rng, cs.candidates.size(), cap);
        std::vector<Neighbor> kept;
        kept.reserve(cap);
        for (auto i : idx) kept.push_back(std::move(cs.candidates[i]));
        cs.candidates = std::move(kept);
        cs.sampled = true;
    }
    return cs;
}

} // namespace restruct
