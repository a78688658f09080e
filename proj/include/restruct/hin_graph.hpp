#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/io.hpp"
#include "restruct/schema.hpp"
#include "restruct/sparse_matrix.hpp"

namespace restruct {

using NodePair = std::pair<std::int64_t, std::int64_t>;

/// Typed heterogeneous graph: per-node-type counts and one binary adjacency
/// matrix per edge type (rows: source type nodes, cols: target type nodes).
/// Immutable after construction.
class HinGraph {
public:
    HinGraph() = default;
    HinGraph(Schema schema, std::vector<std::int64_t> node_counts, std::vector<SparseMatrix> adjacency)
        : schema_(std::move(schema)), node_counts_(std::move(node_counts)), adjacency_(std::move(adjacency)) {
        check();
    }

    /// Build from edge lists, one per edge type. Edge types whose list is empty
    /// but whose inverse is given are filled with the transposed inverse.
    static HinGraph from_edges(Schema schema, std::vector<std::int64_t> node_counts,
                               std::vector<std::vector<NodePair>> edges) {
        const auto m = static_cast<std::size_t>(schema.edge_type_count());
        if (edges.size() != m) throw DataError("need one edge list per edge type");
        if (node_counts.size() != static_cast<std::size_t>(schema.node_type_count()))
            throw DataError("need one node count per node type");
        std::vector<SparseMatrix> adj(m);
        std::vector<bool> given(m, false);
        for (std::size_t r = 0; r < m; ++r) {
            const auto& et = schema.edge_type(static_cast<int>(r));
            const auto rows = node_counts[static_cast<std::size_t>(et.src)];
            const auto cols = node_counts[static_cast<std::size_t>(et.dst)];
            for (auto [s, t] : edges[r])
                if (s < 0 || s >= rows || t < 0 || t >= cols)
                    throw DataError("relation '" + et.name + "': edge (" + std::to_string(s) + ", " +
                                    std::to_string(t) + ") out of range for " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
            given[r] = !edges[r].empty();
            adj[r] = SparseMatrix::from_pairs(rows, cols, edges[r]);
        }
        for (std::size_t r = 0; r < m; ++r) {
            const auto& et = schema.edge_type(static_cast<int>(r));
            if (!given[r] && et.inverse && given[static_cast<std::size_t>(*et.inverse)])
                adj[r] = adj[static_cast<std::size_t>(*et.inverse)].transpose();
        }
        return HinGraph(std::move(schema), std::move(node_counts), std::move(adj));
    }

    const Schema& schema() const { return schema_; }
    std::int64_t node_count(int node_type) const { return node_counts_.at(static_cast<std::size_t>(node_type)); }
    const std::vector<std::int64_t>& node_counts() const { return node_counts_; }
    const SparseMatrix& adjacency(int edge_type) const { return adjacency_.at(static_cast<std::size_t>(edge_type)); }

    /// Copy of this graph with the relation's edges replaced by `pairs`; a
    /// declared inverse relation receives the transposed edges, and a
    /// self-inverse relation is symmetrized.
    HinGraph with_relation(int edge_type, const std::vector<NodePair>& pairs) const {
        const auto& et = schema_.edge_type(edge_type);
        auto adj = adjacency_;
        auto all = pairs;
        if (et.inverse && *et.inverse == edge_type)
            for (auto [s, t] : pairs) all.emplace_back(t, s);
        adj[static_cast<std::size_t>(edge_type)] =
            SparseMatrix::from_pairs(node_count(et.src), node_count(et.dst), std::move(all));
        if (et.inverse && *et.inverse != edge_type)
            adj[static_cast<std::size_t>(*et.inverse)] = adj[static_cast<std::size_t>(edge_type)].transpose();
        return HinGraph(schema_, node_counts_, std::move(adj));
    }

private:
    void check() const {
        const auto m = static_cast<std::size_t>(schema_.edge_type_count());
        if (adjacency_.size() != m) throw DataError("need one adjacency matrix per edge type");
        if (node_counts_.size() != static_cast<std::size_t>(schema_.node_type_count()))
            throw DataError("need one node count per node type");
        for (auto c : node_counts_)
            if (c < 0) throw DataError("negative node count");
        for (std::size_t r = 0; r < m; ++r) {
            const auto& et = schema_.edge_type(static_cast<int>(r));
            const auto& a = adjacency_[r];
            if (a.rows() != node_count(et.src) || a.cols() != node_count(et.dst))
                throw DataError("relation '" + et.name + "' adjacency is " + a.shape() + ", expected " +
                                std::to_string(node_count(et.src)) + "x" + std::to_string(node_count(et.dst)));
            for (const auto& t : a.triplets())
                if (t.value != 1.0) throw DataError("relation '" + et.name + "' adjacency is not binary");
            if (et.inverse) {
                const auto& inv = adjacency_[static_cast<std::size_t>(*et.inverse)];
                if (!(inv == a.transpose()))
                    throw DataError(*et.inverse == et.id
                                        ? "self-inverse relation '" + et.name + "' is not symmetric"
                                        : "relations '" + et.name + "' and '" +
                                              schema_.edge_type(*et.inverse).name + "' are not transposes");
            }
        }
    }

    Schema schema_;
    std::vector<std::int64_t> node_counts_;
    std::vector<SparseMatrix> adjacency_;
};

/// Reads `node_counts.tsv` (`type_name<TAB>count`) from a dataset directory.
inline std::vector<std::int64_t> load_node_counts(const Schema& schema, const fs::path& dir) {
    const auto path = dir / "node_counts.tsv";
    std::ifstream in(path);
    if (!in) throw DataError("missing node count file: " + path.string());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(schema.node_type_count()), -1);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v = line;
        if (auto h = v.find('#'); h != std::string_view::npos) v = v.substr(0, h);
        v = trim(v);
        if (v.empty()) continue;
        const auto parts = split(v, '\t');
        std::int64_t n = 0;
        if (parts.size() != 2 || !parse_int(parts[1], n) || n < 0)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'type<TAB>count'");
        const auto id = schema.find_node_type(trim(parts[0]));
        if (!id) throw DataError(path.string() + ":" + std::to_string(lineno) + ": unknown node type '" +
                                 std::string(parts[0]) + "'");
        counts[static_cast<std::size_t>(*id)] = n;
    }
    for (const auto& t : schema.node_types())
        if (counts[static_cast<std::size_t>(t.id)] < 0)
            throw DataError(path.string() + ": no count for node type '" + t.name + "'");
    return counts;
}

inline std::vector<NodePair> read_edge_list(const fs::path& path) {
    std::vector<NodePair> out;
    for_each_tsv_row(path, 2, [&](std::size_t, std::span<const long long> f) { out.emplace_back(f[0], f[1]); });
    return out;
}

/// Loads a dataset directory: `node_counts.tsv` plus one `<edge name>.tsv`
/// per edge type. A relation file may be omitted when its declared inverse's
/// file is present.
inline HinGraph load_graph(const Schema& schema, const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
    auto counts = load_node_counts(schema, dir);
    const auto m = static_cast<std::size_t>(schema.edge_type_count());
    std::vector<std::vector<NodePair>> edges(m);
    std::vector<bool> present(m, false);
    for (const auto& et : schema.edge_types()) {
        const auto path = dir / (et.name + ".tsv");
        if (fs::exists(path)) {
            present[static_cast<std::size_t>(et.id)] = true;
            edges[static_cast<std::size_t>(et.id)] = read_edge_list(path);
        }
    }
    for (const auto& et : schema.edge_types()) {
        if (present[static_cast<std::size_t>(et.id)]) continue;
        if (et.inverse && present[static_cast<std::size_t>(*et.inverse)]) continue;
        throw DataError("missing relation file: " + (dir / (et.name + ".tsv")).string());
    }
    std::vector<SparseMatrix> adj(m);
    for (const auto& et : schema.edge_types()) {
        const auto r = static_cast<std::size_t>(et.id);
        const auto nr = counts[static_cast<std::size_t>(et.src)], nc = counts[static_cast<std::size_t>(et.dst)];
        for (auto [s, t] : edges[r])
            if (s < 0 || s >= nr || t < 0 || t >= nc)
                throw DataError("relation '" + et.name + "': node index out of range in edge (" +
                                std::to_string(s) + ", " + std::to_string(t) + "); shape is " +
                                std::to_string(nr) + "x" + std::to_string(nc));
        if (present[r]) adj[r] = SparseMatrix::from_pairs(nr, nc, edges[r]);
    }
    for (const auto& et : schema.edge_types()) {
        const auto r = static_cast<std::size_t>(et.id);
        if (!present[r]) adj[r] = adj[static_cast<std::size_t>(*et.inverse)].transpose();
    }
    return HinGraph(schema, std::move(counts), std::move(adj));
}

} // namespace restruct
