#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/io.hpp"

namespace restruct {

struct NodeType {
    int id = 0;
    std::string name;
    std::string noun; ///< singular noun phrase used by the grammar
};

struct EdgeType {
    int id = 0;
    std::string name;
    int src = 0;
    int dst = 0;
    std::string verb; ///< verb phrase; may be empty, encoding then fails
    std::optional<int> inverse;
};

/// Network schema: node types, edge types, and their verb phrases.
/// Ids are dense and equal to the vector position.
class Schema {
public:
    Schema() = default;
    Schema(std::vector<NodeType> node_types, std::vector<EdgeType> edge_types)
        : node_types_(std::move(node_types)), edge_types_(std::move(edge_types)) {
        check();
    }

    const std::vector<NodeType>& node_types() const { return node_types_; }
    const std::vector<EdgeType>& edge_types() const { return edge_types_; }
    const NodeType& node_type(int id) const { return node_types_.at(static_cast<std::size_t>(id)); }
    const EdgeType& edge_type(int id) const { return edge_types_.at(static_cast<std::size_t>(id)); }
    int node_type_count() const { return static_cast<int>(node_types_.size()); }
    int edge_type_count() const { return static_cast<int>(edge_types_.size()); }

    std::optional<int> find_node_type(std::string_view name) const {
        for (const auto& t : node_types_)
            if (t.name == name) return t.id;
        return std::nullopt;
    }
    std::optional<int> find_edge_type(std::string_view name) const {
        for (const auto& e : edge_types_)
            if (e.name == name) return e.id;
        return std::nullopt;
    }

    /// Edge types going from node type `src` to node type `dst`, ascending by id.
    std::vector<int> edge_types_between(int src, int dst) const {
        std::vector<int> out;
        for (const auto& e : edge_types_)
            if (e.src == src && e.dst == dst) out.push_back(e.id);
        return out;
    }

    json to_json() const {
        json nodes = json::array();
        for (const auto& t : node_types_) nodes.push_back({{"id", t.id}, {"name", t.name}, {"noun", t.noun}});
        json edges = json::array();
        for (const auto& e : edge_types_) {
            json j = {{"id", e.id}, {"name", e.name}, {"src", e.src}, {"dst", e.dst}, {"verb", e.verb}};
            j["inverse"] = e.inverse ? json(*e.inverse) : json(nullptr);
            edges.push_back(std::move(j));
        }
        return {{"node_types", nodes}, {"edge_types", edges}};
    }

    static Schema from_json(const json& j);

private:
    void check() const;

    std::vector<NodeType> node_types_;
    std::vector<EdgeType> edge_types_;
};

inline void Schema::check() const {
    if (node_types_.empty()) throw DataError("schema has no node types");
    for (std::size_t i = 0; i < node_types_.size(); ++i) {
        if (node_types_[i].id != static_cast<int>(i))
            throw DataError("node-type ids must be dense 0..n-1 (got id " + std::to_string(node_types_[i].id) + ")");
        for (std::size_t k = 0; k < i; ++k)
            if (node_types_[k].name == node_types_[i].name)
                throw DataError("duplicate node-type name '" + node_types_[i].name + "'");
    }
    const int n = node_type_count();
    const int m = edge_type_count();
    for (std::size_t i = 0; i < edge_types_.size(); ++i) {
        const auto& e = edge_types_[i];
        if (e.id != static_cast<int>(i))
            throw DataError("edge-type ids must be dense 0..n-1 (got id " + std::to_string(e.id) + ")");
        if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
            throw DataError("edge type '" + e.name + "' references an unknown node type");
        for (std::size_t k = 0; k < i; ++k)
            if (edge_types_[k].name == e.name) throw DataError("duplicate edge-type name '" + e.name + "'");
    }
    for (const auto& e : edge_types_) {
        if (!e.inverse) continue;
        const int inv = *e.inverse;
        if (inv < 0 || inv >= m) throw DataError("edge type '" + e.name + "' declares an unknown inverse");
        const auto& r = edge_types_[static_cast<std::size_t>(inv)];
        if (!r.inverse || *r.inverse != e.id)
            throw DataError("inverse of '" + e.name + "' is '" + r.name + "' but not vice versa");
        if (r.src != e.dst || r.dst != e.src)
            throw DataError("inverse pair '" + e.name + "'/'" + r.name + "' does not swap endpoints");
    }
}

inline Schema Schema::from_json(const json& j) {
    if (!j.is_object() || !j.contains("node_types") || !j["node_types"].is_array())
        throw DataError("schema: missing 'node_types' array");
    std::vector<NodeType> nodes;
    for (const auto& jn : j["node_types"]) {
        NodeType t;
        try {
            t.id = jn.at("id").get<int>();
            t.name = jn.at("name").get<std::string>();
            t.noun = jn.value("noun", t.name);
        } catch (const json::exception& e) {
            throw DataError(std::string("schema: bad node type entry: ") + e.what());
        }
        nodes.push_back(std::move(t));
    }
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    auto node_ref = [&](const json& v, const std::string& edge) -> int {
        if (v.is_number_integer()) {
            const int id = v.get<int>();
            if (id < 0 || id >= static_cast<int>(nodes.size()))
                throw DataError("edge type '" + edge + "' references unknown node type " + std::to_string(id));
            return id;
        }
        if (v.is_string()) {
            for (const auto& t : nodes)
                if (t.name == v.get<std::string>()) return t.id;
            throw DataError("edge type '" + edge + "' references unknown node type \"" + v.get<std::string>() + "\"");
        }
        throw DataError("edge type '" + edge + "': node-type reference must be an id or a name");
    };

    std::vector<EdgeType> edges;
    std::vector<json> inverse_refs;
    if (j.contains("edge_types")) {
        if (!j["edge_types"].is_array()) throw DataError("schema: 'edge_types' must be an array");
        for (const auto& je : j["edge_types"]) {
            EdgeType e;
            try {
                e.id = je.at("id").get<int>();
                e.name = je.at("name").get<std::string>();
                e.verb = je.value("verb", std::string{});
            } catch (const json::exception& ex) {
                throw DataError(std::string("schema: bad edge type entry: ") + ex.what());
            }
            if (!je.contains("src") || !je.contains("dst"))
                throw DataError("edge type '" + e.name + "' lacks src/dst");
            e.src = node_ref(je["src"], e.name);
            e.dst = node_ref(je["dst"], e.name);
            inverse_refs.push_back(je.value("inverse", json(nullptr)));
            edges.push_back(std::move(e));
        }
    }
    // resolve inverses after all names are known
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const json& ref = inverse_refs[i];
        if (ref.is_null()) continue;
        if (ref.is_number_integer()) {
            edges[i].inverse = ref.get<int>();
        } else if (ref.is_string()) {
            const auto name = ref.get<std::string>();
            auto it = std::find_if(edges.begin(), edges.end(), [&](const auto& e) { return e.name == name; });
            if (it == edges.end()) throw DataError("edge type '" + edges[i].name + "' declares unknown inverse \"" + name + "\"");
            edges[i].inverse = it->id;
        } else {
            throw DataError("edge type '" + edges[i].name + "': inverse must be an id, a name, or null");
        }
    }
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return Schema(std::move(nodes), std::move(edges));
}

inline Schema load_schema(const fs::path& path) {
    return Schema::from_json(read_json_file(path));
}

} // namespace restruct
