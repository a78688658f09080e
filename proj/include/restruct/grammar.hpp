#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "restruct/canonical.hpp"
#include "restruct/error.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/schema.hpp"

namespace restruct {

inline constexpr std::string_view kClauseJoiner = " THAT ";
inline constexpr std::string_view kLogicJoiner = " AND ";

struct SubLogic {
    std::string sentence;
    MetaPath path;
};

namespace detail {

inline const std::string& verb_of(const Schema& schema, int edge_type) {
    const auto& et = schema.edge_type(edge_type);
    if (et.verb.empty()) throw DataError("edge type '" + et.name + "' has no verb phrase");
    return et.verb;
}

inline std::string noun_of(const Schema& schema, int node_type) {
    const auto& t = schema.node_type(node_type);
    return t.noun.empty() ? t.name : t.noun;
}

} // namespace detail

/// "<Noun> <verb> <Noun> THAT <verb> <Noun> THAT ..." for one meta-path.
inline SubLogic encode_path(const MetaPath& path, const Schema& schema) {
    if (!path_is_valid(path, schema)) throw DataError("meta-path is not valid under the schema");
    std::string s = detail::noun_of(schema, path.node_types[0]);
    for (std::size_t i = 0; i < path.edge_types.size(); ++i) {
        if (i > 0) s += kClauseJoiner;
        else s += ' ';
        s += detail::verb_of(schema, path.edge_types[i]);
        s += ' ';
        s += detail::noun_of(schema, path.node_types[i + 1]);
    }
    return {std::move(s), path};
}

/// Sub-logics of a structure in sentence order. When the structure has more
/// than one path, every node type occurring at several positions gets a
/// "#k" marker (k by canonical position) so that shared and distinct
/// positions stay distinguishable across sub-logics.
inline std::vector<SubLogic> sub_logics(const MetaStructure& ms, const Schema& schema) {
    const auto cf = canonical_form(ms);
    const auto edge_paths = enumerate_edge_paths(cf);
    if (edge_paths.size() == 1) return {encode_path(to_meta_path(cf, edge_paths[0]), schema)};

    std::vector<int> type_total(static_cast<std::size_t>(schema.node_type_count()), 0);
    std::vector<int> ordinal(cf.nodes.size(), 0);
    for (std::size_t v = 0; v < cf.nodes.size(); ++v) ordinal[v] = ++type_total[static_cast<std::size_t>(cf.nodes[v])];
    auto mention = [&](int pos) {
        const int t = cf.nodes[static_cast<std::size_t>(pos)];
        std::string s = detail::noun_of(schema, t);
        if (type_total[static_cast<std::size_t>(t)] > 1) s += "#" + std::to_string(ordinal[static_cast<std::size_t>(pos)]);
        return s;
    };

    struct Item {
        std::vector<int> type_seq;
        std::vector<int> positions;
        SubLogic logic;
    };
    std::vector<Item> items;
    for (const auto& ep : edge_paths) {
        Item it;
        it.positions = path_positions(cf, ep);
        it.logic.path = to_meta_path(cf, ep);
        const auto& p = it.logic.path;
        for (std::size_t i = 0; i < p.edge_types.size(); ++i) {
            it.type_seq.push_back(p.node_types[i]);
            it.type_seq.push_back(p.edge_types[i]);
        }
        it.type_seq.push_back(p.node_types.back());
        std::string s = mention(it.positions[0]);
        for (std::size_t i = 0; i < p.edge_types.size(); ++i) {
            s += i > 0 ? std::string(kClauseJoiner) : std::string(" ");
            s += detail::verb_of(schema, p.edge_types[i]) + " " + mention(it.positions[i + 1]);
        }
        it.logic.sentence = std::move(s);
        items.push_back(std::move(it));
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        return std::tie(a.type_seq, a.positions) < std::tie(b.type_seq, b.positions);
    });
    std::vector<SubLogic> out;
    for (auto& it : items) out.push_back(std::move(it.logic));
    return out;
}

/// Sub-logics joined with " AND ". Depends only on the canonical form, so
/// isomorphic structures encode identically.
inline std::string encode_metastructure(const MetaStructure& ms, const Schema& schema) {
    std::string out;
    for (const auto& sl : sub_logics(ms, schema)) {
        if (!out.empty()) out += kLogicJoiner;
        out += sl.sentence;
    }
    return out;
}

/// One "<Noun> -[verb]-> <Noun>" phrase per edge, sorted; a multiset view of
/// the structure's typed edges used in agent prompts.
inline std::vector<std::string> edge_phrases(const MetaStructure& ms, const Schema& schema) {
    std::vector<std::string> out;
    for (const auto& e : ms.edges) {
        const auto& et = schema.edge_type(e.type);
        out.push_back(detail::noun_of(schema, et.src) + " -[" + (et.verb.empty() ? et.name : et.verb) + "]-> " +
                      detail::noun_of(schema, et.dst));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::size_t count_token(std::string_view text, std::string_view token) {
    std::size_t n = 0;
    for (auto pos = text.find(token); pos != std::string_view::npos; pos = text.find(token, pos + token.size())) ++n;
    return n;
}

} // namespace restruct
