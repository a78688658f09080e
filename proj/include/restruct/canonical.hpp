#pragma once

// Canonical labeling of meta-structures.
//
// Positions are colored by (role, node type) and refined by the multiset of
// (direction, edge type, neighbor color) until stable. Up to
// kExactCanonicalLimit positions, remaining ties are resolved by an
// individualization search that keeps the lexicographically smallest
// relabeled encoding, which makes the key exact. Larger structures use the
// stable coloring alone.

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "restruct/log.hpp"
#include "restruct/metastructure.hpp"

namespace restruct {

inline constexpr std::size_t kExactCanonicalLimit = 10;

struct CanonicalKey {
    std::string value;
    auto operator<=>(const CanonicalKey&) const = default;
};

namespace detail {

using Coloring = std::vector<int>;

struct RefineSignature {
    int color;
    std::vector<std::tuple<int, int, int>> links; // (direction, edge type, neighbor color)
    auto operator<=>(const RefineSignature&) const = default;
};

inline int rank_signatures(const std::vector<RefineSignature>& sigs, Coloring& colors) {
    std::vector<RefineSignature> uniq = sigs;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t v = 0; v < sigs.size(); ++v)
        colors[v] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), sigs[v]) - uniq.begin());
    return static_cast<int>(uniq.size());
}

inline std::vector<RefineSignature> signatures(const MetaStructure& ms, const Coloring& colors) {
    std::vector<RefineSignature> sigs(ms.nodes.size());
    for (std::size_t v = 0; v < sigs.size(); ++v) sigs[v].color = colors[v];
    for (const auto& e : ms.edges) {
        sigs[static_cast<std::size_t>(e.from)].links.emplace_back(0, e.type, colors[static_cast<std::size_t>(e.to)]);
        sigs[static_cast<std::size_t>(e.to)].links.emplace_back(1, e.type, colors[static_cast<std::size_t>(e.from)]);
    }
    for (auto& s : sigs) std::sort(s.links.begin(), s.links.end());
    return sigs;
}

/// Refine to the coarsest stable coloring finer than `colors`; color ids are
/// dense ranks whose order depends only on isomorphism-invariant data.
inline int refine(const MetaStructure& ms, Coloring& colors) {
    std::vector<RefineSignature> init(colors.size());
    for (std::size_t v = 0; v < colors.size(); ++v) init[v].color = colors[v];
    int classes = rank_signatures(init, colors);
    for (;;) {
        const int next = rank_signatures(signatures(ms, colors), colors);
        if (next == classes) return classes;
        classes = next;
    }
}

inline Coloring initial_coloring(const MetaStructure& ms) {
    Coloring c(ms.nodes.size());
    for (std::size_t v = 0; v < c.size(); ++v) {
        const int role = static_cast<int>(v) == ms.source ? 0 : static_cast<int>(v) == ms.target ? 2 : 1;
        c[v] = role * 1'000'003 + ms.nodes[v];
    }
    return c;
}

/// Relabeled encoding: position v moves to perm[v].
inline std::vector<int> encode(const MetaStructure& ms, const Coloring& perm) {
    const auto n = ms.nodes.size();
    std::vector<int> enc;
    enc.reserve(3 + n + 3 * ms.edges.size());
    enc.push_back(static_cast<int>(n));
    std::vector<int> types(n);
    for (std::size_t v = 0; v < n; ++v) types[static_cast<std::size_t>(perm[v])] = ms.nodes[v];
    enc.insert(enc.end(), types.begin(), types.end());
    enc.push_back(perm[static_cast<std::size_t>(ms.source)]);
    enc.push_back(perm[static_cast<std::size_t>(ms.target)]);
    std::vector<std::tuple<int, int, int>> edges;
    for (const auto& e : ms.edges)
        edges.emplace_back(perm[static_cast<std::size_t>(e.from)], perm[static_cast<std::size_t>(e.to)], e.type);
    std::sort(edges.begin(), edges.end());
    for (auto [a, b, t] : edges) {
        enc.push_back(a);
        enc.push_back(b);
        enc.push_back(t);
    }
    return enc;
}

struct CanonicalSearch {
    const MetaStructure& ms;
    std::vector<int> best_encoding;
    Coloring best_perm;

    void run(Coloring colors) {
        const int classes = refine(ms, colors);
        const auto n = colors.size();
        if (static_cast<std::size_t>(classes) == n) {
            auto enc = encode(ms, colors);
            if (best_perm.empty() || enc < best_encoding) {
                best_encoding = std::move(enc);
                best_perm = colors;
            }
            return;
        }
        // first non-singleton cell, in color order
        std::vector<int> cell_size(static_cast<std::size_t>(classes), 0);
        for (int c : colors) ++cell_size[static_cast<std::size_t>(c)];
        int target_cell = 0;
        while (cell_size[static_cast<std::size_t>(target_cell)] < 2) ++target_cell;
        for (std::size_t v = 0; v < n; ++v) {
            if (colors[v] != target_cell) continue;
            Coloring next(n);
            for (std::size_t u = 0; u < n; ++u) next[u] = 2 * colors[u] + (u == v ? 0 : 1);
            run(std::move(next));
        }
    }
};

} // namespace detail

/// The structure relabeled into canonical position order with edges sorted.
inline MetaStructure canonical_form(const MetaStructure& ms) {
    const auto n = ms.nodes.size();
    detail::Coloring perm;
    if (n <= kExactCanonicalLimit) {
        detail::CanonicalSearch search{ms, {}, {}};
        search.run(detail::initial_coloring(ms));
        perm = std::move(search.best_perm);
    } else {
        detail::Coloring colors = detail::initial_coloring(ms);
        detail::refine(ms, colors);
        // ties keep their input order; only the stable coloring is invariant here
        std::vector<int> order(n);
        for (std::size_t v = 0; v < n; ++v) order[v] = static_cast<int>(v);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return colors[static_cast<std::size_t>(a)] < colors[static_cast<std::size_t>(b)];
        });
        perm.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) perm[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    }
    MetaStructure out;
    out.nodes.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) out.nodes[static_cast<std::size_t>(perm[v])] = ms.nodes[v];
    for (const auto& e : ms.edges)
        out.edges.push_back({perm[static_cast<std::size_t>(e.from)], perm[static_cast<std::size_t>(e.to)], e.type});
    std::sort(out.edges.begin(), out.edges.end());
    out.source = perm[static_cast<std::size_t>(ms.source)];
    out.target = perm[static_cast<std::size_t>(ms.target)];
    return out;
}

/// Isomorphism-invariant identifier. Exact (equal iff isomorphic) up to
/// kExactCanonicalLimit positions; above that, a refinement digest prefixed "wl:".
inline CanonicalKey canonical_key(const MetaStructure& ms) {
    std::string key;
    if (ms.nodes.size() <= kExactCanonicalLimit) {
        const auto cf = canonical_form(ms);
        key = "n";
        for (std::size_t i = 0; i < cf.nodes.size(); ++i) key += (i ? "," : ":") + std::to_string(cf.nodes[i]);
        key += "|s:" + std::to_string(cf.source) + "|t:" + std::to_string(cf.target) + "|e";
        for (std::size_t i = 0; i < cf.edges.size(); ++i) {
            const auto& e = cf.edges[i];
            key += (i ? "," : ":") + std::to_string(e.from) + ">" + std::to_string(e.to) + "/" + std::to_string(e.type);
        }
        return {key};
    }
    log_warning("structure with " + std::to_string(ms.nodes.size()) +
                " positions keyed by refinement only; distinct structures may collide");
    detail::Coloring colors = detail::initial_coloring(ms);
    auto initial = colors;
    std::sort(initial.begin(), initial.end());
    detail::refine(ms, colors);
    auto sigs = detail::signatures(ms, colors);
    std::sort(sigs.begin(), sigs.end());
    key = "wl:";
    for (int c : initial) key += std::to_string(c) + ",";
    for (const auto& s : sigs) {
        key += "[" + std::to_string(s.color);
        for (auto [d, t, c] : s.links)
            key += ";" + std::to_string(d) + "/" + std::to_string(t) + "/" + std::to_string(c);
        key += "]";
    }
    return {key};
}

} // namespace restruct
