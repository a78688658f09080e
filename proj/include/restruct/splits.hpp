#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/hin_graph.hpp"
#include "restruct/io.hpp"
#include "restruct/random.hpp"

namespace restruct {

enum class SplitTag { train = 0, val = 1, test = 2 };

inline std::string to_string(SplitTag t) {
    switch (t) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::test: return "test";
    }
    return "?";
}

inline SplitTag split_tag_from_string(std::string_view s) {
    if (s == "train") return SplitTag::train;
    if (s == "val") return SplitTag::val;
    if (s == "test") return SplitTag::test;
    throw UsageError("unknown split '" + std::string(s) + "' (expected train, val or test)");
}

struct SplitRatio {
    int train = 3;
    int val = 1;
    int test = 1;
};

/// Sizes of the three parts for `total` items: val and test take the floor of
/// their share, train takes the remainder.
inline std::array<std::size_t, 3> partition_sizes(std::size_t total, SplitRatio ratio) {
    const auto sum = static_cast<std::size_t>(ratio.train + ratio.val + ratio.test);
    if (ratio.train < 0 || ratio.val < 0 || ratio.test < 0 || sum == 0) throw UsageError("invalid split ratio");
    const std::size_t val = total * static_cast<std::size_t>(ratio.val) / sum;
    const std::size_t test = total * static_cast<std::size_t>(ratio.test) / sum;
    return {total - val - test, val, test};
}

struct Rating {
    std::int64_t src = 0;
    std::int64_t dst = 0;
    std::int64_t rating = 0;
};

struct LabeledPair {
    std::int64_t src = 0;
    std::int64_t dst = 0;
    int label = 0;
};

/// label = 1 iff rating > threshold (a rating equal to the threshold is "no preference").
inline std::vector<LabeledPair> binarize_ratings(std::span<const Rating> ratings, std::int64_t threshold = 2) {
    std::vector<LabeledPair> out;
    out.reserve(ratings.size());
    for (const auto& r : ratings) out.push_back({r.src, r.dst, r.rating > threshold ? 1 : 0});
    return out;
}

inline std::vector<Rating> read_ratings(const fs::path& path) {
    std::vector<Rating> out;
    for_each_tsv_row(path, 3, [&](std::size_t lineno, std::span<const long long> f) {
        if (f[2] < 0) throw DataError(path.string() + ":" + std::to_string(lineno) + ": negative rating");
        out.push_back({f[0], f[1], f[2]});
    });
    return out;
}

struct RecommendationSplit {
    int target_edge_type = 0;
    std::array<std::vector<NodePair>, 3> positives; ///< indexed by SplitTag
    std::array<std::vector<NodePair>, 3> negatives;
    std::vector<NodePair> reserved; ///< label-1 pairs kept in the graph for construction

    const std::vector<NodePair>& positive(SplitTag t) const { return positives[static_cast<std::size_t>(t)]; }
    const std::vector<NodePair>& negative(SplitTag t) const { return negatives[static_cast<std::size_t>(t)]; }
};

/// Split labeled (source, target) pairs of the target relation.
///
/// Half of the label-1 pairs become positives, partitioned by `ratio`; the
/// other half is reserved and will be the only edges left in the target
/// relation (see construction_graph). Label-0 pairs supply negatives, one per
/// positive in each part; when they run out the remainder is drawn uniformly
/// from pairs that are neither labeled nor connected in the original graph.
inline RecommendationSplit make_recommendation_split(const HinGraph& graph, int target_edge_type,
                                                     std::span<const LabeledPair> labeled, SplitRatio ratio,
                                                     std::uint64_t seed, std::size_t min_per_split = 1) {
    const auto& et = graph.schema().edge_type(target_edge_type);
    const auto rows = graph.node_count(et.src), cols = graph.node_count(et.dst);

    std::set<NodePair> pos_set, neg_set;
    for (const auto& p : labeled) {
        if (p.src < 0 || p.src >= rows || p.dst < 0 || p.dst >= cols)
            throw DataError("labeled pair (" + std::to_string(p.src) + ", " + std::to_string(p.dst) +
                            ") out of range for relation '" + et.name + "'");
        (p.label == 1 ? pos_set : neg_set).insert({p.src, p.dst});
    }
    for (const auto& p : pos_set) neg_set.erase(p);
    if (pos_set.empty()) throw DataError("no positive (label-1) pairs to split");

    Rng rng(seed);
    std::vector<NodePair> pos(pos_set.begin(), pos_set.end());
    shuffle(pos, rng);
    const std::size_t n_split = pos.size() / 2;
    const auto sizes = partition_sizes(n_split, ratio);
    for (auto s : sizes)
        if (s < min_per_split)
            throw DataError("split too small: " + std::to_string(pos.size()) + " positive pairs give parts of " +
                            std::to_string(sizes[0]) + "/" + std::to_string(sizes[1]) + "/" +
                            std::to_string(sizes[2]));

    RecommendationSplit split;
    split.target_edge_type = target_edge_type;
    std::size_t k = 0;
    for (std::size_t part = 0; part < 3; ++part)
        for (std::size_t i = 0; i < sizes[part]; ++i) split.positives[part].push_back(pos[k++]);
    split.reserved.assign(pos.begin() + static_cast<std::ptrdiff_t>(k), pos.end());
    std::sort(split.reserved.begin(), split.reserved.end());

    std::vector<NodePair> neg(neg_set.begin(), neg_set.end());
    shuffle(neg, rng);
    if (neg.size() > n_split) neg.resize(n_split);
    if (neg.size() < n_split) {
        std::set<NodePair> excluded = pos_set;
        excluded.insert(neg_set.begin(), neg_set.end());
        for (const auto& t : graph.adjacency(target_edge_type).triplets()) excluded.insert({t.row, t.col});
        const auto needed = n_split - neg.size();
        const auto total = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols);
        if (total < excluded.size() + needed)
            throw DataError("not enough unconnected pairs to sample " + std::to_string(needed) + " negatives");
        while (neg.size() < n_split) {
            NodePair cand{static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(rows))),
                          static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(cols)))};
            if (excluded.insert(cand).second) neg.push_back(cand);
        }
    }
    k = 0;
    for (std::size_t part = 0; part < 3; ++part)
        for (std::size_t i = 0; i < sizes[part]; ++i) split.negatives[part].push_back(neg[k++]);
    return split;
}

/// The graph used for scoring: the target relation holds only the reserved pairs.
inline HinGraph construction_graph(const HinGraph& graph, const RecommendationSplit& split) {
    return graph.with_relation(split.target_edge_type, split.reserved);
}

struct NodeLabelSplit {
    int node_type = 0;
    std::map<std::int64_t, int> labels;
    std::array<std::vector<std::int64_t>, 3> index; ///< indexed by SplitTag
    int class_count = 0;

    const std::vector<std::int64_t>& nodes(SplitTag t) const { return index[static_cast<std::size_t>(t)]; }
};

inline std::vector<std::pair<std::int64_t, int>> read_labels(const fs::path& path) {
    std::vector<std::pair<std::int64_t, int>> out;
    for_each_tsv_row(path, 2, [&](std::size_t lineno, std::span<const long long> f) {
        if (f[1] < 0) throw DataError(path.string() + ":" + std::to_string(lineno) + ": negative class id");
        out.emplace_back(f[0], static_cast<int>(f[1]));
    });
    return out;
}

/// Random train/val/test split of labeled nodes (no stratification).
/// `class_count` of 0 means one more than the largest class id.
inline NodeLabelSplit make_node_label_split(int node_type, std::span<const std::pair<std::int64_t, int>> labels,
                                            SplitRatio ratio, std::uint64_t seed, int class_count = 0) {
    if (labels.empty()) throw DataError("empty label map");
    NodeLabelSplit split;
    split.node_type = node_type;
    for (auto [node, cls] : labels) {
        if (node < 0) throw DataError("negative node index in labels");
        auto [it, inserted] = split.labels.emplace(node, cls);
        if (!inserted && it->second != cls)
            throw DataError("node " + std::to_string(node) + " has conflicting labels");
    }
    int max_cls = 0;
    for (const auto& [node, cls] : split.labels) max_cls = std::max(max_cls, cls);
    split.class_count = class_count > 0 ? class_count : max_cls + 1;
    std::vector<int> per_class(static_cast<std::size_t>(split.class_count), 0);
    for (const auto& [node, cls] : split.labels) {
        if (cls < 0 || cls >= split.class_count)
            throw DataError("class id " + std::to_string(cls) + " outside [0, " + std::to_string(split.class_count) + ")");
        ++per_class[static_cast<std::size_t>(cls)];
    }
    for (std::size_t c = 0; c < per_class.size(); ++c)
        if (per_class[c] == 0) throw DataError("class " + std::to_string(c) + " has no labeled node");

    std::vector<std::int64_t> nodes;
    for (const auto& [node, cls] : split.labels) nodes.push_back(node);
    Rng rng(seed);
    shuffle(nodes, rng);
    const auto sizes = partition_sizes(nodes.size(), ratio);
    std::size_t k = 0;
    for (std::size_t part = 0; part < 3; ++part) {
        for (std::size_t i = 0; i < sizes[part]; ++i) split.index[part].push_back(nodes[k++]);
        std::sort(split.index[part].begin(), split.index[part].end());
    }
    return split;
}

} // namespace restruct
