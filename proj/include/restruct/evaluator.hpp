#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/hin_graph.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/metrics.hpp"
#include "restruct/splits.hpp"

namespace restruct {

inline constexpr std::size_t kDefaultNnzBudget = 50'000'000;

/// Product of the adjacency matrices along `path`, left to right. Entry (s, t)
/// counts path instances. With `rows`, only those source rows are computed,
/// in the given order.
inline SparseMatrix path_commuting_matrix(const HinGraph& graph, const MetaPath& path,
                                          std::optional<std::span<const std::int64_t>> rows = std::nullopt,
                                          std::size_t nnz_budget = kDefaultNnzBudget) {
    if (!path_is_valid(path, graph.schema())) throw DataError("meta-path is not valid under the schema");
    SparseMatrix m = rows ? graph.adjacency(path.edge_types[0]).select_rows(*rows)
                          : graph.adjacency(path.edge_types[0]);
    for (std::size_t i = 1; i < path.edge_types.size(); ++i)
        m = m.multiply(graph.adjacency(path.edge_types[i]), nnz_budget);
    return m;
}

/// Elementwise product of the row-normalized commuting matrices of every
/// source-to-target path; nonzero exactly where all paths connect the pair.
inline SparseMatrix structure_score_matrix(const HinGraph& graph, const MetaStructure& ms,
                                           std::optional<std::span<const std::int64_t>> rows = std::nullopt,
                                           std::size_t nnz_budget = kDefaultNnzBudget) {
    const auto problems = validate(ms, graph.schema());
    if (!problems.empty()) throw DataError("invalid structure: " + problems.front());
    std::optional<SparseMatrix> score;
    for (const auto& p : enumerate_paths(ms)) {
        auto m = path_commuting_matrix(graph, p, rows, nnz_budget).row_normalized();
        score = score ? score->hadamard(m) : std::move(m);
    }
    return *score;
}

enum class MetricKind { auc, macro_f1 };

inline std::string to_string(MetricKind k) { return k == MetricKind::auc ? "AUC" : "MacroF1"; }

struct EvalResult {
    MetricKind metric = MetricKind::auc;
    double value = 0.0;
    SplitTag split = SplitTag::val;
    double wall_time = 0.0; ///< seconds; not part of any persisted output
};

/// Fitness function over a fixed graph and split. Implementations must be
/// pure and safe to call concurrently.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual EvalResult evaluate(const MetaStructure& ms, SplitTag split) const = 0;
    virtual MetricKind metric() const = 0;
    virtual int source_type() const = 0;
    virtual int target_type() const = 0;
};

namespace detail {

inline std::vector<std::int64_t> unique_sorted(std::vector<std::int64_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

class RecommendationEvaluator final : public Evaluator {
public:
    /// `graph` should be the construction graph of `split`.
    RecommendationEvaluator(const HinGraph& graph, const RecommendationSplit& split,
                            std::size_t nnz_budget = kDefaultNnzBudget)
        : graph_(graph), split_(split), nnz_budget_(nnz_budget) {
        const auto& et = graph.schema().edge_type(split.target_edge_type);
        src_ = et.src;
        dst_ = et.dst;
    }

    EvalResult evaluate(const MetaStructure& ms, SplitTag tag) const override {
        const auto t0 = std::chrono::steady_clock::now();
        if (ms.source_type() != src_ || ms.target_type() != dst_)
            throw DataError("structure endpoints (" + graph_.schema().node_type(ms.source_type()).name + ", " +
                            graph_.schema().node_type(ms.target_type()).name + ") do not match the target relation");
        const auto& pos = split_.positive(tag);
        const auto& neg = split_.negative(tag);
        std::vector<std::int64_t> sources;
        for (const auto& p : pos) sources.push_back(p.first);
        for (const auto& p : neg) sources.push_back(p.first);
        sources = detail::unique_sorted(std::move(sources));
        const auto scores = structure_score_matrix(graph_, ms, std::span<const std::int64_t>(sources), nnz_budget_);
        auto lookup = [&](const NodePair& p) {
            const auto row = std::lower_bound(sources.begin(), sources.end(), p.first) - sources.begin();
            return scores.at(row, p.second);
        };
        std::vector<double> ps, ns;
        for (const auto& p : pos) ps.push_back(lookup(p));
        for (const auto& p : neg) ns.push_back(lookup(p));
        return {MetricKind::auc, auc(ps, ns), tag, detail::seconds_since(t0)};
    }

    MetricKind metric() const override { return MetricKind::auc; }
    int source_type() const override { return src_; }
    int target_type() const override { return dst_; }

private:
    const HinGraph& graph_;
    const RecommendationSplit& split_;
    std::size_t nnz_budget_;
    int src_ = 0;
    int dst_ = 0;
};

class NodeClassificationEvaluator final : public Evaluator {
public:
    NodeClassificationEvaluator(const HinGraph& graph, const NodeLabelSplit& split,
                                std::size_t nnz_budget = kDefaultNnzBudget)
        : graph_(graph), split_(split), nnz_budget_(nnz_budget) {
        std::vector<int> counts(static_cast<std::size_t>(split.class_count), 0);
        for (auto v : split.nodes(SplitTag::train)) ++counts[static_cast<std::size_t>(split.labels.at(v))];
        majority_ = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        for (auto v : split.nodes(SplitTag::train)) train_class_[v] = split.labels.at(v);
    }

    EvalResult evaluate(const MetaStructure& ms, SplitTag tag) const override {
        const auto t0 = std::chrono::steady_clock::now();
        if (ms.source_type() != split_.node_type || ms.target_type() != split_.node_type)
            throw DataError("structure endpoints must both be node type '" +
                            graph_.schema().node_type(split_.node_type).name + "'");
        const auto& nodes = split_.nodes(tag);
        const auto scores = structure_score_matrix(graph_, ms, std::span<const std::int64_t>(nodes), nnz_budget_);
        std::vector<int> pred, gold;
        std::vector<double> votes(static_cast<std::size_t>(split_.class_count));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            std::fill(votes.begin(), votes.end(), 0.0);
            bool any = false;
            const auto cs = scores.row_cols(static_cast<std::int64_t>(i));
            const auto vs = scores.row_values(static_cast<std::int64_t>(i));
            for (std::size_t k = 0; k < cs.size(); ++k) {
                const auto it = train_class_.find(cs[k]);
                if (it == train_class_.end()) continue;
                votes[static_cast<std::size_t>(it->second)] += vs[k];
                any = true;
            }
            // max_element returns the first maximum, so ties go to the smallest class id
            pred.push_back(any ? static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin())
                               : majority_);
            gold.push_back(split_.labels.at(nodes[i]));
        }
        return {MetricKind::macro_f1, macro_f1(pred, gold, split_.class_count), tag, detail::seconds_since(t0)};
    }

    MetricKind metric() const override { return MetricKind::macro_f1; }
    int source_type() const override { return split_.node_type; }
    int target_type() const override { return split_.node_type; }
    int majority_class() const { return majority_; }

private:
    const HinGraph& graph_;
    const NodeLabelSplit& split_;
    std::size_t nnz_budget_;
    int majority_ = 0;
    std::map<std::int64_t, int> train_class_;
};

} // namespace restruct
