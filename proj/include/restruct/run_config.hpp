#pragma once

// Run configuration file and the objects it wires together.
//
// A config is one JSON object; relative paths resolve against the directory
// holding the file:
//
//   {
//     "schema": "schema.json",
//     "dataset": "data",
//     "task": {"recommendation": {"relation": "rates", "ratings": "data/ratings.tsv", "rating_threshold": 2}},
//     "split": {"seed": 0, "ratio": [3, 1, 1]},
//     "search": {"generations": 30, "population": 5, "seed": 0},
//     "backend": {"kind": "stub"},
//     "output": "out",
//     "prompts": "prompts"
//   }
//
// The classification form of "task" is
// {"classification": {"node_type": "B", "labels": "data/labels.tsv"}}.

#include <memory>
#include <optional>
#include <set>
#include <string>

#include "restruct/agents.hpp"
#include "restruct/error.hpp"
#include "restruct/evaluator.hpp"
#include "restruct/evolution.hpp"
#include "restruct/hin_graph.hpp"
#include "restruct/io.hpp"
#include "restruct/live_backend.hpp"
#include "restruct/prompts.hpp"
#include "restruct/schema.hpp"
#include "restruct/splits.hpp"
#include "restruct/stub_backend.hpp"

namespace restruct {

struct RecommendationTask {
    std::string relation = "rates";
    fs::path ratings;
    std::int64_t rating_threshold = 2;
};

struct ClassificationTask {
    std::string node_type;
    fs::path labels;
    int class_count = 0; ///< 0: inferred from the labels
};

struct BackendSettings {
    std::string kind = "stub"; ///< "stub" or "live"
    LiveBackendConfig live;
    double temperature = 0.0;
    int retries = 3;
    int initial_backoff_ms = 500;
};

struct RunConfig {
    fs::path schema;
    fs::path dataset;
    std::optional<RecommendationTask> recommendation;
    std::optional<ClassificationTask> classification;
    std::uint64_t split_seed = 0;
    SplitRatio split_ratio;
    SearchConfig search;
    BackendSettings backend;
    fs::path output = "out";
    std::optional<fs::path> prompts;

    static RunConfig from_json(const json& j, const fs::path& base_dir);
    static RunConfig load(const fs::path& path);

    /// Throws DataError naming the first referenced path that does not exist.
    void check_paths() const;
};

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
    if (!j.is_object()) throw UsageError(std::string(where) + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw UsageError("unknown key '" + k + "' in " + std::string(where));
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace detail

inline RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
    detail::reject_unknown_keys(j, {"schema", "dataset", "task", "split", "search", "backend", "output", "prompts"},
                                "config");
    RunConfig c;
    try {
        c.schema = detail::resolve(base_dir, j.at("schema").get<std::string>());
        c.dataset = detail::resolve(base_dir, j.at("dataset").get<std::string>());

        const auto& task = j.at("task");
        detail::reject_unknown_keys(task, {"recommendation", "classification"}, "task");
        if (task.size() != 1) throw UsageError("task must name exactly one of 'recommendation' or 'classification'");
        if (task.contains("recommendation")) {
            const auto& t = task["recommendation"];
            detail::reject_unknown_keys(t, {"relation", "ratings", "rating_threshold"}, "task.recommendation");
            RecommendationTask r;
            r.relation = t.value("relation", r.relation);
            r.ratings = t.contains("ratings") ? detail::resolve(base_dir, t["ratings"].get<std::string>())
                                              : c.dataset / "ratings.tsv";
            r.rating_threshold = t.value("rating_threshold", r.rating_threshold);
            c.recommendation = r;
        } else {
            const auto& t = task["classification"];
            detail::reject_unknown_keys(t, {"node_type", "labels", "class_count"}, "task.classification");
            ClassificationTask cl;
            cl.node_type = t.at("node_type").get<std::string>();
            cl.labels = t.contains("labels") ? detail::resolve(base_dir, t["labels"].get<std::string>())
                                             : c.dataset / "labels.tsv";
            cl.class_count = t.value("class_count", 0);
            c.classification = cl;
        }

        if (j.contains("split")) {
            const auto& s = j["split"];
            detail::reject_unknown_keys(s, {"seed", "ratio"}, "split");
            c.split_seed = s.value("seed", c.split_seed);
            if (s.contains("ratio")) {
                const auto r = s["ratio"].get<std::vector<int>>();
                if (r.size() != 3 || r[0] < 1 || r[1] < 1 || r[2] < 1)
                    throw UsageError("split.ratio must be three positive integers");
                c.split_ratio = {r[0], r[1], r[2]};
            }
        }

        if (j.contains("search")) c.search = SearchConfig::from_json(j["search"]);

        if (j.contains("backend")) {
            const auto& b = j["backend"];
            detail::reject_unknown_keys(b,
                                        {"kind", "endpoint", "model", "api_key_env", "temperature", "timeout_seconds",
                                         "retries", "initial_backoff_ms"},
                                        "backend");
            c.backend.kind = b.value("kind", c.backend.kind);
            if (c.backend.kind != "stub" && c.backend.kind != "live")
                throw UsageError("backend.kind must be 'stub' or 'live', got '" + c.backend.kind + "'");
            c.backend.live.endpoint = b.value("endpoint", c.backend.live.endpoint);
            c.backend.live.model = b.value("model", c.backend.live.model);
            c.backend.live.api_key_env = b.value("api_key_env", c.backend.live.api_key_env);
            c.backend.live.timeout_seconds = b.value("timeout_seconds", c.backend.live.timeout_seconds);
            c.backend.temperature = b.value("temperature", c.backend.temperature);
            c.backend.retries = b.value("retries", c.backend.retries);
            c.backend.initial_backoff_ms = b.value("initial_backoff_ms", c.backend.initial_backoff_ms);
            if (c.backend.retries < 0 || c.backend.initial_backoff_ms < 0)
                throw UsageError("backend retries and backoff must be >= 0");
        }

        if (j.contains("output")) c.output = detail::resolve(base_dir, j["output"].get<std::string>());
        else c.output = base_dir / "out";
        if (j.contains("prompts")) c.prompts = detail::resolve(base_dir, j["prompts"].get<std::string>());
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad config: ") + e.what());
    }
    return c;
}

inline RunConfig RunConfig::load(const fs::path& path) {
    if (!fs::exists(path)) throw UsageError("config file not found: " + path.string());
    json j;
    try {
        j = read_json_file(path);
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
    return from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

inline void RunConfig::check_paths() const {
    if (!fs::exists(schema)) throw DataError("schema file not found: " + schema.string());
    if (!fs::is_directory(dataset)) throw DataError("dataset directory not found: " + dataset.string());
    if (recommendation && !fs::exists(recommendation->ratings))
        throw DataError("ratings file not found: " + recommendation->ratings.string());
    if (classification && !fs::exists(classification->labels))
        throw DataError("labels file not found: " + classification->labels.string());
    if (prompts && !fs::is_directory(*prompts)) throw UsageError("prompt directory not found: " + prompts->string());
}

/// Schema, graph, split and evaluator for one config. Not movable: the
/// evaluator refers to the graph and split held here.
class Workspace {
public:
    explicit Workspace(RunConfig config) : config_(std::move(config)) {
        config_.check_paths();
        schema_ = load_schema(config_.schema);
        graph_ = std::make_unique<HinGraph>(load_graph(schema_, config_.dataset));
        if (config_.recommendation) {
            const auto& t = *config_.recommendation;
            const auto et = schema_.find_edge_type(t.relation);
            if (!et) throw DataError("task relation '" + t.relation + "' is not in the schema");
            const auto labeled = binarize_ratings(read_ratings(t.ratings), t.rating_threshold);
            rec_split_ = std::make_unique<RecommendationSplit>(
                make_recommendation_split(*graph_, *et, labeled, config_.split_ratio, config_.split_seed));
            construction_ = std::make_unique<HinGraph>(construction_graph(*graph_, *rec_split_));
            evaluator_ = std::make_unique<RecommendationEvaluator>(*construction_, *rec_split_);
        } else {
            const auto& t = *config_.classification;
            const auto nt = schema_.find_node_type(t.node_type);
            if (!nt) throw DataError("task node type '" + t.node_type + "' is not in the schema");
            const auto labels = read_labels(t.labels);
            for (const auto& [node, cls] : labels)
                if (node >= graph_->node_count(*nt))
                    throw DataError("labeled node " + std::to_string(node) + " is out of range for type '" +
                                    t.node_type + "'");
            cls_split_ = std::make_unique<NodeLabelSplit>(
                make_node_label_split(*nt, labels, config_.split_ratio, config_.split_seed, t.class_count));
            evaluator_ = std::make_unique<NodeClassificationEvaluator>(*graph_, *cls_split_);
        }
    }

    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    const RunConfig& config() const { return config_; }
    const Schema& schema() const { return schema_; }
    const HinGraph& graph() const { return *graph_; }
    const Evaluator& evaluator() const { return *evaluator_; }
    std::string task_name() const { return config_.recommendation ? "recommendation" : "node classification"; }

private:
    RunConfig config_;
    Schema schema_;
    std::unique_ptr<HinGraph> graph_;
    std::unique_ptr<HinGraph> construction_;
    std::unique_ptr<RecommendationSplit> rec_split_;
    std::unique_ptr<NodeLabelSplit> cls_split_;
    std::unique_ptr<Evaluator> evaluator_;
};

/// The stub backend is seeded with the search seed.
inline std::unique_ptr<ChatBackend> make_backend(const RunConfig& c) {
    if (c.backend.kind == "live") return std::make_unique<LiveBackend>(c.backend.live);
    return std::make_unique<StubBackend>(c.search.seed);
}

inline PromptSet load_prompts(const RunConfig& c) {
    return c.prompts ? PromptSet::from_directory(*c.prompts) : PromptSet{};
}

inline AgentConfig agent_config(const RunConfig& c, const Workspace& ws) {
    AgentConfig a;
    a.decoding.temperature = c.backend.temperature;
    a.retry.retries = c.backend.retries;
    a.retry.initial_backoff = std::chrono::milliseconds(c.backend.initial_backoff_ms);
    a.task = ws.task_name();
    a.metric = to_string(ws.evaluator().metric());
    return a;
}

} // namespace restruct
