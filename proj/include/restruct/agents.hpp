#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "restruct/agent_protocol.hpp"
#include "restruct/chat_backend.hpp"
#include "restruct/error.hpp"
#include "restruct/log.hpp"
#include "restruct/prompts.hpp"

namespace restruct {

struct AgentConfig {
    DecodingParams decoding;
    RetryPolicy retry;
    int format_retries = 3;       ///< re-asks after an answer that cannot be parsed
    bool batched_predictor = true; ///< one prompt for all candidates, or one per candidate
    std::string task = "recommendation";
    std::string metric = "AUC";
};

struct SelectorDecision {
    std::size_t index = 0;
    std::string rationale;
    std::string response; ///< verbatim answer; empty when the fallback rule decided
    bool fallback = false;
};

struct ExplainerReport {
    std::vector<StructureView> structures; ///< the explained structure first, then its neighbors
    std::vector<double> metrics;           ///< validation metric per structure
    std::string structure_response;        ///< step 1, verbatim
    std::string attribution_response;      ///< step 2, verbatim
    protocol::Sections analysis;
    protocol::Sections attribution;
    std::vector<std::size_t> unknown_references; ///< STRUCTURE numbers the answer cites but the prompt lacks

    json to_json() const {
        json s = json::array();
        for (std::size_t i = 0; i < structures.size(); ++i)
            s.push_back({{"index", i},
                         {"sentence", structures[i].sentence},
                         {"key", structures[i].key},
                         {"metric", metrics[i]},
                         {"role", i == 0 ? "explained" : "neighbor"}});
        json a = json::object();
        for (const auto& sec : attribution.sections) a[sec.header] = sec.body;
        json per = json::array();
        for (const auto& sec : analysis.sections) per.push_back({{"structure", sec.index}, {"analysis", sec.body}});
        return {{"structures", s},
                {"step1_response", structure_response},
                {"step2_response", attribution_response},
                {"analysis", per},
                {"attribution", a}};
    }
};

/// The predictor, selector and explainer over one backend. Holds no mutable
/// state besides the optional transcript.
class Agents {
public:
    Agents(const ChatBackend& backend, PromptSet prompts = {}, AgentConfig config = {}, TranscriptLog* transcript = nullptr)
        : backend_(backend), prompts_(std::move(prompts)), config_(std::move(config)), transcript_(transcript) {}

    const AgentConfig& config() const { return config_; }
    const ChatBackend& backend() const { return backend_; }

    /// One (p, c) per candidate. Entries still missing after the format
    /// retries default to (mean of the sampled records, 0) and are flagged.
    std::vector<PredictorOutput> predict_candidates(const std::vector<StructureView>& candidates,
                                                    const std::vector<PoolRecord>& sample) const {
        if (candidates.empty()) throw UsageError("predict_candidates needs at least one candidate");
        std::vector<std::optional<PredictorOutput>> got(candidates.size());
        if (config_.batched_predictor) {
            fill_predictions(candidates, sample, got);
        } else {
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                std::vector<std::optional<PredictorOutput>> one(1);
                fill_predictions({candidates[i]}, sample, one);
                got[i] = one[0];
            }
        }
        const double mean = sample.empty() ? 0.5
                                           : std::accumulate(sample.begin(), sample.end(), 0.0,
                                                             [](double s, const PoolRecord& r) { return s + r.value; }) /
                                                 static_cast<double>(sample.size());
        std::vector<PredictorOutput> out;
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i]) {
                out.push_back(*got[i]);
            } else {
                log_warning("predictor gave no usable estimate for candidate " + std::to_string(i) + ", using the pool mean");
                out.push_back({mean, 0.0, true});
            }
        }
        return out;
    }

    /// Index of the chosen candidate. When no valid index comes back after
    /// the format retries, the deterministic rule decides and the decision is flagged.
    SelectorDecision select_candidate(const std::vector<SelectorItem>& items) const {
        if (items.empty()) throw UsageError("select_candidate needs at least one candidate");
        const auto user = prompts_.get(PromptKind::selector)
                              .render(values({{"candidates", protocol::selector_candidates_block(items)},
                                              {"response_format", std::string(protocol::kSelectorFormat)}}));
        for (int attempt = 0; attempt <= config_.format_retries; ++attempt) {
            auto text = ask(user, "selector");
            if (auto c = protocol::parse_choice(text, items.size())) return {c->index, c->rationale, std::move(text), false};
            log_warning("selector answer has no valid CHOICE line");
        }
        const auto i = protocol::rule_based_choice(items);
        return {i, "fallback rule: highest predicted performance, then fewest edges, then smallest key", "", true};
    }

    /// Two chained prompts: sub-structure analysis of the structure and its
    /// neighbors, then attribution given their metrics.
    ExplainerReport explain(const StructureView& target, double target_metric, const std::vector<StructureView>& neighbors,
                            const std::vector<double>& neighbor_metrics) const {
        if (neighbors.empty()) throw UsageError("explain needs at least one neighbor");
        if (neighbors.size() != neighbor_metrics.size()) throw UsageError("explain needs one metric per neighbor");
        ExplainerReport r;
        r.structures.push_back(target);
        r.structures.insert(r.structures.end(), neighbors.begin(), neighbors.end());
        r.metrics.push_back(target_metric);
        r.metrics.insert(r.metrics.end(), neighbor_metrics.begin(), neighbor_metrics.end());
        const auto n = std::to_string(neighbors.size());

        const auto step1 = prompts_.get(PromptKind::explainer_structure)
                               .render(values({{"structures", protocol::structures_block(r.structures)},
                                               {"neighbor_count", n},
                                               {"response_format", std::string(protocol::kStructureFormat)}}));
        r.structure_response = ask(step1, "explainer_structure");
        r.analysis = protocol::parse_structure_analysis(r.structure_response);

        const auto step2 = prompts_.get(PromptKind::explainer_attribution)
                               .render(values({{"analysis", r.structure_response},
                                               {"metrics", protocol::metrics_block(r.structures, r.metrics, config_.metric)},
                                               {"neighbor_count", n},
                                               {"response_format", std::string(protocol::kAttributionFormat)}}));
        r.attribution_response = ask(step2, "explainer_attribution");
        r.attribution = protocol::parse_attribution(r.attribution_response);

        for (const auto& sec : r.analysis.sections)
            if (sec.index >= r.structures.size()) r.unknown_references.push_back(sec.index);
        if (!r.unknown_references.empty()) log_warning("explainer answer refers to structures that were not in the prompt");
        return r;
    }

private:
    std::map<std::string, std::string> values(std::map<std::string, std::string> v) const {
        v.emplace("task", config_.task);
        v.emplace("metric", config_.metric);
        return v;
    }

    std::string ask(const std::string& user, std::string_view agent) const {
        const auto system = prompts_.get(PromptKind::system).render({});
        return complete_with_retry(backend_, system, user, config_.decoding, config_.retry, transcript_, agent);
    }

    void fill_predictions(const std::vector<StructureView>& candidates, const std::vector<PoolRecord>& sample,
                          std::vector<std::optional<PredictorOutput>>& got) const {
        const auto user = prompts_.get(PromptKind::predictor)
                              .render(values({{"records", protocol::records_block(sample)},
                                              {"candidates", protocol::predictor_candidates_block(candidates)},
                                              {"response_format", std::string(protocol::kPredictorFormat)}}));
        for (int attempt = 0; attempt <= config_.format_retries; ++attempt) {
            const auto parsed = protocol::parse_predictions(ask(user, "predictor"), candidates.size());
            bool complete = true;
            for (std::size_t i = 0; i < parsed.size(); ++i) {
                if (!got[i] && parsed[i]) got[i] = parsed[i];
                complete = complete && got[i].has_value();
            }
            if (complete) return;
        }
    }

    const ChatBackend& backend_;
    PromptSet prompts_;
    AgentConfig config_;
    TranscriptLog* transcript_;
};

} // namespace restruct
