#include <gtest/gtest.h>

#include <deque>
#include <mutex>

#include "restruct/agents.hpp"
#include "restruct/stub_backend.hpp"
#include "restruct/synthetic.hpp"
#include "test_support.hpp"

using namespace restruct;

namespace {

// Answers from a queue (repeating the last one) and records every prompt.
class ScriptedBackend : public ChatBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> answers, int failures = 0)
        : answers_(answers.begin(), answers.end()), failures_(failures) {}

    std::string complete(const std::string&, const std::string& user, const DecodingParams&) const override {
        std::lock_guard lock(mutex_);
        prompts.push_back(user);
        if (failures_ > 0) {
            --failures_;
            throw BackendError("connection reset");
        }
        if (answers_.size() > 1) {
            auto a = answers_.front();
            answers_.pop_front();
            return a;
        }
        return answers_.empty() ? std::string() : answers_.front();
    }
    std::string identity() const override { return "scripted"; }

    mutable std::vector<std::string> prompts;

private:
    mutable std::mutex mutex_;
    mutable std::deque<std::string> answers_;
    mutable int failures_;
};

StructureView view(std::string sentence, std::vector<std::string> edges, std::string key = "k",
                   std::size_t nodes = 0) {
    StructureView v;
    v.sentence = std::move(sentence);
    v.sub_logics = {v.sentence};
    v.edge_count = edges.size();
    v.node_count = nodes ? nodes : edges.size() + 1;
    v.edges = std::move(edges);
    v.key = std::move(key);
    return v;
}

AgentConfig quick_config() {
    AgentConfig c;
    c.retry.sleep = {};
    return c;
}

class AgentsTest : public ::testing::Test {
protected:
    void SetUp() override {
        prev_ = set_log_sink([this](std::string_view level, std::string_view m) {
            if (level == "warning") warnings.emplace_back(m);
        });
    }
    void TearDown() override { set_log_sink(prev_); }

    std::vector<std::string> warnings;
    StubBackend stub{0};

private:
    LogSink prev_;
};

using PromptsTest = AgentsTest;

} // namespace

TEST_F(PromptsTest, BuiltInTemplatesAreValid) {
    PromptSet set;
    for (auto k : kPromptKinds) EXPECT_FALSE(set.get(k).text().empty()) << to_string(k);
}

TEST_F(PromptsTest, ShippedFilesMatchBuiltIns) {
    const fs::path dir = fs::path(RESTRUCT_SOURCE_DIR) / "prompts";
    for (auto k : kPromptKinds)
        EXPECT_EQ(read_text_file(dir / (to_string(k) + ".txt")), default_prompt_text(k)) << to_string(k);
}

TEST_F(PromptsTest, MissingRequiredPlaceholderIsRejected) {
    EXPECT_THROW(PromptTemplate(PromptKind::predictor, "{{records}} {{response_format}}"), UsageError);
}

TEST_F(PromptsTest, UnknownPlaceholderIsRejected) {
    EXPECT_THROW(PromptTemplate(PromptKind::selector, "{{candidates}} {{response_format}} {{mood}}"), UsageError);
}

TEST_F(PromptsTest, DirectoryOverridesOnlyPresentFiles) {
    testsupport::TempDir dir("agents");
    dir.write("selector.txt", "Pick one.\n{{candidates}}\n{{response_format}}\n");
    const auto set = PromptSet::from_directory(dir.path());
    EXPECT_EQ(set.get(PromptKind::selector).text(), "Pick one.\n{{candidates}}\n{{response_format}}\n");
    EXPECT_EQ(set.get(PromptKind::predictor).text(), default_prompt_text(PromptKind::predictor));
    EXPECT_THROW(PromptSet::from_directory(dir.path() / "absent"), UsageError);
}

TEST_F(PromptsTest, RenderSubstitutesAndRequiresValues) {
    const PromptTemplate t(PromptKind::selector, "A {{candidates}} B {{response_format}}");
    EXPECT_EQ(t.render({{"candidates", "x"}, {"response_format", "y"}}), "A x B y");
    EXPECT_THROW(t.render({{"candidates", "x"}}), UsageError);
}

TEST_F(AgentsTest, StubPredictorIdenticalRecord) {
    Agents agents(stub);
    const auto cand = view("U rates B", {"User -[rates]-> Business"});
    const auto out = agents.predict_candidates({cand}, {{cand, 0.7}});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].p, 0.7);
    EXPECT_EQ(out[0].c, 1.0);
    EXPECT_FALSE(out[0].fallback);
}

TEST_F(AgentsTest, StubPredictorEmptyPoolGivesPrior) {
    Agents agents(stub);
    const auto out = agents.predict_candidates({view("U rates B", {"User -[rates]-> Business"})}, {});
    EXPECT_EQ(out[0].p, 0.5);
    EXPECT_EQ(out[0].c, 0.0);
}

TEST_F(AgentsTest, StubPredictorHalfJaccard) {
    Agents agents(stub);
    const auto cand = view("c", {"a", "b"});
    const std::vector<PoolRecord> pool = {{view("r1", {"a", "b", "c", "d"}), 0.6}, {view("r2", {"e"}), 0.9}};
    const auto out = agents.predict_candidates({cand}, pool);
    EXPECT_EQ(out[0].p, 0.6);
    EXPECT_EQ(out[0].c, 0.5);
}

TEST_F(AgentsTest, StubPredictorCountsEdgeMultiplicity) {
    Agents agents(stub);
    const auto out = agents.predict_candidates({view("c", {"a", "a"})}, {{view("r", {"a"}), 0.3}});
    EXPECT_EQ(out[0].c, 0.5);
}

TEST_F(AgentsTest, StubPredictorTiesGoToHigherValue) {
    Agents agents(stub);
    const auto out = agents.predict_candidates({view("c", {"a"})}, {{view("r1", {"a", "b"}), 0.4}, {view("r2", {"a", "c"}), 0.8}});
    EXPECT_EQ(out[0].p, 0.8);
}

TEST_F(AgentsTest, StubSelectorPrefersHigherPrediction) {
    Agents agents(stub);
    const auto d = agents.select_candidate({{view("a", {"x"}, "k1"), 0.8, 0.9}, {view("b", {"y"}, "k0"), 0.6, 0.99}});
    EXPECT_EQ(d.index, 0u);
    EXPECT_FALSE(d.fallback);
    EXPECT_FALSE(d.rationale.empty());
}

TEST_F(AgentsTest, StubSelectorBreaksTiesByEdgeCount) {
    Agents agents(stub);
    const auto d = agents.select_candidate(
        {{view("a", {"1", "2", "3", "4", "5"}, "k0"), 0.7, 0.5}, {view("b", {"1", "2", "3"}, "k9"), 0.7, 0.5}});
    EXPECT_EQ(d.index, 1u);
}

TEST_F(AgentsTest, StubSelectorBreaksTiesByKey) {
    Agents agents(stub);
    const auto d = agents.select_candidate({{view("a", {"1"}, "n:1|b"), 0.7, 0.5}, {view("b", {"2"}, "n:1|a"), 0.7, 0.5}});
    EXPECT_EQ(d.index, 1u);
}

TEST_F(AgentsTest, StubIsDeterministicAndInRange) {
    Agents agents(stub);
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SelectorItem> items;
        const auto k = 1 + uniform_index(rng, 20);
        for (std::size_t i = 0; i < k; ++i)
            items.push_back({view("s" + std::to_string(i), {"e"}, "k" + std::to_string(i)),
                             static_cast<double>(uniform_index(rng, 4)) / 4.0, uniform_unit(rng)});
        const auto a = agents.select_candidate(items);
        const auto b = agents.select_candidate(items);
        EXPECT_LT(a.index, k);
        EXPECT_EQ(a.index, b.index);
        EXPECT_EQ(a.response, b.response);
    }
}

TEST_F(AgentsTest, StubRejectsUnknownPrompts) {
    EXPECT_THROW(stub.complete("", "hello", {}), BackendError);
}

TEST_F(AgentsTest, PredictorPromptNumbersEveryCandidate) {
    ScriptedBackend backend({"CANDIDATE 0: p=0.1, c=0.1\nCANDIDATE 1: p=0.2, c=0.2\n"});
    Agents agents(backend, {}, quick_config());
    agents.predict_candidates({view("same words", {"a"}), view("same words", {"b"})}, {});
    ASSERT_EQ(backend.prompts.size(), 1u);
    EXPECT_NE(backend.prompts[0].find("CANDIDATE 0: same words"), std::string::npos);
    EXPECT_NE(backend.prompts[0].find("CANDIDATE 1: same words"), std::string::npos);
}

TEST_F(AgentsTest, MalformedPredictionsAreRetriedThenDefaulted) {
    ScriptedBackend backend({"CANDIDATE 0: p=0.9, c=0.4\nCANDIDATE 1: p=high, c=?"});
    Agents agents(backend, {}, quick_config());
    const std::vector<PoolRecord> pool = {{view("r1", {"a"}), 0.2}, {view("r2", {"b"}), 0.6}};
    const auto out = agents.predict_candidates({view("x", {"a"}), view("y", {"b"})}, pool);
    EXPECT_EQ(backend.prompts.size(), 4u); // first attempt plus three format retries
    EXPECT_EQ(out[0].p, 0.9);
    EXPECT_FALSE(out[0].fallback);
    EXPECT_DOUBLE_EQ(out[1].p, 0.4);
    EXPECT_EQ(out[1].c, 0.0);
    EXPECT_TRUE(out[1].fallback);
}

TEST_F(AgentsTest, LateAnswerFillsMissingEntries) {
    ScriptedBackend backend({"CANDIDATE 0: p=0.9, c=0.4", "CANDIDATE 1: p=0.3, c=0.2"});
    Agents agents(backend, {}, quick_config());
    const auto out = agents.predict_candidates({view("x", {"a"}), view("y", {"b"})}, {});
    EXPECT_EQ(backend.prompts.size(), 2u);
    EXPECT_EQ(out[1].p, 0.3);
    EXPECT_FALSE(out[1].fallback);
}

TEST_F(AgentsTest, OutOfRangeValuesAreClampedWithWarning) {
    ScriptedBackend backend({"```\nCANDIDATE 0: p=1.3, c=-0.2\n```"});
    Agents agents(backend, {}, quick_config());
    const auto out = agents.predict_candidates({view("x", {"a"})}, {});
    EXPECT_EQ(out[0].p, 1.0);
    EXPECT_EQ(out[0].c, 0.0);
    EXPECT_EQ(warnings.size(), 2u);
}

TEST_F(AgentsTest, PerCandidateModeAsksOncePerCandidate) {
    ScriptedBackend backend({"CANDIDATE 0: p=0.25, c=1"});
    auto cfg = quick_config();
    cfg.batched_predictor = false;
    Agents agents(backend, {}, cfg);
    const auto out = agents.predict_candidates({view("x", {"a"}), view("y", {"b"}), view("z", {"c"})}, {});
    EXPECT_EQ(backend.prompts.size(), 3u);
    for (const auto& o : out) EXPECT_EQ(o.p, 0.25);
}

TEST_F(AgentsTest, UnparseableChoiceFallsBackToRule) {
    ScriptedBackend backend({"I would go with the second one.", "CHOICE: 7"});
    Agents agents(backend, {}, quick_config());
    const auto d = agents.select_candidate({{view("a", {"1"}, "k0"), 0.2, 0.5}, {view("b", {"1"}, "k1"), 0.9, 0.5}});
    EXPECT_TRUE(d.fallback);
    EXPECT_EQ(d.index, 1u);
    EXPECT_EQ(backend.prompts.size(), 4u);
}

TEST_F(AgentsTest, ChoiceParsesRationale) {
    ScriptedBackend backend({"CHOICE: 1\nREASON: simpler and credible."});
    Agents agents(backend, {}, quick_config());
    const auto d = agents.select_candidate({{view("a", {"1"}), 0.2, 0.5}, {view("b", {"1"}), 0.9, 0.5}});
    EXPECT_EQ(d.index, 1u);
    EXPECT_EQ(d.rationale, "simpler and credible.");
    EXPECT_FALSE(d.fallback);
}

TEST_F(AgentsTest, SelectorPromptShowsAllFactors) {
    ScriptedBackend backend({"CHOICE: 0"});
    Agents agents(backend, {}, quick_config());
    agents.select_candidate({{view("User rates Business", {"User -[rates]-> Business"}, "key0", 2), 0.75, 0.5}});
    const auto& p = backend.prompts[0];
    EXPECT_NE(p.find("User rates Business"), std::string::npos);
    EXPECT_NE(p.find("size: 2 nodes, 1 edges"), std::string::npos);
    EXPECT_NE(p.find("predicted: p=0.75, c=0.5"), std::string::npos);
    EXPECT_NE(p.find("confidence"), std::string::npos);
}

TEST_F(AgentsTest, TransportFailuresBackOffExponentially) {
    ScriptedBackend backend({"CHOICE: 0"}, 2);
    std::vector<long> sleeps;
    auto cfg = quick_config();
    cfg.retry.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(static_cast<long>(d.count())); };
    TranscriptLog transcript;
    Agents agents(backend, {}, cfg, &transcript);
    const auto d = agents.select_candidate({{view("a", {"1"}), 0.2, 0.5}});
    EXPECT_EQ(d.index, 0u);
    EXPECT_EQ(sleeps, (std::vector<long>{500, 1000}));
    EXPECT_EQ(transcript.size(), 3u);
}

TEST_F(AgentsTest, TransportFailureAfterRetriesPropagates) {
    ScriptedBackend backend({"CHOICE: 0"}, 10);
    Agents agents(backend, {}, quick_config());
    EXPECT_THROW(agents.select_candidate({{view("a", {"1"}), 0.2, 0.5}}), BackendError);
    EXPECT_EQ(backend.prompts.size(), 4u);
}

TEST_F(AgentsTest, TranscriptIsJsonLinesWithoutTimestamps) {
    testsupport::TempDir dir("agents");
    {
        TranscriptLog transcript(dir.path() / "t.jsonl");
        Agents agents(stub, {}, quick_config(), &transcript);
        agents.select_candidate({{view("a", {"1"}), 0.2, 0.5}});
        agents.predict_candidates({view("a", {"1"})}, {});
    }
    const auto text = read_text_file(dir.path() / "t.jsonl");
    const auto lines = split(trim(text), '\n');
    ASSERT_EQ(lines.size(), 2u);
    const auto first = json::parse(lines[0]);
    EXPECT_EQ(first["agent"], "selector");
    EXPECT_EQ(first["model"], "stub-0");
    EXPECT_EQ(first["seq"], 0);
    EXPECT_TRUE(first.contains("system"));
    EXPECT_TRUE(first.contains("response"));
    EXPECT_FALSE(first.contains("time"));
}

TEST_F(AgentsTest, StubExplainerLabelsBestNeighborEdges) {
    const auto s = planted_schema();
    Agents agents(stub);
    const auto target = planted_structure();
    MetaStructure category_only = from_meta_path({{0, 1, 2, 1}, {0, 2, 3}});
    MetaStructure with_friend = target;
    with_friend.nodes.push_back(0);
    with_friend.edges.push_back({0, 5, 6});
    with_friend.edges.push_back({5, 4, 0});
    ASSERT_TRUE(is_valid(with_friend, s));
    const auto r = agents.explain(describe(target, s), 0.99, {describe(category_only, s), describe(with_friend, s)},
                                  {0.7, 0.98});
    ASSERT_EQ(r.structures.size(), 3u);
    ASSERT_EQ(r.analysis.sections.size(), 3u);
    EXPECT_EQ(count_token(r.analysis.sections[0].body, "- "), 2u);
    EXPECT_NE(r.analysis.sections[0].body.find("User rates Business#1 THAT belongs to Category"), std::string::npos);
    ASSERT_EQ(r.attribution.sections.size(), 3u);
    // both neighbors score below the target: the city path that category_only
    // drops is credited, the friend edge that with_friend adds is blamed
    EXPECT_EQ(r.attribution.sections[0].header, "BENEFICIAL");
    EXPECT_EQ(r.attribution.sections[0].body,
              "Business -[is located in]-> City (STRUCTURE 1); City -[hosts]-> Business (STRUCTURE 1)");
    EXPECT_EQ(r.attribution.sections[1].header, "DETRIMENTAL");
    EXPECT_NE(r.attribution.sections[1].body.find("User -[is friend of]-> User (STRUCTURE 2)"), std::string::npos);
    EXPECT_EQ(r.attribution.sections[1].body.find("STRUCTURE 1"), std::string::npos);
    EXPECT_NE(r.attribution.sections[2].body.find("0 of 2 neighbors score above"), std::string::npos);
    EXPECT_TRUE(r.unknown_references.empty());
}

TEST_F(AgentsTest, StubExplainerCreditsEdgesOfBetterNeighbor) {
    const auto s = planted_schema();
    Agents agents(stub);
    const auto category_only = from_meta_path({{0, 1, 2, 1}, {0, 2, 3}});
    const auto r = agents.explain(describe(category_only, s), 0.7,
                                  {describe(planted_structure(), s), describe(category_only, s)}, {0.99, 0.7});
    ASSERT_EQ(r.attribution.sections.size(), 3u);
    EXPECT_NE(r.attribution.sections[0].body.find("City -[hosts]-> Business (STRUCTURE 1)"), std::string::npos);
    EXPECT_EQ(r.attribution.sections[1].body, "none");
}

TEST_F(AgentsTest, StubExplainerWithTiedNeighborsAttributesNothing) {
    const auto s = planted_schema();
    Agents agents(stub);
    const auto r = agents.explain(describe(planted_structure(), s), 0.9,
                                  {describe(from_meta_path({{0, 1}, {0}}), s)}, {0.9});
    EXPECT_EQ(r.attribution.sections[0].body, "none");
    EXPECT_EQ(r.attribution.sections[1].body, "none");
    EXPECT_NE(r.attribution.sections[2].body.find("no measurable difference"), std::string::npos);
}

TEST_F(AgentsTest, SingleNeighborReportCoversTwoStructures) {
    const auto s = planted_schema();
    Agents agents(stub);
    const auto r = agents.explain(describe(planted_structure(), s), 0.99,
                                  {describe(from_meta_path({{0, 1}, {0}}), s)}, {0.5});
    EXPECT_EQ(r.structures.size(), 2u);
    EXPECT_EQ(r.analysis.sections.size(), 2u);
    EXPECT_EQ(r.to_json()["structures"].size(), 2u);
}

TEST_F(AgentsTest, ExplainerRequiresNeighbors) {
    Agents agents(stub);
    EXPECT_THROW(agents.explain(view("a", {"1"}), 0.5, {}, {}), UsageError);
}

TEST_F(AgentsTest, RecordedTranscriptRoundTrips) {
    const auto text = read_text_file(fs::path(RESTRUCT_SOURCE_DIR) / "tests" / "fixtures" / "explainer_transcript.jsonl");
    const auto lines = split(trim(text), '\n');
    ASSERT_EQ(lines.size(), 2u);
    const auto step1 = json::parse(lines[0])["response"].get<std::string>();
    const auto step2 = json::parse(lines[1])["response"].get<std::string>();

    const auto analysis = protocol::parse_structure_analysis(step1);
    EXPECT_EQ(analysis.reassemble(), step1);
    ASSERT_EQ(analysis.sections.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(analysis.sections[i].index, i);
    EXPECT_NE(analysis.sections[0].body.find("Together these say"), std::string::npos);

    const auto attribution = protocol::parse_attribution(step2);
    EXPECT_EQ(attribution.reassemble(), step2);
    ASSERT_EQ(attribution.sections.size(), 3u);
    EXPECT_EQ(attribution.sections[0].header, "BENEFICIAL");
    EXPECT_EQ(attribution.sections[1].header, "DETRIMENTAL");
    EXPECT_NE(attribution.sections[1].body.find("The friendship branch"), std::string::npos);
    EXPECT_EQ(attribution.sections[2].header, "SUMMARY");
}

TEST_F(AgentsTest, RecordedTranscriptReplaysThroughExplain) {
    const auto text = read_text_file(fs::path(RESTRUCT_SOURCE_DIR) / "tests" / "fixtures" / "explainer_transcript.jsonl");
    const auto lines = split(trim(text), '\n');
    ScriptedBackend backend({json::parse(lines[0])["response"].get<std::string>(), json::parse(lines[1])["response"].get<std::string>()});
    Agents agents(backend, {}, quick_config());
    const auto r = agents.explain(view("a", {"1"}), 0.9, {view("b", {"2"}), view("c", {"3"})}, {0.6, 0.85});
    EXPECT_EQ(r.structure_response, json::parse(lines[0])["response"]);
    EXPECT_EQ(r.attribution_response, json::parse(lines[1])["response"]);
    EXPECT_TRUE(r.unknown_references.empty());
    EXPECT_NE(backend.prompts[1].find(r.structure_response), std::string::npos);
    EXPECT_NE(backend.prompts[1].find("STRUCTURE 2: AUC=0.85"), std::string::npos);
}

TEST_F(AgentsTest, AnswersCitingAbsentStructuresAreFlagged) {
    ScriptedBackend backend({"STRUCTURE 0:\n- x\nSTRUCTURE 5:\n- y\n", "SUMMARY: none"});
    Agents agents(backend, {}, quick_config());
    const auto r = agents.explain(view("a", {"1"}), 0.9, {view("b", {"2"})}, {0.6});
    EXPECT_EQ(r.unknown_references, (std::vector<std::size_t>{5}));
}

TEST_F(AgentsTest, ParaphrasedTemplatesStillDriveTheStub) {
    PromptSet prompts;
    prompts.set(PromptTemplate(PromptKind::predictor,
                               "History:\n{{records}}\n\nNew options:\n{{candidates}}\n\n{{response_format}}\n"));
    Agents agents(stub, prompts);
    const auto cand = view("U rates B", {"User -[rates]-> Business"});
    EXPECT_EQ(agents.predict_candidates({cand}, {{cand, 0.7}})[0].p, 0.7);
}
