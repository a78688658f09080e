#include <gtest/gtest.h>

#include <set>

#include "restruct/hin_graph.hpp"
#include "restruct/schema.hpp"
#include "restruct/splits.hpp"
#include "test_support.hpp"

using namespace restruct;
using testsupport::TempDir;

namespace {

const char* kToySchemaJson = R"({
  "node_types": [
    {"id": 0, "name": "U", "noun": "User"},
    {"id": 1, "name": "B", "noun": "Business"},
    {"id": 2, "name": "A", "noun": "Category"},
    {"id": 3, "name": "I", "noun": "City"}],
  "edge_types": [
    {"id": 0, "name": "rates", "src": 0, "dst": 1, "verb": "rates"},
    {"id": 1, "name": "belongs_to", "src": 1, "dst": 2, "verb": "belongs to"},
    {"id": 2, "name": "located_in", "src": 1, "dst": 3, "verb": "is located in"},
    {"id": 3, "name": "friend_of", "src": 0, "dst": 0, "verb": "is friend of", "inverse": 3}]
})";

std::vector<LabeledPair> labeled(std::size_t pos, std::size_t neg, std::int64_t cols) {
    std::vector<LabeledPair> out;
    std::size_t k = 0;
    for (std::size_t i = 0; i < pos; ++i, ++k)
        out.push_back({static_cast<std::int64_t>(k) / cols, static_cast<std::int64_t>(k) % cols, 1});
    for (std::size_t i = 0; i < neg; ++i, ++k)
        out.push_back({static_cast<std::int64_t>(k) / cols, static_cast<std::int64_t>(k) % cols, 0});
    return out;
}

HinGraph empty_graph(const Schema& s, std::vector<std::int64_t> counts) {
    return HinGraph::from_edges(s, std::move(counts), std::vector<std::vector<NodePair>>(s.edge_type_count()));
}

} // namespace

TEST(Schema, LoadsToySchemaFile) {
    TempDir dir("schema");
    const auto s = load_schema(dir.write("schema.json", kToySchemaJson));
    EXPECT_EQ(s.node_type_count(), 4);
    EXPECT_EQ(s.edge_type_count(), 4);
    EXPECT_EQ(s.edge_type(1).verb, "belongs to");
    EXPECT_EQ(s.find_node_type("I"), 3);
    EXPECT_EQ(s.edge_types_between(0, 1), std::vector<int>{0});
}

TEST(Schema, RoundTripsThroughJson) {
    const auto s = Schema::from_json(json::parse(kToySchemaJson));
    const auto again = Schema::from_json(s.to_json());
    EXPECT_EQ(again.to_json(), s.to_json());
}

TEST(Schema, RejectsDanglingNodeType) {
    auto j = json::parse(kToySchemaJson);
    j["edge_types"][0]["dst"] = "Z";
    try {
        Schema::from_json(j);
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("\"Z\""), std::string::npos) << e.what();
    }
}

TEST(Schema, RejectsEmptyNodeTypes) {
    EXPECT_THROW(Schema::from_json(json::parse(R"({"node_types": [], "edge_types": []})")), DataError);
}

TEST(Schema, RejectsAsymmetricInverse) {
    auto j = json::parse(kToySchemaJson);
    j["edge_types"][0]["inverse"] = 3;
    EXPECT_THROW(Schema::from_json(j), DataError);
}

TEST(Schema, RejectsInverseWithUnswappedEndpoints) {
    auto j = json::parse(kToySchemaJson);
    j["edge_types"][1]["inverse"] = 2;
    j["edge_types"][2]["inverse"] = 1;
    EXPECT_THROW(Schema::from_json(j), DataError);
}

TEST(SparseMatrix, DeduplicatesPairs) {
    const auto m = SparseMatrix::from_pairs(2, 3, {{0, 1}, {0, 1}, {1, 2}});
    EXPECT_EQ(m.nnz(), 2u);
    EXPECT_EQ(m.at(0, 1), 1.0);
    EXPECT_EQ(m.at(1, 0), 0.0);
}

TEST(SparseMatrix, MultiplyMatchesHandProduct) {
    const auto f = SparseMatrix::from_pairs(2, 2, {{0, 1}, {1, 0}});
    const auto r = SparseMatrix::from_pairs(2, 2, {{0, 0}, {1, 0}, {1, 1}});
    const auto p = f.multiply(r);
    EXPECT_EQ(p.at(0, 0), 1.0);
    EXPECT_EQ(p.at(0, 1), 1.0);
    EXPECT_EQ(p.at(1, 0), 1.0);
    EXPECT_EQ(p.at(1, 1), 0.0);
}

TEST(SparseMatrix, MultiplyChecksDimensions) {
    const auto a = SparseMatrix::from_pairs(2, 3, {});
    const auto b = SparseMatrix::from_pairs(2, 3, {});
    EXPECT_THROW(a.multiply(b), DataError);
}

TEST(SparseMatrix, BudgetRefusesBlowup) {
    std::vector<NodePair> all;
    for (int i = 0; i < 20; ++i) all.push_back({i, 0});
    const auto col = SparseMatrix::from_pairs(20, 1, all);
    const auto row = col.transpose();
    try {
        col.multiply(row, 100);
        FAIL() << "expected a blowup error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("matrix blowup"), std::string::npos);
    }
    EXPECT_EQ(col.multiply(row, 400).nnz(), 400u);
}

TEST(SparseMatrix, RowNormalizedKeepsZeroRows) {
    const auto m = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {0, 2, 3.0}, {2, 1, 5.0}}).row_normalized();
    EXPECT_DOUBLE_EQ(m.at(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(m.at(0, 2), 0.75);
    EXPECT_EQ(m.row_cols(1).size(), 0u);
    EXPECT_DOUBLE_EQ(m.at(2, 1), 1.0);
}

TEST(SparseMatrix, HadamardIntersectsPatterns) {
    const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 0.5}, {0, 1, 0.5}, {1, 1, 1.0}});
    const auto b = SparseMatrix::from_triplets(2, 2, {{0, 1, 0.25}, {1, 0, 1.0}});
    const auto h = a.hadamard(b);
    EXPECT_EQ(h.nnz(), 1u);
    EXPECT_DOUBLE_EQ(h.at(0, 1), 0.125);
}

class GraphLoading : public ::testing::Test {
protected:
    TempDir dir{"graph"};
    Schema schema = Schema::from_json(json::parse(kToySchemaJson));

    void write_dataset(const std::string& rates) {
        dir.write("node_counts.tsv", "U\t3\nB\t2\nA\t1\nI\t1\n");
        dir.write("rates.tsv", rates);
        dir.write("belongs_to.tsv", "0\t0\n1\t0\n");
        dir.write("located_in.tsv", "# city\n0\t0\n1\t0\n");
        dir.write("friend_of.tsv", "0\t1\n1\t0\n");
    }
};

TEST_F(GraphLoading, CollapsesDuplicateLines) {
    write_dataset("0\t1\n0\t1\n2\t0\n");
    const auto g = load_graph(schema, dir.path());
    EXPECT_EQ(g.adjacency(0).nnz(), 2u);
    EXPECT_EQ(g.adjacency(0).rows(), 3);
    EXPECT_EQ(g.adjacency(0).cols(), 2);
}

TEST_F(GraphLoading, RejectsOutOfRangeIndex) {
    write_dataset("5\t0\n");
    try {
        load_graph(schema, dir.path());
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos) << e.what();
    }
}

TEST_F(GraphLoading, RejectsMissingRelationFile) {
    write_dataset("0\t0\n");
    std::filesystem::remove(dir.path() / "belongs_to.tsv");
    try {
        load_graph(schema, dir.path());
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("missing relation file"), std::string::npos) << e.what();
    }
}

TEST_F(GraphLoading, RejectsAsymmetricSelfInverseData) {
    write_dataset("0\t0\n");
    dir.write("friend_of.tsv", "0\t1\n");
    EXPECT_THROW(load_graph(schema, dir.path()), DataError);
}

TEST_F(GraphLoading, DerivesOmittedInverseByTranspose) {
    const auto s = testsupport::planted_schema();
    dir.write("node_counts.tsv", "U\t2\nB\t3\nA\t1\nI\t1\n");
    dir.write("rates.tsv", "0\t2\n1\t0\n");
    dir.write("belongs_to.tsv", "0\t0\n");
    dir.write("includes.tsv", "0\t0\n");
    dir.write("located_in.tsv", "1\t0\n");
    dir.write("friend_of.tsv", "");
    const auto g = load_graph(s, dir.path());
    EXPECT_EQ(g.adjacency(1), g.adjacency(0).transpose());
    EXPECT_EQ(g.adjacency(5).at(0, 1), 1.0);
}

TEST(Ratings, StrictThreshold) {
    const std::vector<Rating> r{{1, 1, 3}, {1, 2, 1}, {1, 3, 2}};
    const auto l = binarize_ratings(r);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[0].label, 1);
    EXPECT_EQ(l[1].label, 0);
    EXPECT_EQ(l[2].label, 0);
}

TEST(RecommendationSplit, HalfReservedThreeOneOne) {
    const auto s = testsupport::toy_schema();
    const auto g = empty_graph(s, {40, 10, 1, 1});
    const auto pairs = labeled(100, 100, 10);
    const auto split = make_recommendation_split(g, 0, pairs, {}, 7);
    EXPECT_EQ(split.reserved.size(), 50u);
    EXPECT_EQ(split.positive(SplitTag::train).size(), 30u);
    EXPECT_EQ(split.positive(SplitTag::val).size(), 10u);
    EXPECT_EQ(split.positive(SplitTag::test).size(), 10u);
    EXPECT_EQ(split.negative(SplitTag::train).size(), 30u);
    EXPECT_EQ(split.negative(SplitTag::val).size(), 10u);
    EXPECT_EQ(split.negative(SplitTag::test).size(), 10u);

    std::set<NodePair> reserved(split.reserved.begin(), split.reserved.end());
    for (const auto& part : split.positives)
        for (const auto& p : part) EXPECT_EQ(reserved.count(p), 0u);

    const auto cg = construction_graph(g, split);
    EXPECT_EQ(cg.adjacency(0).nnz(), 50u);
    for (const auto& p : split.reserved) EXPECT_EQ(cg.adjacency(0).at(p.first, p.second), 1.0);
}

TEST(RecommendationSplit, TooFewPositivesIsAnError) {
    const auto s = testsupport::toy_schema();
    const auto g = empty_graph(s, {4, 4, 1, 1});
    const auto pairs = labeled(4, 4, 4);
    try {
        make_recommendation_split(g, 0, pairs, {}, 1);
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("split too small"), std::string::npos);
    }
}

TEST(RecommendationSplit, NoPositivesIsAnError) {
    const auto s = testsupport::toy_schema();
    const auto g = empty_graph(s, {4, 4, 1, 1});
    const auto pairs = labeled(0, 4, 4);
    EXPECT_THROW(make_recommendation_split(g, 0, pairs, {}, 1), DataError);
}

TEST(RecommendationSplit, SamplesNegativesFromUnconnectedPairs) {
    const auto s = testsupport::toy_schema();
    std::vector<std::vector<NodePair>> edges(4);
    edges[0] = {{0, 0}, {1, 1}};
    const auto g = HinGraph::from_edges(s, {30, 10, 1, 1}, edges);
    const auto pairs = labeled(100, 0, 10);
    const auto split = make_recommendation_split(g, 0, pairs, {}, 3);
    std::set<NodePair> pos;
    for (const auto& p : pairs) pos.insert({p.src, p.dst});
    std::set<NodePair> seen;
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(split.negatives[t].size(), split.positives[t].size());
        for (const auto& n : split.negatives[t]) {
            EXPECT_EQ(pos.count(n), 0u);
            EXPECT_NE(n, NodePair(0, 0));
            EXPECT_NE(n, NodePair(1, 1));
            EXPECT_TRUE(seen.insert(n).second) << "negative drawn twice";
        }
    }
}

TEST(RecommendationSplit, DeterministicPerSeed) {
    const auto s = testsupport::toy_schema();
    const auto g = empty_graph(s, {40, 10, 1, 1});
    const auto pairs = labeled(200, 50, 10);
    const auto a = make_recommendation_split(g, 0, pairs, {}, 11);
    const auto b = make_recommendation_split(g, 0, pairs, {}, 11);
    const auto c = make_recommendation_split(g, 0, pairs, {}, 12);
    EXPECT_EQ(a.reserved, b.reserved);
    EXPECT_EQ(a.positives, b.positives);
    EXPECT_EQ(a.negatives, b.negatives);
    EXPECT_NE(a.reserved, c.reserved);
}

TEST(NodeLabelSplit, RatioArithmetic) {
    std::vector<std::pair<std::int64_t, int>> labels;
    for (int i = 0; i < 50; ++i) labels.emplace_back(i, i % 3);
    const auto split = make_node_label_split(0, labels, {}, 1);
    EXPECT_EQ(split.nodes(SplitTag::train).size(), 30u);
    EXPECT_EQ(split.nodes(SplitTag::val).size(), 10u);
    EXPECT_EQ(split.nodes(SplitTag::test).size(), 10u);
    EXPECT_EQ(split.class_count, 3);

    std::set<std::int64_t> all;
    for (const auto& part : split.index) all.insert(part.begin(), part.end());
    EXPECT_EQ(all.size(), 50u);

    labels.resize(5);
    const auto small = make_node_label_split(0, labels, {}, 1);
    EXPECT_EQ(small.nodes(SplitTag::train).size(), 3u);
    EXPECT_EQ(small.nodes(SplitTag::val).size(), 1u);
    EXPECT_EQ(small.nodes(SplitTag::test).size(), 1u);
}

TEST(NodeLabelSplit, RejectsEmptyAndMissingClasses) {
    EXPECT_THROW(make_node_label_split(0, {}, {}, 1), DataError);
    const std::vector<std::pair<std::int64_t, int>> gap{{0, 0}, {1, 2}};
    EXPECT_THROW(make_node_label_split(0, gap, {}, 1), DataError);
}
