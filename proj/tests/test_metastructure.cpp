#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "restruct/canonical.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/seeding.hpp"
#include "test_support.hpp"

using namespace restruct;

namespace {

// toy schema ids: U=0 B=1 A=2 I=3; rates=0 belongs_to=1 located_in=2 friend_of=3
MetaStructure linear(std::vector<int> nodes, std::vector<int> edges) {
    return from_meta_path({std::move(nodes), std::move(edges)});
}

bool has_message(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& m : v)
        if (m.find(needle) != std::string::npos) return true;
    return false;
}

MetaStructure permuted(const MetaStructure& ms, const std::vector<int>& perm) {
    MetaStructure out;
    out.nodes.assign(ms.nodes.size(), 0);
    for (std::size_t v = 0; v < ms.nodes.size(); ++v) out.nodes[perm[v]] = ms.nodes[v];
    for (const auto& e : ms.edges) out.edges.push_back({perm[e.from], perm[e.to], e.type});
    out.source = perm[ms.source];
    out.target = perm[ms.target];
    return out;
}

} // namespace

TEST(Validate, LinearRatesIsValid) {
    const auto s = testsupport::toy_schema();
    EXPECT_TRUE(validate(linear({0, 1}, {0}), s).empty());
}

TEST(Validate, BackEdgeIsACycle) {
    const auto s = testsupport::planted_schema();
    auto ms = linear({0, 1}, {0});
    ms.edges.push_back({1, 0, 1});
    EXPECT_TRUE(has_message(validate(ms, s), "cycle"));
}

TEST(Validate, DanglingNodeIsReported) {
    const auto s = testsupport::toy_schema();
    auto ms = linear({0, 1}, {0});
    ms.nodes.push_back(2);
    EXPECT_TRUE(has_message(validate(ms, s), "node off all source-target paths"));
}

TEST(Validate, ReportsTypeMismatchDuplicateAndSize) {
    const auto s = testsupport::toy_schema();
    auto ms = linear({0, 1}, {0});
    ms.edges.push_back({0, 1, 0});
    EXPECT_TRUE(has_message(validate(ms, s), "duplicate edge"));
    ms.edges.back().type = 1;
    EXPECT_TRUE(has_message(validate(ms, s), "edge type mismatch"));
    EXPECT_TRUE(has_message(validate(linear({0, 0, 1}, {3, 0}), s, 2), "too many nodes"));
    MetaStructure empty;
    EXPECT_TRUE(has_message(validate(empty, s), "no nodes"));
}

TEST(EnumeratePaths, LinearHasOnePath) {
    const auto paths = enumerate_paths(linear({0, 1, 2}, {0, 1}));
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(paths[0].node_types, (std::vector<int>{0, 1, 2}));
}

TEST(EnumeratePaths, DiamondHasTwoPaths) {
    MetaStructure ms;
    ms.nodes = {0, 1, 1, 2};
    ms.edges = {{0, 1, 0}, {0, 2, 0}, {1, 3, 1}, {2, 3, 1}};
    ms.source = 0;
    ms.target = 3;
    EXPECT_EQ(enumerate_paths(ms).size(), 2u);
}

TEST(EnumeratePaths, MatchesBruteForceOnRandomDags) {
    const auto s = testsupport::planted_schema();
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto ms = testsupport::random_structure(s, rng, 8);
        ASSERT_TRUE(is_valid(ms, s));
        std::set<std::pair<std::vector<int>, std::vector<int>>> got;
        for (const auto& ep : enumerate_edge_paths(ms)) got.insert({path_positions(ms, ep), to_meta_path(ms, ep).edge_types});
        EXPECT_EQ(got, testsupport::brute_paths(ms)) << "trial " << trial;
    }
}

TEST(EnumeratePaths, OrderIsLexicographicByPositions) {
    const auto s = testsupport::planted_schema();
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto ms = testsupport::random_structure(s, rng, 7);
        std::vector<std::vector<int>> seqs;
        for (const auto& ep : enumerate_edge_paths(ms)) {
            std::vector<int> seq;
            for (int ei : ep) {
                seq.push_back(ms.edges[ei].to);
                seq.push_back(ms.edges[ei].type);
            }
            seqs.push_back(seq);
        }
        EXPECT_TRUE(std::is_sorted(seqs.begin(), seqs.end()));
    }
}

TEST(CanonicalKey, InvariantUnderPermutation) {
    const auto s = testsupport::planted_schema();
    Rng rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const auto ms = testsupport::random_structure(s, rng, 9);
        std::vector<int> perm(ms.nodes.size());
        std::iota(perm.begin(), perm.end(), 0);
        shuffle(perm, rng);
        auto other = permuted(ms, perm);
        shuffle(other.edges, rng);
        EXPECT_EQ(canonical_key(ms), canonical_key(other));
        EXPECT_EQ(canonical_form(ms), canonical_form(other));
    }
}

TEST(CanonicalKey, DistinguishesDifferentNodeMultisets) {
    EXPECT_NE(canonical_key(linear({0, 1}, {0})), canonical_key(linear({0, 0, 1}, {3, 0})));
}

TEST(CanonicalKey, EqualIffIsomorphicOnSmallCorpus) {
    const auto s = testsupport::toy_schema();
    std::map<std::vector<int>, std::string> by_brute;
    std::map<std::string, std::vector<int>> by_key;
    std::size_t count = 0;
    testsupport::enumerate_structures(s, 6, [&](const MetaStructure& ms) {
        ++count;
        const auto brute = testsupport::brute_canonical(ms);
        const auto key = canonical_key(ms).value;
        auto [bi, bnew] = by_brute.emplace(brute, key);
        if (!bnew) {
            EXPECT_EQ(bi->second, key) << "isomorphic structures got different keys";
        }
        auto [ki, knew] = by_key.emplace(key, brute);
        if (!knew) {
            EXPECT_EQ(ki->second, brute) << "non-isomorphic structures share key " << key;
        }
    });
    EXPECT_GT(count, 1000u);
    EXPECT_EQ(by_brute.size(), by_key.size());
}

TEST(CanonicalKey, EqualIffIsomorphicOnRichSchema) {
    // the bidirectional schema yields parallel typed edges and more symmetry
    const auto s = testsupport::planted_schema();
    std::map<std::vector<int>, std::string> by_brute;
    std::map<std::string, std::vector<int>> by_key;
    testsupport::enumerate_structures(s, 4, [&](const MetaStructure& ms) {
        const auto brute = testsupport::brute_canonical(ms);
        const auto key = canonical_key(ms).value;
        auto [bi, bnew] = by_brute.emplace(brute, key);
        if (!bnew) {
            EXPECT_EQ(bi->second, key);
        }
        auto [ki, knew] = by_key.emplace(key, brute);
        if (!knew) {
            EXPECT_EQ(ki->second, brute);
        }
    });
    EXPECT_EQ(by_brute.size(), by_key.size());
}

TEST(CanonicalKey, LargeStructuresUseRefinementDigest) {
    std::vector<std::string> warnings;
    auto prev = set_log_sink([&](std::string_view level, std::string_view msg) {
        if (level == "warning") warnings.emplace_back(msg);
    });
    std::vector<int> nodes(12, 0), edges(11, 3);
    nodes.back() = 1;
    edges.back() = 0;
    const auto key = canonical_key(linear(nodes, edges));
    set_log_sink(prev);
    EXPECT_EQ(key.value.rfind("wl:", 0), 0u);
    EXPECT_FALSE(warnings.empty());
}

TEST(Seeding, ToyUserToBusiness) {
    const auto s = testsupport::toy_schema();
    const auto seeds = seed_population(s, 0, 1, 5);
    ASSERT_EQ(seeds.size(), 5u);
    std::set<CanonicalKey> keys;
    for (const auto& ms : seeds) {
        EXPECT_TRUE(is_valid(ms, s));
        keys.insert(canonical_key(ms));
    }
    EXPECT_EQ(keys.size(), 5u);
    EXPECT_EQ(seeds[0], linear({0, 1}, {0}));
    EXPECT_EQ(seeds[1], linear({0, 0, 1}, {3, 0}));
}

TEST(Seeding, SingleSeedIsShortestPath) {
    const auto s = testsupport::toy_schema();
    const auto seeds = seed_population(s, 0, 2, 1);
    ASSERT_EQ(seeds.size(), 1u);
    EXPECT_EQ(seeds[0], linear({0, 1, 2}, {0, 1}));
}

TEST(Seeding, PadsCyclicallyWhenFewPathsExist) {
    const auto s = testsupport::toy_schema();
    const auto seeds = seed_population(s, 1, 2, 3);
    ASSERT_EQ(seeds.size(), 3u);
    EXPECT_EQ(seeds[0], seeds[1]);
    EXPECT_EQ(seeds[1], seeds[2]);
}

TEST(Seeding, DisconnectedTypesIsAnError) {
    const auto s = testsupport::toy_schema();
    EXPECT_THROW(seed_population(s, 2, 0, 5), DataError);
}

TEST(MetaStructureJson, RoundTrip) {
    const auto ms = linear({0, 1, 2}, {0, 1});
    EXPECT_EQ(metastructure_from_json(to_json(ms)), ms);
    EXPECT_THROW(metastructure_from_json(json::parse(R"({"nodes": [0]})")), DataError);
}

TEST(ContainsSubgraph, FindsTypedEmbedding) {
    const auto path = linear({0, 1, 2}, {0, 1});
    const auto longer = linear({0, 0, 1, 2}, {3, 0, 1});
    EXPECT_TRUE(contains_subgraph(longer, path));
    EXPECT_TRUE(contains_subgraph(path, path));
    EXPECT_FALSE(contains_subgraph(path, longer));
    EXPECT_FALSE(contains_subgraph(linear({0, 1, 2}, {0, 2}), path));
}

TEST(ContainsSubgraph, NodesMapInjectively) {
    // a single B node cannot stand in for two
    const auto two = linear({0, 1, 0, 1}, {0, 1, 0});
    const auto one = linear({0, 1}, {0});
    EXPECT_TRUE(contains_subgraph(two, one));
    EXPECT_FALSE(contains_subgraph(one, two));
}
