#pragma once

// Synthetic dataset with a planted recommendation structure.
//
// Businesses sit in a grid of (category, city) cells. Every user has two home
// cells with distinct categories and cities and rates most businesses there
// highly. Low ratings go to businesses that share only the category or only
// the city of a home cell, never both. A user therefore likes exactly the
// businesses that share a category with one liked business and a city with
// one liked business: the two-path structure
//
//   User -rates-> Business' -belongs to-> Category -includes-> Business
//                 Business' -is located in-> City -hosts-> Business
//
// separates the labels, while either path alone also reaches the low-rated
// businesses. Friendships are random.

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "restruct/error.hpp"
#include "restruct/hin_graph.hpp"
#include "restruct/io.hpp"
#include "restruct/metastructure.hpp"
#include "restruct/random.hpp"
#include "restruct/schema.hpp"

namespace restruct {

struct PlantedParams {
    int categories = 6;
    int cities = 6;
    int businesses_per_cell = 12;
    int users = 120;
    int liked_per_home_cell = 8;
    int disliked_per_user = 14;
    int friends_per_user = 2;
    std::uint64_t seed = 0;
};

inline const char* kPlantedSchemaJson = R"({
  "node_types": [
    {"id": 0, "name": "U", "noun": "User"},
    {"id": 1, "name": "B", "noun": "Business"},
    {"id": 2, "name": "A", "noun": "Category"},
    {"id": 3, "name": "I", "noun": "City"}],
  "edge_types": [
    {"id": 0, "name": "rates", "src": "U", "dst": "B", "verb": "rates", "inverse": 1},
    {"id": 1, "name": "rated_by", "src": "B", "dst": "U", "verb": "is rated by", "inverse": 0},
    {"id": 2, "name": "belongs_to", "src": "B", "dst": "A", "verb": "belongs to", "inverse": 3},
    {"id": 3, "name": "includes", "src": "A", "dst": "B", "verb": "includes", "inverse": 2},
    {"id": 4, "name": "located_in", "src": "B", "dst": "I", "verb": "is located in", "inverse": 5},
    {"id": 5, "name": "hosts", "src": "I", "dst": "B", "verb": "hosts", "inverse": 4},
    {"id": 6, "name": "friend_of", "src": "U", "dst": "U", "verb": "is friend of", "inverse": 6}]
})";

inline Schema planted_schema() { return Schema::from_json(json::parse(kPlantedSchemaJson)); }

/// The planted structure over planted_schema().
inline MetaStructure planted_structure() {
    MetaStructure ms;
    ms.nodes = {0, 1, 2, 3, 1};
    ms.edges = {{0, 1, 0}, {1, 2, 2}, {2, 4, 3}, {1, 3, 4}, {3, 4, 5}};
    ms.source = 0;
    ms.target = 4;
    return ms;
}

struct PlantedDataset {
    PlantedParams params;
    std::int64_t business_count = 0;
    std::vector<NodePair> belongs_to, located_in, friend_of;
    std::vector<std::tuple<std::int64_t, std::int64_t, int>> ratings; ///< (user, business, 1..5)
};

inline PlantedDataset generate_planted(const PlantedParams& p) {
    if (p.categories < 3 || p.cities < 3) throw UsageError("planted dataset needs at least 3 categories and 3 cities");
    if (p.liked_per_home_cell > p.businesses_per_cell)
        throw UsageError("liked_per_home_cell exceeds businesses_per_cell");
    Rng rng(p.seed);
    PlantedDataset d;
    d.params = p;
    const auto cell_business = [&](int a, int i, int k) {
        return static_cast<std::int64_t>((a * p.cities + i) * p.businesses_per_cell + k);
    };
    d.business_count = static_cast<std::int64_t>(p.categories) * p.cities * p.businesses_per_cell;
    for (int a = 0; a < p.categories; ++a)
        for (int i = 0; i < p.cities; ++i)
            for (int k = 0; k < p.businesses_per_cell; ++k) {
                d.belongs_to.emplace_back(cell_business(a, i, k), a);
                d.located_in.emplace_back(cell_business(a, i, k), i);
            }

    auto pick = [&](int n) { return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n))); };
    for (std::int64_t u = 0; u < p.users; ++u) {
        const int a1 = pick(p.categories);
        int a2 = pick(p.categories - 1);
        if (a2 >= a1) ++a2;
        const int i1 = pick(p.cities);
        int i2 = pick(p.cities - 1);
        if (i2 >= i1) ++i2;
        const int home[2][2] = {{a1, i1}, {a2, i2}};
        for (const auto& h : home)
            for (auto k : sample_indices(rng, static_cast<std::size_t>(p.businesses_per_cell),
                                         static_cast<std::size_t>(p.liked_per_home_cell)))
                d.ratings.emplace_back(u, cell_business(h[0], h[1], static_cast<int>(k)), 4 + pick(2));

        std::set<std::int64_t> disliked;
        for (int n = 0; n < p.disliked_per_user; ++n) {
            const auto& h = home[n % 2];
            int a = h[0], i = h[1];
            // alternate between sharing only the category and sharing only the city
            if (n / 2 % 2 == 0) {
                do i = pick(p.cities);
                while (i == i1 || i == i2);
            } else {
                do a = pick(p.categories);
                while (a == a1 || a == a2);
            }
            const auto b = cell_business(a, i, pick(p.businesses_per_cell));
            if (disliked.insert(b).second) d.ratings.emplace_back(u, b, 1 + pick(2));
        }
    }
    std::set<NodePair> friends;
    for (std::int64_t u = 0; u < p.users; ++u)
        for (int n = 0; n < p.friends_per_user; ++n) {
            const auto v = static_cast<std::int64_t>(pick(p.users));
            if (v == u) continue;
            friends.insert({u, v});
            friends.insert({v, u});
        }
    d.friend_of.assign(friends.begin(), friends.end());
    return d;
}

/// Writes schema.json and a dataset directory `data/` (node counts, relation
/// files, ratings.tsv) under `dir`.
inline void write_planted(const PlantedDataset& d, const fs::path& dir) {
    fs::create_directories(dir / "data");
    write_file_atomic(dir / "schema.json", planted_schema().to_json().dump(2) + "\n");
    const auto& p = d.params;
    write_file_atomic(dir / "data" / "node_counts.tsv", "U\t" + std::to_string(p.users) + "\nB\t" +
                                                            std::to_string(d.business_count) + "\nA\t" +
                                                            std::to_string(p.categories) + "\nI\t" +
                                                            std::to_string(p.cities) + "\n");
    auto pairs = [](const std::vector<NodePair>& v) {
        std::string s;
        for (auto [a, b] : v) s += std::to_string(a) + "\t" + std::to_string(b) + "\n";
        return s;
    };
    std::string rates, ratings;
    for (auto [u, b, r] : d.ratings) {
        rates += std::to_string(u) + "\t" + std::to_string(b) + "\n";
        ratings += std::to_string(u) + "\t" + std::to_string(b) + "\t" + std::to_string(r) + "\n";
    }
    write_file_atomic(dir / "data" / "rates.tsv", rates);
    write_file_atomic(dir / "data" / "ratings.tsv", ratings);
    write_file_atomic(dir / "data" / "belongs_to.tsv", pairs(d.belongs_to));
    write_file_atomic(dir / "data" / "located_in.tsv", pairs(d.located_in));
    write_file_atomic(dir / "data" / "friend_of.tsv", pairs(d.friend_of));
}

} // namespace restruct
