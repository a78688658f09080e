#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "restruct/error.hpp"

namespace restruct {

/// Probability that a random positive outranks a random negative, ties
/// counted half, from the Mann-Whitney rank sum.
inline double auc(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty()) throw DataError("auc needs at least one positive and one negative score");
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> all;
    all.reserve(pos.size() + neg.size());
    for (double s : pos) all.push_back({s, true});
    for (double s : neg) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

    // Ranks are 1-based; a tie group spanning ranks [i+1, j] gets their mean.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        std::size_t pos_in_group = 0;
        while (j < all.size() && all[j].score == all[i].score) {
            if (all[j].positive) ++pos_in_group;
            ++j;
        }
        const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        pos_rank_sum += mean_rank * static_cast<double>(pos_in_group);
        i = j;
    }
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Unweighted mean of per-class F1 over classes 0..k-1. A class whose
/// precision and recall are both zero (including a class absent from both
/// lists) contributes 0.
inline double macro_f1(std::span<const int> pred, std::span<const int> gold, int k) {
    if (pred.size() != gold.size())
        throw DataError("macro_f1: " + std::to_string(pred.size()) + " predictions for " +
                        std::to_string(gold.size()) + " gold labels");
    if (k <= 0) throw DataError("macro_f1: class count must be positive");
    std::vector<long long> tp(static_cast<std::size_t>(k), 0), fp(tp), fn(tp);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= k || gold[i] < 0 || gold[i] >= k)
            throw DataError("macro_f1: class id out of range at index " + std::to_string(i));
        if (pred[i] == gold[i]) {
            ++tp[static_cast<std::size_t>(pred[i])];
        } else {
            ++fp[static_cast<std::size_t>(pred[i])];
            ++fn[static_cast<std::size_t>(gold[i])];
        }
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < tp.size(); ++c) {
        const auto pd = tp[c] + fp[c], rd = tp[c] + fn[c];
        const double p = pd > 0 ? static_cast<double>(tp[c]) / static_cast<double>(pd) : 0.0;
        const double r = rd > 0 ? static_cast<double>(tp[c]) / static_cast<double>(rd) : 0.0;
        if (p + r > 0.0) sum += 2.0 * p * r / (p + r);
    }
    return sum / static_cast<double>(k);
}

} // namespace restruct
