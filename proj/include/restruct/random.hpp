#pragma once

// Portable sampling helpers. The standard distributions are
// implementation-defined, so results would differ between standard
// libraries; everything here is defined directly on the engine output.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace restruct {

using Rng = std::mt19937_64;

/// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // mt19937_64 covers the full 64-bit range; reject the biased low tail
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x = rng();
    while (x < threshold) x = rng();
    return x % n;
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

/// k distinct indices from [0, n), returned in ascending order.
inline std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k >= n) return idx;
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Draw an index with probability proportional to weights (uniform when all are zero).
inline std::size_t weighted_index(Rng& rng, std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return static_cast<std::size_t>(uniform_index(rng, weights.size()));
    const double u = uniform_unit(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    // rounding at the top end
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Short hex digest of the full engine state, for event logs.
inline std::string state_digest(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    static constexpr char hex[] = "0123456789abcdef";
    std::uint64_t h = fnv1a(os.str());
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    return out;
}

} // namespace restruct
