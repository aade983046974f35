#include "surfmem/blossom.hpp"

#include <numeric>
#include <random>

#include "gtest/gtest.h"

using namespace surfmem;

namespace {

int64_t matching_cost(int n, const std::vector<int64_t>& cost, const std::vector<int>& mate) {
    int64_t total = 0;
    for (int u = 0; u < n; ++u) {
        if (mate[u] > u) total += cost[static_cast<std::size_t>(u) * n + mate[u]];
    }
    return total;
}

// Exhaustive minimum over all perfect matchings.
int64_t brute_min(int n, const std::vector<int64_t>& cost) {
    std::vector<int> nodes(n);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::function<int64_t(std::vector<int>&)> rec = [&](std::vector<int>& rest) -> int64_t {
        if (rest.empty()) return 0;
        int u = rest[0];
        int64_t best = kNoEdge;
        for (std::size_t i = 1; i < rest.size(); ++i) {
            int v = rest[i];
            int64_t c = cost[static_cast<std::size_t>(u) * n + v];
            if (c == kNoEdge) continue;
            std::vector<int> next;
            for (std::size_t j = 1; j < rest.size(); ++j) {
                if (j != i) next.push_back(rest[j]);
            }
            int64_t sub = rec(next);
            if (sub != kNoEdge && (best == kNoEdge || c + sub < best)) best = c + sub;
        }
        return best;
    };
    return rec(nodes);
}

std::vector<int64_t> random_complete(int n, std::mt19937_64& rng, int64_t max_cost) {
    std::vector<int64_t> cost(static_cast<std::size_t>(n) * n, kNoEdge);
    std::uniform_int_distribution<int64_t> w(0, max_cost);
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            cost[static_cast<std::size_t>(u) * n + v] = cost[static_cast<std::size_t>(v) * n + u] =
                w(rng);
        }
    }
    return cost;
}

}  // namespace

TEST(Blossom, TinyInstances) {
    BlossomMatcher matcher;
    {
        std::vector<int64_t> cost{kNoEdge, 5, 5, kNoEdge};
        auto mate = matcher.solve(2, cost);
        EXPECT_EQ(mate, (std::vector<int>{1, 0}));
    }
    {
        // Square: nodes 0-1 cheap, 2-3 cheap, cross expensive.
        std::vector<int64_t> cost(16, kNoEdge);
        auto set = [&](int u, int v, int64_t w) { cost[u * 4 + v] = cost[v * 4 + u] = w; };
        set(0, 1, 1);
        set(2, 3, 1);
        set(0, 2, 10);
        set(1, 3, 10);
        auto mate = matcher.solve(4, cost);
        EXPECT_EQ(matching_cost(4, cost, mate), 2);
    }
    {
        // Forced cross: the cheap pairing is blocked.
        std::vector<int64_t> cost(16, kNoEdge);
        auto set = [&](int u, int v, int64_t w) { cost[u * 4 + v] = cost[v * 4 + u] = w; };
        set(0, 2, 10);
        set(1, 3, 7);
        auto mate = matcher.solve(4, cost);
        EXPECT_EQ(matching_cost(4, cost, mate), 17);
    }
}

TEST(Blossom, MatchesBruteForceOnRandomCompleteGraphs) {
    std::mt19937_64 rng(12345);
    BlossomMatcher matcher;
    for (int n : {2, 4, 6, 8, 10}) {
        for (int trial = 0; trial < 300; ++trial) {
            int64_t max_cost = trial % 3 == 0 ? 3 : 1000;  // small range forces ties
            auto cost = random_complete(n, rng, max_cost);
            auto mate = matcher.solve(n, cost);
            EXPECT_EQ(matching_cost(n, cost, mate), brute_min(n, cost)) << "n=" << n;
        }
    }
}

TEST(Blossom, MatchesBruteForceOnSparseGraphs) {
    std::mt19937_64 rng(99);
    BlossomMatcher matcher;
    for (int n : {4, 6, 8, 10, 12}) {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<int64_t> cost(static_cast<std::size_t>(n) * n, kNoEdge);
            // Hidden perfect matching guarantees feasibility.
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            std::uniform_int_distribution<int64_t> w(0, 50);
            auto set = [&](int u, int v, int64_t c) {
                cost[static_cast<std::size_t>(u) * n + v] = c;
                cost[static_cast<std::size_t>(v) * n + u] = c;
            };
            for (int i = 0; i < n; i += 2) set(perm[i], perm[i + 1], w(rng));
            std::uniform_int_distribution<int> pick(0, n - 1);
            for (int extra = 0; extra < n; ++extra) {
                int u = pick(rng), v = pick(rng);
                if (u != v) set(u, v, w(rng));
            }
            auto mate = matcher.solve(n, cost);
            EXPECT_EQ(matching_cost(n, cost, mate), brute_min(n, cost)) << "n=" << n;
        }
    }
}

TEST(Blossom, LargerPerturbedGrid) {
    // A structured instance with many equal weights, solved against itself
    // after a cost-preserving permutation.
    std::mt19937_64 rng(7);
    BlossomMatcher matcher;
    const int n = 40;
    auto cost = random_complete(n, rng, 8);
    auto mate = matcher.solve(n, cost);
    int64_t total = matching_cost(n, cost, mate);
    // Any perfect matching is an upper bound; check a few random ones.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < 50; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        int64_t other = 0;
        for (int i = 0; i < n; i += 2) {
            other += cost[static_cast<std::size_t>(perm[i]) * n + perm[i + 1]];
        }
        EXPECT_LE(total, other);
    }
}

TEST(Blossom, RejectsOddCount) {
    BlossomMatcher matcher;
    std::vector<int64_t> cost(9, 1);
    EXPECT_THROW(matcher.solve(3, cost), std::invalid_argument);
}
