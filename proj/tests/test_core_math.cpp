#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lidann/brute_force.hpp"
#include "lidann/distance.hpp"
#include "lidann/topk.hpp"
#include "lidann/vector_store.hpp"

using namespace lidann;

namespace {

VectorStore random_store(std::size_t n, std::size_t dim, std::uint64_t seed) {
    VectorStore store(dim, n);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            store.row_mut(i)[j] = static_cast<float>(rng() % 20000) / 100.0f - 100.0f;
    return store;
}

// Independent quadratic-scan oracle: plain sequential accumulation, full sort.
std::vector<Neighbor> quadratic_knn(const VectorStore& store, std::span<const float> query,
                                    std::size_t k) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::size_t id = 0; id < store.count(); ++id) {
        double s = 0.0;
        for (std::size_t j = 0; j < store.dim(); ++j) {
            const double d = static_cast<double>(query[j]) - store.row(id)[j];
            s += d * d;
        }
        all.emplace_back(s, static_cast<std::uint32_t>(id));
    }
    std::sort(all.begin(), all.end());
    std::vector<Neighbor> out;
    for (std::size_t i = 0; i < k; ++i)
        out.push_back({all[i].second, static_cast<float>(std::sqrt(all[i].first))});
    return out;
}

}  // namespace

TEST(L2Distance, HandValues) {
    const std::vector<float> z{0.0f, 0.0f};
    EXPECT_DOUBLE_EQ(l2_distance(z, z), 0.0);

    const std::vector<float> a{0.0f, 0.0f}, b{3.0f, 4.0f};
    EXPECT_DOUBLE_EQ(l2_distance(a, b), 5.0);

    const std::vector<float> c{1.0f, 1.0f, 1.0f, 1.0f}, d{2.0f, 2.0f, 2.0f, 2.0f};
    EXPECT_DOUBLE_EQ(l2_distance(c, d), 2.0);
}

TEST(L2Distance, DimensionMismatch) {
    const std::vector<float> a{1.0f}, b{1.0f, 2.0f};
    EXPECT_THROW(l2_distance(a, b), UsageError);
}

TEST(L2Distance, Symmetry) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<float> a(13), b(13);
        for (auto& v : a) v = static_cast<float>(rng() % 1000) / 7.0f;
        for (auto& v : b) v = static_cast<float>(rng() % 1000) / 7.0f;
        EXPECT_EQ(l2_distance(a, b), l2_distance(b, a));
    }
}

TEST(L2Distance, TriangleInequality) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<float> a(8), b(8), c(8);
        for (auto& v : a) v = static_cast<float>(rng() % 2001) - 1000.0f;
        for (auto& v : b) v = static_cast<float>(rng() % 2001) - 1000.0f;
        for (auto& v : c) v = static_cast<float>(rng() % 2001) - 1000.0f;
        EXPECT_LE(l2_distance(a, c), l2_distance(a, b) + l2_distance(b, c) + 1e-9);
    }
}

TEST(BruteForce, SingleNearest) {
    VectorStore store(1, std::vector<float>{0.0f, 10.0f});
    const std::vector<float> q{1.0f};
    const auto nn = brute_force_knn(store, q, 1);
    ASSERT_EQ(nn.size(), 1u);
    EXPECT_EQ(nn[0].id, 0u);
    EXPECT_FLOAT_EQ(nn[0].dist, 1.0f);
}

TEST(BruteForce, TieBreaksBySmallerId) {
    VectorStore store(1, std::vector<float>{0.0f, 2.0f});
    const std::vector<float> q{1.0f};
    const auto nn = brute_force_knn(store, q, 2);
    ASSERT_EQ(nn.size(), 2u);
    EXPECT_EQ(nn[0].id, 0u);
    EXPECT_EQ(nn[1].id, 1u);
    EXPECT_FLOAT_EQ(nn[0].dist, 1.0f);
    EXPECT_FLOAT_EQ(nn[1].dist, 1.0f);
}

TEST(BruteForce, ErrorPaths) {
    VectorStore store(2, std::vector<float>{0.0f, 0.0f});
    const std::vector<float> q{0.0f, 0.0f};
    EXPECT_THROW(brute_force_knn(store, q, 2), UsageError);   // k > count
    EXPECT_THROW(brute_force_knn(store, q, 0), UsageError);
    VectorStore empty;
    EXPECT_THROW(brute_force_knn(empty, q, 1), UsageError);
}

TEST(BruteForce, MatchesQuadraticScan) {
    const auto store = random_store(1000, 16, 42);
    const auto queries = random_store(20, 16, 43);
    for (std::size_t qi = 0; qi < queries.count(); ++qi) {
        const auto got = brute_force_knn(store, queries.row(qi), 10);
        const auto want = quadratic_knn(store, queries.row(qi), 10);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].id, want[i].id) << "query " << qi << " rank " << i;
            EXPECT_NEAR(got[i].dist, want[i].dist, 1e-4f * (1.0f + want[i].dist));
        }
    }
}

TEST(BruteForce, DistancesNonDecreasing) {
    const auto store = random_store(500, 8, 5);
    const auto queries = random_store(10, 8, 6);
    for (std::size_t qi = 0; qi < queries.count(); ++qi) {
        const auto nn = brute_force_knn(store, queries.row(qi), 50);
        for (std::size_t i = 1; i < nn.size(); ++i) EXPECT_GE(nn[i].dist, nn[i - 1].dist);
    }
}

TEST(BruteForce, BatchMatchesSingleAtAnyThreadCount) {
    const auto store = random_store(300, 8, 9);
    const auto queries = random_store(17, 8, 10);
    const auto serial = brute_force_knn_batch(store, queries, 5, 1);
    const auto threaded = brute_force_knn_batch(store, queries, 5, 4);
    ASSERT_EQ(serial.size(), threaded.size());
    for (std::size_t q = 0; q < serial.size(); ++q) {
        ASSERT_EQ(serial[q].size(), threaded[q].size());
        for (std::size_t i = 0; i < serial[q].size(); ++i) {
            EXPECT_EQ(serial[q][i].id, threaded[q][i].id);
            EXPECT_EQ(serial[q][i].dist, threaded[q][i].dist);
        }
        const auto single = brute_force_knn(store, queries.row(q), 5);
        for (std::size_t i = 0; i < single.size(); ++i)
            EXPECT_EQ(serial[q][i].id, single[i].id);
    }
}

TEST(TopKHeap, PermutationInvariant) {
    std::mt19937_64 rng(17);
    std::vector<TopKHeap::Entry> items;
    for (std::uint32_t i = 0; i < 60; ++i)
        items.push_back({static_cast<double>(rng() % 25), i});  // plenty of ties

    auto run = [&](const std::vector<TopKHeap::Entry>& seq) {
        TopKHeap heap(10);
        for (const auto& e : seq) heap.push(e.dist, e.id);
        return heap.extract_sorted();
    };
    const auto baseline = run(items);
    for (int trial = 0; trial < 10; ++trial) {
        auto shuffled = items;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng() % i]);
        const auto got = run(shuffled);
        ASSERT_EQ(got.size(), baseline.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].id, baseline[i].id);
            EXPECT_EQ(got[i].dist, baseline[i].dist);
        }
    }
}

TEST(TopKHeap, KeepsKSmallestWithIdTies) {
    TopKHeap heap(3);
    heap.push(5.0, 1);
    heap.push(5.0, 0);
    heap.push(5.0, 2);
    heap.push(5.0, 3);
    heap.push(1.0, 9);
    const auto out = heap.extract_sorted();
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].id, 9u);
    EXPECT_EQ(out[1].id, 0u);  // ties resolved toward smaller ids
    EXPECT_EQ(out[2].id, 1u);
}

TEST(TopKHeap, RejectsZeroCapacity) { EXPECT_THROW(TopKHeap(0), UsageError); }
