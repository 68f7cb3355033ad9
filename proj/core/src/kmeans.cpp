#include "lidann/kmeans.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "lidann/distance.hpp"
#include "lidann/parallel.hpp"

namespace lidann {

namespace {

std::uint32_t nearest_of(const float* v, const float* centroids, std::size_t k,
                         std::size_t dim, double* best_out) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double d = detail::l2_sq_unchecked(v, centroids + c * dim, dim);
        if (d < best) {
            best = d;
            arg = static_cast<std::uint32_t>(c);
        }
    }
    if (best_out) *best_out = best;
    return arg;
}

}  // namespace

std::uint32_t nearest_centroid(const KMeansModel& model, std::span<const float> v) {
    if (v.size() != model.dim) throw UsageError("nearest_centroid: dimension mismatch");
    return nearest_of(v.data(), model.centroids.data(), model.k, model.dim, nullptr);
}

KMeansModel kmeans_train(const VectorStore& data, std::size_t k, std::size_t max_iters,
                         std::uint64_t seed, std::size_t nthreads) {
    const std::size_t n = data.count();
    const std::size_t dim = data.dim();
    if (k == 0 || k > n)
        throw UsageError("kmeans_train: k=" + std::to_string(k) + " out of range for " +
                         std::to_string(n) + " points");
    if (max_iters == 0) throw UsageError("kmeans_train: max_iters must be at least 1");

    KMeansModel model;
    model.k = k;
    model.dim = dim;
    model.centroids.resize(k * dim);

    // Seeded sample of k distinct point indices (partial Fisher-Yates).
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng() % (n - i);
        std::swap(pool[i], pool[j]);
        std::copy_n(data.row(pool[i]).data(), dim, model.centroids.data() + i * dim);
    }

    std::vector<std::uint32_t> assign(n, 0);
    std::vector<double> dists(n, 0.0);
    const float* points = data.data().data();

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::atomic<bool> any_changed{false};
        parallel_for(n, nthreads, [&](std::size_t begin, std::size_t end) {
            bool local = false;
            for (std::size_t i = begin; i < end; ++i) {
                const std::uint32_t c =
                    nearest_of(points + i * dim, model.centroids.data(), k, dim, &dists[i]);
                if (c != assign[i]) {
                    assign[i] = c;
                    local = true;
                }
            }
            if (local) any_changed.store(true, std::memory_order_relaxed);
        });
        bool changed = any_changed.load(std::memory_order_relaxed);

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += dists[i];
        model.distortion = total / static_cast<double>(n);
        model.distortion_history.push_back(model.distortion);

        if (!changed && iter > 0) break;

        // Centroid update in double, sequential for run-to-run determinism.
        std::vector<double> sums(k * dim, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = assign[i];
            const float* p = points + i * dim;
            double* s = sums.data() + c * dim;
            for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
            ++counts[c];
        }

        // Re-seed empty clusters with the farthest-assigned points, one each.
        std::vector<std::uint8_t> taken(n, 0);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            double far_d = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (dists[i] > far_d) {
                    far_d = dists[i];
                    far_i = i;
                }
            }
            taken[far_i] = 1;
            std::copy_n(points + far_i * dim, dim, model.centroids.data() + c * dim);
            changed = true;
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts[c]);
            float* dst = model.centroids.data() + c * dim;
            const double* s = sums.data() + c * dim;
            for (std::size_t j = 0; j < dim; ++j)
                dst[j] = static_cast<float>(s[j] * inv);
        }
    }

    // Final pass so distortion matches the returned centroids exactly.
    parallel_for(n, nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            nearest_of(points + i * dim, model.centroids.data(), k, dim, &dists[i]);
    });
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += dists[i];
    model.distortion = total / static_cast<double>(n);
    return model;
}

}  // namespace lidann
