#include "lidann/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lidann {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; hand-rolled so streams are identical across standard libraries.
double gaussian(std::mt19937_64& rng) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Orthonormal basis of a random m-dimensional subspace of R^dim
// (Gaussian matrix + Gram-Schmidt), column-major: basis[c * dim + j].
std::vector<double> random_subspace(std::size_t dim, std::size_t m, std::mt19937_64& rng) {
    std::vector<double> basis(m * dim);
    for (auto& v : basis) v = gaussian(rng);
    for (std::size_t c = 0; c < m; ++c) {
        double* col = basis.data() + c * dim;
        for (std::size_t p = 0; p < c; ++p) {
            const double* prev = basis.data() + p * dim;
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += col[j] * prev[j];
            for (std::size_t j = 0; j < dim; ++j) col[j] -= dot * prev[j];
        }
        double norm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) norm += col[j] * col[j];
        norm = std::sqrt(norm);
        if (norm < 1e-12) {  // essentially impossible; re-draw the column
            for (std::size_t j = 0; j < dim; ++j) col[j] = gaussian(rng);
            --c;
            continue;
        }
        for (std::size_t j = 0; j < dim; ++j) col[j] /= norm;
    }
    return basis;
}

}  // namespace

VectorStore sample_uniform_ball(std::size_t n, std::size_t dim, std::uint64_t seed) {
    if (n == 0 || dim == 0) throw UsageError("sample_uniform_ball: empty request");
    VectorStore store(dim, n);
    std::mt19937_64 rng(seed);
    std::vector<double> direction(dim);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            direction[j] = gaussian(rng);
            norm += direction[j] * direction[j];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;
        // Radius with density proportional to r^(dim-1): U^(1/dim).
        const double r = std::pow(uniform01(rng), 1.0 / static_cast<double>(dim));
        auto row = store.row_mut(i);
        for (std::size_t j = 0; j < dim; ++j)
            row[j] = static_cast<float>(direction[j] / norm * r);
    }
    return store;
}

VectorStore make_clustered_descriptors(const ClusteredParams& p) {
    if (p.n == 0 || p.dim == 0 || p.clusters == 0)
        throw UsageError("make_clustered_descriptors: empty request");
    if (p.intrinsic_min < 1 || p.intrinsic_max < p.intrinsic_min || p.intrinsic_max > p.dim)
        throw UsageError("make_clustered_descriptors: bad intrinsic dimension range");

    std::mt19937_64 rng(p.seed);

    struct Cluster {
        std::vector<double> center;
        std::vector<double> basis;  // m columns of length dim
        std::size_t m;
        double scale;
    };
    std::vector<Cluster> clusters(p.clusters);
    const std::size_t span = p.intrinsic_max - p.intrinsic_min + 1;
    const double mid = 0.5 * (p.value_lo + p.value_hi);
    const double box = p.center_spread * (p.value_hi - p.value_lo);
    for (std::size_t c = 0; c < p.clusters; ++c) {
        auto& cl = clusters[c];
        cl.m = p.intrinsic_min + c % span;
        cl.scale = p.scale_min + uniform01(rng) * (p.scale_max - p.scale_min);
        cl.basis = random_subspace(p.dim, cl.m, rng);
    }
    // Centres walk from patch to patch with steps proportional to the patch
    // radii, so neighbouring patches overlap and the mixture forms one
    // navigable manifold instead of isolated islands.
    std::vector<double> direction(p.dim);
    for (std::size_t c = 0; c < p.clusters; ++c) {
        auto& cl = clusters[c];
        cl.center.resize(p.dim);
        if (c == 0) {
            for (auto& v : cl.center) v = mid;
            continue;
        }
        const Cluster& prev = clusters[c - 1];
        const double radius_prev =
            prev.scale * std::sqrt(static_cast<double>(prev.m));
        const double radius_cur = cl.scale * std::sqrt(static_cast<double>(cl.m));
        const double step = p.chain_step * (radius_prev + radius_cur);
        double norm = 0.0;
        for (std::size_t j = 0; j < p.dim; ++j) {
            direction[j] = gaussian(rng);
            norm += direction[j] * direction[j];
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < p.dim; ++j) {
            double v = prev.center[j] + direction[j] / norm * step;
            // Reflect drifting walks back toward the box around the midpoint.
            if (v < mid - box) v = mid - box + (mid - box - v);
            if (v > mid + box) v = mid + box - (v - mid - box);
            cl.center[j] = v;
        }
    }

    VectorStore store(p.dim, p.n);
    std::vector<double> point(p.dim);
    for (std::size_t i = 0; i < p.n; ++i) {
        const Cluster& cl = clusters[rng() % p.clusters];
        point = cl.center;
        for (std::size_t c = 0; c < cl.m; ++c) {
            const double z = gaussian(rng) * cl.scale;
            const double* col = cl.basis.data() + c * p.dim;
            for (std::size_t j = 0; j < p.dim; ++j) point[j] += z * col[j];
        }
        if (p.ambient_noise > 0.0)
            for (std::size_t j = 0; j < p.dim; ++j)
                point[j] += gaussian(rng) * p.ambient_noise;
        auto row = store.row_mut(i);
        for (std::size_t j = 0; j < p.dim; ++j) {
            double v = std::clamp(point[j], static_cast<double>(p.value_lo),
                                  static_cast<double>(p.value_hi));
            if (p.quantize) v = std::round(v);
            row[j] = static_cast<float>(v);
        }
    }
    return store;
}

}  // namespace lidann
