#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lidann/kmeans.hpp"
#include "lidann/pq.hpp"
#include "lidann/vector_store.hpp"

namespace lidann {

/// Two-level quantization index: a coarse k-means partition whose inverted
/// lists hold product-quantized residuals (vector minus its coarse centroid).
struct IvfPqIndex {
    std::size_t dim = 0;
    std::size_t nlist = 0;
    KMeansModel coarse;                                // nlist centroids
    PqCodebook codebook;                               // trained on residuals
    std::vector<std::vector<std::uint32_t>> list_ids;  // per cluster
    std::vector<std::vector<std::uint8_t>> list_codes; // per cluster, m bytes per id

    std::size_t total_codes() const {
        std::size_t n = 0;
        for (const auto& l : list_ids) n += l.size();
        return n;
    }
};

struct IvfBuildParams {
    std::size_t nlist = 1024;
    std::size_t m = 8;
    std::size_t ksub = 256;
    std::uint64_t seed = 0;
    std::size_t coarse_iters = 25;
    std::size_t pq_iters = 25;
    std::size_t nthreads = 0;
};

IvfPqIndex ivf_build(const VectorStore& base, const IvfBuildParams& params);

/// Per-query lookup table of squared partial distances between the query
/// residual and every subspace centroid; summing m entries reproduces the
/// squared distance to the decoded code.
struct AdcTable {
    std::size_t m = 0;
    std::size_t ksub = 0;
    std::vector<float> t;  // m x ksub

    float lookup(std::size_t subspace, std::uint8_t code) const {
        return t[subspace * ksub + code];
    }
};

AdcTable adc_table(const PqCodebook& codebook, std::span<const float> residual);

/// Coarse centroid indices in ascending distance-to-query order
/// (ties toward the smaller index).
std::vector<std::uint32_t> rank_clusters(const IvfPqIndex& index, std::span<const float> query);

struct IvfSearchStats {
    std::uint32_t clusters_probed = 0;
    std::uint64_t codes_scanned = 0;
};

struct IvfSearchResult {
    std::vector<Neighbor> neighbors;  // dist = sqrt of the ADC estimate
    IvfSearchStats stats;
};

/// Scans the nprobe nearest clusters with one ADC table per cluster and
/// keeps the k best codes by estimated distance (ties to the smaller id).
IvfSearchResult ivf_search(const IvfPqIndex& index, std::span<const float> query,
                           std::size_t nprobe, std::size_t k);

/// 1-based rank of the cluster containing gt_id in this query's cluster
/// ordering: the smallest nprobe whose probed set covers the ground truth.
std::uint32_t label_min_nprobe(const IvfPqIndex& index, std::span<const float> query,
                               std::uint32_t gt_id);

void ivf_save(const IvfPqIndex& index, const std::string& path);
IvfPqIndex ivf_load(const std::string& path);

}  // namespace lidann
