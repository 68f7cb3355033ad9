#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lidann/vector_store.hpp"

namespace lidann {

struct HnswParams {
    std::size_t M = 16;                // max neighbors per node per level (level 0: 2M)
    std::size_t ef_construction = 200; // build beam width
    std::uint64_t seed = 0;
};

/// Multi-layer proximity graph over a fixed vector store. Immutable after
/// construction; concurrent searches are safe.
class HnswGraph {
public:
    HnswGraph(std::shared_ptr<const VectorStore> base, HnswParams params);

    const VectorStore& base() const { return *base_; }
    std::shared_ptr<const VectorStore> base_ptr() const { return base_; }
    const HnswParams& params() const { return params_; }

    std::size_t count() const { return levels_.size(); }
    int max_level() const { return max_level_; }
    std::uint32_t entry_point() const { return entry_; }
    int node_level(std::uint32_t id) const { return levels_[id]; }

    std::span<const std::uint32_t> neighbors(int level, std::uint32_t id) const {
        const auto& l = adjacency_[level][id];
        return {l.data(), l.size()};
    }

    std::size_t max_degree(int level) const { return level == 0 ? 2 * params_.M : params_.M; }

    /// Directed edge count over all levels.
    std::size_t total_edges() const;

    friend HnswGraph hnsw_build(std::shared_ptr<const VectorStore> base, HnswParams params);
    friend void hnsw_save(const HnswGraph& graph, const std::string& path);
    friend HnswGraph hnsw_load(const std::string& path, std::shared_ptr<const VectorStore> base);

private:
    std::shared_ptr<const VectorStore> base_;
    HnswParams params_;
    double level_mult_;  // 1 / ln(M)
    std::vector<int> levels_;
    // adjacency_[level][node] -> neighbor ids; nodes below `level` keep empty lists.
    std::vector<std::vector<std::vector<std::uint32_t>>> adjacency_;
    std::uint32_t entry_ = 0;
    int max_level_ = -1;

    void insert(std::uint32_t id, std::mt19937_64& rng);
    // Defined in hnsw.cpp.
    friend struct HnswSearcher;
};

/// Sequential seeded construction: node levels follow floor(-ln(u) / ln(M));
/// per level a beam of width ef_construction proposes candidates and the M
/// closest become neighbors, with overflowing lists trimmed back to the
/// closest entries.
HnswGraph hnsw_build(std::shared_ptr<const VectorStore> base, HnswParams params);

/// Cap on distance evaluations for the adaptive search.
struct SearchBudget {
    bool bounded = false;
    std::uint64_t max_ndis = 0;

    static SearchBudget unbounded() { return {false, 0}; }
    static SearchBudget capped(std::uint64_t n) { return {true, n}; }
};

struct SearchStats {
    std::uint64_t ndis = 0;  // every query-to-vector distance evaluation
    std::uint64_t hops = 0;  // vertices expanded in the bottom-layer beam
};

struct HnswSearchResult {
    std::vector<Neighbor> neighbors;  // ascending distance, ties by id
    SearchStats stats;
};

/// Greedy descent through the upper levels, then a bottom-layer beam of
/// width efSearch. Distance evaluations at every level count toward ndis.
HnswSearchResult hnsw_search_fixed(const HnswGraph& graph, std::span<const float> query,
                                   std::size_t k, std::size_t ef_search);

/// Same traversal with a working beam wide enough never to bind, so the
/// budget is the only stopping criterion: after each vertex's neighbor loop
/// the search stops once ndis exceeds the budget. A tiny budget still
/// returns the best candidates seen on the entry path; an unbounded budget
/// reproduces hnsw_search_fixed at efSearch saturated to the graph size.
HnswSearchResult hnsw_search_adaptive(const HnswGraph& graph, std::span<const float> query,
                                      std::size_t k, SearchBudget budget);

struct MinCostLabel {
    bool reached = false;
    std::uint64_t ndis = 0;  // evaluations spent when the target entered the result heap
};

/// Replays the adaptive traversal unbounded and records ndis at the moment
/// gt_id first enters the result heap. Not reached means the traversal
/// finished (or hit `cap`) without ever admitting the target; cap = 0 uses
/// graph size x average degree.
MinCostLabel label_min_ndis(const HnswGraph& graph, std::span<const float> query,
                            std::uint32_t gt_id, std::uint64_t cap = 0);

void hnsw_save(const HnswGraph& graph, const std::string& path);
/// The file stores only the graph structure; the caller supplies the same
/// base store the graph was built over.
HnswGraph hnsw_load(const std::string& path, std::shared_ptr<const VectorStore> base);

}  // namespace lidann
