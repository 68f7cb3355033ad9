#include "lidann/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>

#include "lidann/distance.hpp"

namespace lidann {

namespace {

struct Candidate {
    double dist;
    std::uint32_t id;
};

// Full ordering on (dist, id); resolves every tie deterministically.
inline bool closer(const Candidate& a, const Candidate& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
}

struct MinOrder {
    bool operator()(const Candidate& a, const Candidate& b) const { return closer(b, a); }
};
struct MaxOrder {
    bool operator()(const Candidate& a, const Candidate& b) const { return closer(a, b); }
};

using MinHeap = std::priority_queue<Candidate, std::vector<Candidate>, MinOrder>;
using MaxHeap = std::priority_queue<Candidate, std::vector<Candidate>, MaxOrder>;

// Epoch-stamped visited markers, one buffer per thread. A fresh epoch per
// beam invocation makes the buffer reusable across graphs and queries.
struct VisitedSet {
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;

    void begin(std::size_t n) {
        if (stamp.size() < n) stamp.resize(n, 0);
        if (++epoch == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch = 1;
        }
    }
    bool test_and_set(std::uint32_t id) {
        if (stamp[id] == epoch) return true;
        stamp[id] = epoch;
        return false;
    }
};

thread_local VisitedSet tls_visited;

}  // namespace

struct HnswSearcher {
    const HnswGraph& g;
    const float* query;
    std::size_t dim;
    SearchStats stats;

    // Labeling state.
    std::uint32_t watch_id = std::numeric_limits<std::uint32_t>::max();
    bool watch_hit = false;
    std::uint64_t watch_ndis = 0;

    double distance_to(std::uint32_t id) {
        ++stats.ndis;
        return detail::l2_sq_unchecked(query, g.base().data().data() + id * dim, dim);
    }

    // Beam-1 walk used for the upper levels: move to the best neighbor until
    // no neighbor improves on the current vertex. The budget check sits after
    // each vertex scan, same placement as in the bottom layer; a true return
    // in .second means the budget ran out mid-descent.
    template <bool Budgeted>
    std::pair<Candidate, bool> greedy_descent(Candidate entry, int from_level, int to_level,
                                              std::uint64_t budget) {
        Candidate cur = entry;
        for (int level = from_level; level > to_level; --level) {
            bool moved = true;
            while (moved) {
                moved = false;
                for (std::uint32_t nb : g.neighbors(level, cur.id)) {
                    const Candidate cand{distance_to(nb), nb};
                    if (closer(cand, cur)) {
                        cur = cand;
                        moved = true;
                    }
                }
                if (Budgeted && stats.ndis > budget) return {cur, true};
            }
        }
        return {cur, false};
    }

    // Bottom-layer beam. Watching reports the ndis count at the moment the
    // watched id enters the result heap and stops the walk at the next check
    // point; the budget check sits after each vertex's neighbor loop, so a
    // budgeted run replays this exact traversal.
    template <bool Budgeted, bool Watch>
    std::vector<Candidate> beam(Candidate entry, int level, std::size_t ef,
                                std::uint64_t budget) {
        VisitedSet& visited = tls_visited;
        visited.begin(g.count());
        visited.test_and_set(entry.id);

        MinHeap frontier;
        MaxHeap results;
        frontier.push(entry);
        results.push(entry);
        if (Watch && entry.id == watch_id && !watch_hit) {
            watch_hit = true;
            watch_ndis = stats.ndis;
        }

        while (!frontier.empty()) {
            const Candidate cur = frontier.top();
            if (results.size() == ef && closer(results.top(), cur)) break;
            frontier.pop();
            ++stats.hops;

            for (std::uint32_t nb : g.neighbors(level, cur.id)) {
                if (visited.test_and_set(nb)) continue;
                const Candidate cand{distance_to(nb), nb};
                if (results.size() < ef || closer(cand, results.top())) {
                    frontier.push(cand);
                    results.push(cand);
                    if (results.size() > ef) results.pop();
                    if (Watch && nb == watch_id && !watch_hit) {
                        watch_hit = true;
                        watch_ndis = stats.ndis;
                    }
                }
            }
            if (Budgeted && stats.ndis > budget) break;
            if (Watch && watch_hit) break;
        }

        std::vector<Candidate> out(results.size());
        for (std::size_t i = out.size(); i-- > 0;) {
            out[i] = results.top();
            results.pop();
        }
        return out;
    }
};

HnswGraph::HnswGraph(std::shared_ptr<const VectorStore> base, HnswParams params)
    : base_(std::move(base)), params_(params) {
    if (!base_ || base_->count() == 0) throw UsageError("hnsw: base store is empty");
    if (params_.M < 2) throw UsageError("hnsw: M must be at least 2");
    if (params_.ef_construction == 0)
        throw UsageError("hnsw: ef_construction must be positive");
    level_mult_ = 1.0 / std::log(static_cast<double>(params_.M));
}

std::size_t HnswGraph::total_edges() const {
    std::size_t n = 0;
    for (const auto& level : adjacency_)
        for (const auto& l : level) n += l.size();
    return n;
}

void HnswGraph::insert(std::uint32_t id, std::mt19937_64& rng) {
    // u in (0, 1]: shift to 53 usable bits, then offset by one ulp.
    const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    const int level = static_cast<int>(std::floor(-std::log(u) * level_mult_));

    while (static_cast<int>(adjacency_.size()) <= level)
        adjacency_.emplace_back(base_->count());
    levels_[id] = level;

    if (max_level_ < 0) {  // first node
        entry_ = id;
        max_level_ = level;
        return;
    }

    HnswSearcher searcher{*this, base_->row(id).data(), base_->dim(), {}};
    Candidate cur{searcher.distance_to(entry_), entry_};
    cur = searcher.greedy_descent<false>(cur, max_level_, std::min(level, max_level_), 0).first;

    for (int lev = std::min(level, max_level_); lev >= 0; --lev) {
        auto candidates =
            searcher.beam<false, false>(cur, lev, params_.ef_construction, 0);
        cur = candidates.front();

        const std::size_t want = std::min(params_.M, candidates.size());
        for (std::size_t i = 0; i < want; ++i) {
            const std::uint32_t nb = candidates[i].id;
            adjacency_[lev][id].push_back(nb);
            auto& back = adjacency_[lev][nb];
            back.push_back(id);
            const std::size_t cap = max_degree(lev);
            if (back.size() > cap) {
                // Keep the cap closest to the owning node.
                std::vector<Candidate> scored;
                scored.reserve(back.size());
                const float* owner = base_->row(nb).data();
                for (std::uint32_t e : back)
                    scored.push_back(
                        {detail::l2_sq_unchecked(owner, base_->row(e).data(), base_->dim()), e});
                std::sort(scored.begin(), scored.end(), closer);
                back.clear();
                for (std::size_t j = 0; j < cap; ++j) back.push_back(scored[j].id);
            }
        }
    }

    if (level > max_level_) {
        max_level_ = level;
        entry_ = id;
    }
}

HnswGraph hnsw_build(std::shared_ptr<const VectorStore> base, HnswParams params) {
    HnswGraph graph(std::move(base), params);
    const std::size_t n = graph.base_->count();
    graph.levels_.assign(n, 0);
    std::mt19937_64 rng(params.seed);
    // Insertion order is the id order; construction stays sequential so the
    // same seed always yields the same adjacency.
    for (std::size_t i = 0; i < n; ++i) graph.insert(static_cast<std::uint32_t>(i), rng);
    return graph;
}

namespace {

HnswSearchResult finish_search(HnswSearcher& searcher, std::vector<Candidate> found,
                               std::size_t k) {
    HnswSearchResult out;
    out.stats = searcher.stats;
    const std::size_t n = std::min(k, found.size());
    out.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.neighbors[i] = {found[i].id, static_cast<float>(std::sqrt(found[i].dist))};
    return out;
}

}  // namespace

HnswSearchResult hnsw_search_fixed(const HnswGraph& graph, std::span<const float> query,
                                   std::size_t k, std::size_t ef_search) {
    if (k == 0) throw UsageError("hnsw_search_fixed: k must be positive");
    if (ef_search < k) throw UsageError("hnsw_search_fixed: efSearch must be >= k");
    if (query.size() != graph.base().dim())
        throw UsageError("hnsw_search_fixed: query dimension mismatch");

    HnswSearcher searcher{graph, query.data(), query.size(), {}};
    Candidate entry{searcher.distance_to(graph.entry_point()), graph.entry_point()};
    entry = searcher.greedy_descent<false>(entry, graph.max_level(), 0, 0).first;
    auto found = searcher.beam<false, false>(entry, 0, ef_search, 0);
    return finish_search(searcher, std::move(found), k);
}

HnswSearchResult hnsw_search_adaptive(const HnswGraph& graph, std::span<const float> query,
                                      std::size_t k, SearchBudget budget) {
    if (k == 0) throw UsageError("hnsw_search_adaptive: k must be positive");
    if (budget.bounded && budget.max_ndis == 0)
        throw UsageError("hnsw_search_adaptive: bounded budget must be at least 1");
    if (query.size() != graph.base().dim())
        throw UsageError("hnsw_search_adaptive: query dimension mismatch");

    // The working beam never binds: the result heap spans the whole graph,
    // so the budget (or frontier exhaustion) is the only stopping criterion.
    const std::size_t ef = std::max(k, graph.count());
    HnswSearcher searcher{graph, query.data(), query.size(), {}};
    Candidate entry{searcher.distance_to(graph.entry_point()), graph.entry_point()};
    if (budget.bounded) {
        const auto [cur, exhausted] =
            searcher.greedy_descent<true>(entry, graph.max_level(), 0, budget.max_ndis);
        if (exhausted) {
            // Budget ran out on the entry path: the best vertex seen so far
            // is still a valid (floor) answer.
            return finish_search(searcher, {cur}, k);
        }
        auto found = searcher.beam<true, false>(cur, 0, ef, budget.max_ndis);
        return finish_search(searcher, std::move(found), k);
    }
    entry = searcher.greedy_descent<false>(entry, graph.max_level(), 0, 0).first;
    auto found = searcher.beam<false, false>(entry, 0, ef, 0);
    return finish_search(searcher, std::move(found), k);
}

MinCostLabel label_min_ndis(const HnswGraph& graph, std::span<const float> query,
                            std::uint32_t gt_id, std::uint64_t cap) {
    if (gt_id >= graph.count()) throw UsageError("label_min_ndis: invalid ground-truth id");
    if (query.size() != graph.base().dim())
        throw UsageError("label_min_ndis: query dimension mismatch");
    if (cap == 0) {
        const std::size_t avg_degree =
            std::max<std::size_t>(1, graph.total_edges() / graph.count());
        cap = static_cast<std::uint64_t>(graph.count()) * avg_degree;
    }

    HnswSearcher searcher{graph, query.data(), query.size(), {}};
    searcher.watch_id = gt_id;
    Candidate entry{searcher.distance_to(graph.entry_point()), graph.entry_point()};
    const auto [cur, exhausted] =
        searcher.greedy_descent<true>(entry, graph.max_level(), 0, cap);
    if (!exhausted) searcher.beam<true, true>(cur, 0, graph.count(), cap);

    MinCostLabel label;
    label.reached = searcher.watch_hit;
    label.ndis = searcher.watch_ndis;
    return label;
}

namespace {

constexpr char kHnswMagic[8] = {'L', 'A', 'N', 'N', 'H', 'N', 'S', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void hnsw_save(const HnswGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write(kHnswMagic, sizeof(kHnswMagic));
    write_pod<std::uint64_t>(out, graph.base_->dim());
    write_pod<std::uint64_t>(out, graph.params_.M);
    write_pod<std::uint64_t>(out, graph.params_.ef_construction);
    write_pod<std::uint64_t>(out, graph.params_.seed);
    write_pod<std::uint64_t>(out, graph.count());
    write_pod<std::int32_t>(out, graph.max_level_);
    write_pod<std::uint32_t>(out, graph.entry_);
    for (std::size_t i = 0; i < graph.count(); ++i)
        write_pod<std::int32_t>(out, graph.levels_[i]);
    for (int lev = 0; lev <= graph.max_level_; ++lev) {
        for (std::size_t i = 0; i < graph.count(); ++i) {
            if (graph.levels_[i] < lev) continue;
            const auto& l = graph.adjacency_[lev][i];
            write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.size()));
            out.write(reinterpret_cast<const char*>(l.data()),
                      static_cast<std::streamsize>(l.size() * sizeof(std::uint32_t)));
        }
    }
    if (!out) throw FormatError("write failure on '" + path + "'");
}

HnswGraph hnsw_load(const std::string& path, std::shared_ptr<const VectorStore> base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kHnswMagic, sizeof(magic)) != 0)
        throw FormatError(path + ": not a graph index file");

    std::uint64_t dim, m, efc, seed, count;
    std::int32_t max_level;
    std::uint32_t entry;
    read_pod(in, dim);
    read_pod(in, m);
    read_pod(in, efc);
    read_pod(in, seed);
    read_pod(in, count);
    read_pod(in, max_level);
    read_pod(in, entry);
    if (!in) throw FormatError(path + ": truncated header");
    if (!base || base->dim() != dim || base->count() != count)
        throw UsageError(path + ": base store does not match the serialized graph");

    HnswParams params{static_cast<std::size_t>(m), static_cast<std::size_t>(efc), seed};
    HnswGraph graph(std::move(base), params);
    graph.max_level_ = max_level;
    graph.entry_ = entry;
    graph.levels_.resize(count);
    for (std::size_t i = 0; i < count; ++i) read_pod(in, graph.levels_[i]);
    graph.adjacency_.assign(max_level + 1,
                            std::vector<std::vector<std::uint32_t>>(count));
    for (int lev = 0; lev <= max_level; ++lev) {
        for (std::size_t i = 0; i < count; ++i) {
            if (graph.levels_[i] < lev) continue;
            std::uint32_t len = 0;
            read_pod(in, len);
            if (!in) throw FormatError(path + ": truncated adjacency");
            auto& l = graph.adjacency_[lev][i];
            l.resize(len);
            in.read(reinterpret_cast<char*>(l.data()),
                    static_cast<std::streamsize>(len * sizeof(std::uint32_t)));
            if (!in) throw FormatError(path + ": truncated adjacency payload");
        }
    }
    return graph;
}

}  // namespace lidann
