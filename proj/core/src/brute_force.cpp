#include "lidann/brute_force.hpp"

#include <cmath>
#include <string>

#include "lidann/distance.hpp"
#include "lidann/parallel.hpp"
#include "lidann/topk.hpp"

namespace lidann {

std::vector<Neighbor> brute_force_knn(const VectorStore& store,
                                      std::span<const float> query,
                                      std::size_t k) {
    if (store.count() == 0) throw UsageError("brute_force_knn: empty store");
    if (k == 0 || k > store.count())
        throw UsageError("brute_force_knn: k=" + std::to_string(k) +
                         " out of range for store of " + std::to_string(store.count()));
    if (query.size() != store.dim())
        throw UsageError("brute_force_knn: query dimension mismatch");

    TopKHeap heap(k);
    const float* base = store.data().data();
    const std::size_t dim = store.dim();
    for (std::size_t id = 0; id < store.count(); ++id) {
        const double d = detail::l2_sq_unchecked(query.data(), base + id * dim, dim);
        heap.push(d, static_cast<std::uint32_t>(id));
    }
    auto entries = heap.extract_sorted();
    std::vector<Neighbor> out(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        out[i] = {entries[i].id, static_cast<float>(std::sqrt(entries[i].dist))};
    return out;
}

std::vector<std::vector<Neighbor>> brute_force_knn_batch(const VectorStore& store,
                                                         const VectorStore& queries,
                                                         std::size_t k,
                                                         std::size_t nthreads) {
    if (queries.dim() != store.dim())
        throw UsageError("brute_force_knn_batch: dimension mismatch");
    std::vector<std::vector<Neighbor>> out(queries.count());
    parallel_for(queries.count(), nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q)
            out[q] = brute_force_knn(store, queries.row(q), k);
    });
    return out;
}

}  // namespace lidann
