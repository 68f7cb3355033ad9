#include "lidann/ivf_pq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "lidann/distance.hpp"
#include "lidann/parallel.hpp"
#include "lidann/topk.hpp"

namespace lidann {

IvfPqIndex ivf_build(const VectorStore& base, const IvfBuildParams& params) {
    if (params.nlist == 0 || params.nlist > base.count())
        throw UsageError("ivf_build: nlist out of range");

    IvfPqIndex index;
    index.dim = base.dim();
    index.nlist = params.nlist;
    index.coarse = kmeans_train(base, params.nlist, params.coarse_iters, params.seed,
                                params.nthreads);

    const std::size_t n = base.count();
    const std::size_t dim = base.dim();

    std::vector<std::uint32_t> assign(n);
    VectorStore residuals(dim, n);
    parallel_for(n, params.nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto v = base.row(i);
            const std::uint32_t c = nearest_centroid(index.coarse, v);
            assign[i] = c;
            const auto cen = index.coarse.centroid(c);
            auto r = residuals.row_mut(i);
            for (std::size_t j = 0; j < dim; ++j) r[j] = v[j] - cen[j];
        }
    });

    index.codebook = pq_train(residuals, params.m, params.ksub, params.seed + 1,
                              params.pq_iters, params.nthreads);

    std::vector<std::uint8_t> codes(n * params.m);
    parallel_for(n, params.nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            pq_encode(index.codebook, residuals.row(i),
                      {codes.data() + i * params.m, params.m});
    });

    index.list_ids.resize(params.nlist);
    index.list_codes.resize(params.nlist);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t c = assign[i];
        index.list_ids[c].push_back(static_cast<std::uint32_t>(i));
        index.list_codes[c].insert(index.list_codes[c].end(), codes.begin() + i * params.m,
                                   codes.begin() + (i + 1) * params.m);
    }
    return index;
}

AdcTable adc_table(const PqCodebook& cb, std::span<const float> residual) {
    if (residual.size() != cb.dim()) throw UsageError("adc_table: dimension mismatch");
    AdcTable table;
    table.m = cb.m;
    table.ksub = cb.ksub;
    table.t.resize(cb.m * cb.ksub);
    for (std::size_t j = 0; j < cb.m; ++j) {
        const float* sub = residual.data() + j * cb.dsub;
        for (std::size_t c = 0; c < cb.ksub; ++c) {
            table.t[j * cb.ksub + c] = static_cast<float>(
                detail::l2_sq_unchecked(sub, cb.centroid(j, c).data(), cb.dsub));
        }
    }
    return table;
}

std::vector<std::uint32_t> rank_clusters(const IvfPqIndex& index, std::span<const float> query) {
    if (query.size() != index.dim) throw UsageError("rank_clusters: dimension mismatch");
    std::vector<double> d(index.nlist);
    for (std::size_t c = 0; c < index.nlist; ++c)
        d[c] = detail::l2_sq_unchecked(query.data(), index.coarse.centroid(c).data(), index.dim);
    std::vector<std::uint32_t> order(index.nlist);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return d[a] < d[b] || (d[a] == d[b] && a < b);
    });
    return order;
}

IvfSearchResult ivf_search(const IvfPqIndex& index, std::span<const float> query,
                           std::size_t nprobe, std::size_t k) {
    if (nprobe == 0 || nprobe > index.nlist)
        throw UsageError("ivf_search: nprobe out of range");
    if (k == 0) throw UsageError("ivf_search: k must be positive");

    const auto order = rank_clusters(index, query);
    const std::size_t m = index.codebook.m;

    TopKHeap heap(k);
    IvfSearchStats stats;
    std::vector<float> residual(index.dim);

    for (std::size_t p = 0; p < nprobe; ++p) {
        const std::uint32_t c = order[p];
        ++stats.clusters_probed;
        const auto& ids = index.list_ids[c];
        if (ids.empty()) continue;

        const auto cen = index.coarse.centroid(c);
        for (std::size_t j = 0; j < index.dim; ++j) residual[j] = query[j] - cen[j];
        const AdcTable table = adc_table(index.codebook, residual);

        const std::uint8_t* codes = index.list_codes[c].data();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const std::uint8_t* code = codes + i * m;
            float est = 0.0f;
            for (std::size_t j = 0; j < m; ++j) est += table.lookup(j, code[j]);
            heap.push(static_cast<double>(est), ids[i]);
            ++stats.codes_scanned;
        }
    }

    IvfSearchResult out;
    out.stats = stats;
    auto entries = heap.extract_sorted();
    out.neighbors.resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        out.neighbors[i] = {entries[i].id, static_cast<float>(std::sqrt(entries[i].dist))};
    return out;
}

std::uint32_t label_min_nprobe(const IvfPqIndex& index, std::span<const float> query,
                               std::uint32_t gt_id) {
    std::uint32_t home = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t c = 0; c < index.nlist && home == std::numeric_limits<std::uint32_t>::max();
         ++c) {
        // Lists hold ascending ids by construction, so membership is a bisection.
        const auto& ids = index.list_ids[c];
        const auto it = std::lower_bound(ids.begin(), ids.end(), gt_id);
        if (it != ids.end() && *it == gt_id) home = static_cast<std::uint32_t>(c);
    }
    if (home == std::numeric_limits<std::uint32_t>::max())
        throw IndexCorruption("label_min_nprobe: id " + std::to_string(gt_id) +
                              " absent from every inverted list");
    const auto order = rank_clusters(index, query);
    for (std::size_t p = 0; p < order.size(); ++p)
        if (order[p] == home) return static_cast<std::uint32_t>(p + 1);
    throw IndexCorruption("label_min_nprobe: cluster ordering is not a permutation");
}

namespace {

constexpr char kIvfMagic[8] = {'L', 'A', 'N', 'N', 'I', 'V', 'F', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void ivf_save(const IvfPqIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write(kIvfMagic, sizeof(kIvfMagic));
    write_pod<std::uint64_t>(out, index.dim);
    write_pod<std::uint64_t>(out, index.nlist);
    write_pod<std::uint64_t>(out, index.codebook.m);
    write_pod<std::uint64_t>(out, index.codebook.ksub);
    out.write(reinterpret_cast<const char*>(index.coarse.centroids.data()),
              static_cast<std::streamsize>(index.coarse.centroids.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(index.codebook.centroids.data()),
              static_cast<std::streamsize>(index.codebook.centroids.size() * sizeof(float)));
    for (std::size_t c = 0; c < index.nlist; ++c) {
        write_pod<std::uint64_t>(out, index.list_ids[c].size());
        out.write(reinterpret_cast<const char*>(index.list_ids[c].data()),
                  static_cast<std::streamsize>(index.list_ids[c].size() * sizeof(std::uint32_t)));
        out.write(reinterpret_cast<const char*>(index.list_codes[c].data()),
                  static_cast<std::streamsize>(index.list_codes[c].size()));
    }
    if (!out) throw FormatError("write failure on '" + path + "'");
}

IvfPqIndex ivf_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kIvfMagic, sizeof(magic)) != 0)
        throw FormatError(path + ": not a quantization index file");

    IvfPqIndex index;
    std::uint64_t dim, nlist, m, ksub;
    read_pod(in, dim);
    read_pod(in, nlist);
    read_pod(in, m);
    read_pod(in, ksub);
    if (!in || dim == 0 || nlist == 0 || m == 0 || m > dim || dim % m != 0 || ksub == 0 ||
        ksub > 256)
        throw FormatError(path + ": corrupt header");

    index.dim = dim;
    index.nlist = nlist;
    index.coarse.k = nlist;
    index.coarse.dim = dim;
    index.coarse.centroids.resize(nlist * dim);
    in.read(reinterpret_cast<char*>(index.coarse.centroids.data()),
            static_cast<std::streamsize>(index.coarse.centroids.size() * sizeof(float)));

    index.codebook.m = m;
    index.codebook.dsub = dim / m;
    index.codebook.ksub = ksub;
    index.codebook.centroids.resize(m * ksub * index.codebook.dsub);
    in.read(reinterpret_cast<char*>(index.codebook.centroids.data()),
            static_cast<std::streamsize>(index.codebook.centroids.size() * sizeof(float)));

    index.list_ids.resize(nlist);
    index.list_codes.resize(nlist);
    for (std::size_t c = 0; c < nlist; ++c) {
        std::uint64_t len = 0;
        read_pod(in, len);
        if (!in) throw FormatError(path + ": truncated inverted list header");
        index.list_ids[c].resize(len);
        index.list_codes[c].resize(len * m);
        in.read(reinterpret_cast<char*>(index.list_ids[c].data()),
                static_cast<std::streamsize>(len * sizeof(std::uint32_t)));
        in.read(reinterpret_cast<char*>(index.list_codes[c].data()),
                static_cast<std::streamsize>(len * m));
        if (!in) throw FormatError(path + ": truncated inverted list payload");
    }
    return index;
}

}  // namespace lidann
