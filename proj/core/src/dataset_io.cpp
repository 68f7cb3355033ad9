#include "lidann/dataset_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "lidann/brute_force.hpp"

namespace lidann {

namespace {

// All integer fields are little-endian on disk. x86 is little-endian; the
// byte-level round-trip tests pin the layout either way.
static_assert(sizeof(float) == 4);

std::uint32_t read_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::size_t component_size(VecFormat f) {
    switch (f) {
        case VecFormat::F32: return 4;
        case VecFormat::U8: return 1;
        case VecFormat::I32: return 4;
    }
    return 0;
}

}  // namespace

VecFormat format_from_extension(const std::string& path) {
    auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".fvecs") return VecFormat::F32;
    if (ext == ".bvecs") return VecFormat::U8;
    if (ext == ".ivecs") return VecFormat::I32;
    throw UsageError("cannot infer vector format from extension of '" + path + "'");
}

VectorStore read_vectors(const std::string& path, VecFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");

    const std::size_t csize = component_size(format);
    std::size_t dim = 0;
    std::vector<float> data;
    std::vector<unsigned char> raw;
    std::size_t record = 0;

    while (true) {
        const std::int32_t d = static_cast<std::int32_t>(read_u32le(in));
        if (in.eof()) break;
        if (!in) throw FormatError(path + ": truncated header at record " + std::to_string(record));
        if (d <= 0)
            throw FormatError(path + ": non-positive dimension " + std::to_string(d) +
                              " at record " + std::to_string(record));
        if (record == 0) {
            dim = static_cast<std::size_t>(d);
        } else if (static_cast<std::size_t>(d) != dim) {
            throw FormatError(path + ": inconsistent dimension " + std::to_string(d) +
                              " (expected " + std::to_string(dim) + ") at record " +
                              std::to_string(record));
        }
        raw.resize(dim * csize);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw FormatError(path + ": truncated record " + std::to_string(record));

        const std::size_t at = data.size();
        data.resize(at + dim);
        switch (format) {
            case VecFormat::F32: {
                std::memcpy(data.data() + at, raw.data(), dim * 4);
                break;
            }
            case VecFormat::U8: {
                for (std::size_t j = 0; j < dim; ++j)
                    data[at + j] = static_cast<float>(raw[j]);
                break;
            }
            case VecFormat::I32: {
                for (std::size_t j = 0; j < dim; ++j) {
                    std::int32_t v;
                    std::memcpy(&v, raw.data() + j * 4, 4);
                    data[at + j] = static_cast<float>(v);
                }
                break;
            }
        }
        ++record;
    }

    if (record == 0) throw FormatError(path + ": no records");
    VectorStore store(dim, std::move(data));
    store.check_finite();
    return store;
}

void write_vectors(const VectorStore& store, const std::string& path, VecFormat format) {
    if (store.count() == 0) throw UsageError("write_vectors: empty store");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");

    const std::size_t dim = store.dim();
    for (std::size_t i = 0; i < store.count(); ++i) {
        const auto row = store.row(i);
        write_u32le(out, static_cast<std::uint32_t>(dim));
        switch (format) {
            case VecFormat::F32: {
                out.write(reinterpret_cast<const char*>(row.data()),
                          static_cast<std::streamsize>(dim * 4));
                break;
            }
            case VecFormat::U8: {
                for (std::size_t j = 0; j < dim; ++j) {
                    const float v = row[j];
                    if (v < 0.0f || v > 255.0f || v != std::floor(v))
                        throw UsageError("write_vectors: component " + std::to_string(v) +
                                         " at row " + std::to_string(i) +
                                         " is not representable as u8");
                    const unsigned char b = static_cast<unsigned char>(v);
                    out.write(reinterpret_cast<const char*>(&b), 1);
                }
                break;
            }
            case VecFormat::I32: {
                for (std::size_t j = 0; j < dim; ++j) {
                    const float v = row[j];
                    if (v != std::floor(v) || v < -2147483648.0f || v > 2147483520.0f)
                        throw UsageError("write_vectors: component " + std::to_string(v) +
                                         " at row " + std::to_string(i) +
                                         " is not representable as i32");
                    write_u32le(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(v)));
                }
                break;
            }
        }
    }
    if (!out) throw FormatError("write failure on '" + path + "'");
}

SplitResult split_dataset(const VectorStore& base, const SplitSpec& spec) {
    const std::size_t n = base.count();
    if (spec.training_count + spec.query_count > n)
        throw UsageError("split_dataset: training_count + query_count exceeds base count");

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    if (spec.shuffle) {
        std::mt19937_64 rng(spec.seed);
        // Fisher-Yates; avoids std::shuffle so the permutation is identical
        // across standard library implementations.
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = rng() % i;
            std::swap(order[i - 1], order[j]);
        }
    }

    SplitResult out;
    auto take = [&](std::size_t begin, std::size_t end, VectorStore& dst,
                    std::vector<std::uint32_t>& ids) {
        if (end > begin) {
            dst = VectorStore(base.dim(), 0);
            dst.reserve_rows(end - begin);
            ids.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                dst.append(base.row(order[i]));
                ids.push_back(order[i]);
            }
        }
    };
    take(0, spec.training_count, out.training, out.training_original_ids);
    take(spec.training_count, spec.training_count + spec.query_count, out.queries,
         out.query_original_ids);
    take(spec.training_count + spec.query_count, n, out.new_base, out.base_original_ids);
    return out;
}

GroundTruthTable compute_ground_truth(const VectorStore& base, const VectorStore& queries,
                                      std::size_t g, std::size_t nthreads) {
    if (g == 0 || g > base.count())
        throw UsageError("compute_ground_truth: G out of range");
    GroundTruthTable table(g, queries.count());
    const auto hits = brute_force_knn_batch(base, queries, g, nthreads);
    for (std::size_t q = 0; q < queries.count(); ++q) {
        auto row = table.row_mut(q);
        std::copy(hits[q].begin(), hits[q].end(), row.begin());
    }
    return table;
}

void save_ground_truth(const GroundTruthTable& table, const std::string& ids_path,
                       const std::string& dist_path) {
    const std::size_t g = table.g();
    const std::size_t nq = table.query_count();
    VectorStore ids(g, nq);
    VectorStore dists(g, nq);
    for (std::size_t q = 0; q < nq; ++q) {
        const auto row = table.row(q);
        for (std::size_t j = 0; j < g; ++j) {
            ids.row_mut(q)[j] = static_cast<float>(row[j].id);
            dists.row_mut(q)[j] = row[j].dist;
        }
    }
    write_vectors(ids, ids_path, VecFormat::I32);
    write_vectors(dists, dist_path, VecFormat::F32);
}

GroundTruthTable load_ground_truth(const std::string& ids_path, const std::string& dist_path) {
    const VectorStore ids = read_vectors(ids_path, VecFormat::I32);
    const VectorStore dists = read_vectors(dist_path, VecFormat::F32);
    if (ids.dim() != dists.dim() || ids.count() != dists.count())
        throw FormatError("ground-truth id file and distance sidecar disagree: " + ids_path);
    GroundTruthTable table(ids.dim(), ids.count());
    for (std::size_t q = 0; q < ids.count(); ++q) {
        auto row = table.row_mut(q);
        for (std::size_t j = 0; j < ids.dim(); ++j) {
            row[j].id = static_cast<std::uint32_t>(ids.row(q)[j]);
            row[j].dist = dists.row(q)[j];
        }
    }
    return table;
}

GroundTruthTable compute_and_save_ground_truth(const VectorStore& base,
                                               const VectorStore& queries, std::size_t g,
                                               const std::string& ids_path,
                                               const std::string& dist_path,
                                               std::size_t nthreads) {
    GroundTruthTable table = compute_ground_truth(base, queries, g, nthreads);
    save_ground_truth(table, ids_path, dist_path);
    return table;
}

}  // namespace lidann
