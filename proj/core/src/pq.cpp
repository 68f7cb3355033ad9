#include "lidann/pq.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "lidann/distance.hpp"
#include "lidann/kmeans.hpp"

namespace lidann {

PqCodebook pq_train(const VectorStore& training, std::size_t m, std::size_t ksub,
                    std::uint64_t seed, std::size_t max_iters, std::size_t nthreads) {
    const std::size_t dim = training.dim();
    if (m == 0 || dim % m != 0)
        throw UsageError("pq_train: dimension " + std::to_string(dim) +
                         " is not divisible by m=" + std::to_string(m));
    if (ksub == 0 || ksub > 256)
        throw UsageError("pq_train: ksub must be in [1, 256] for byte codes");
    if (ksub > training.count())
        throw UsageError("pq_train: ksub exceeds training count");

    PqCodebook cb;
    cb.m = m;
    cb.dsub = dim / m;
    cb.ksub = ksub;
    cb.centroids.resize(m * ksub * cb.dsub);

    for (std::size_t j = 0; j < m; ++j) {
        VectorStore sub(cb.dsub, training.count());
        for (std::size_t i = 0; i < training.count(); ++i) {
            const auto row = training.row(i);
            std::copy_n(row.data() + j * cb.dsub, cb.dsub, sub.row_mut(i).data());
        }
        // Distinct seed per subspace keeps the initializations uncorrelated.
        const KMeansModel model = kmeans_train(sub, ksub, max_iters, seed + j, nthreads);
        std::copy(model.centroids.begin(), model.centroids.end(),
                  cb.centroids.begin() + j * ksub * cb.dsub);
    }
    return cb;
}

void pq_encode(const PqCodebook& cb, std::span<const float> v,
               std::span<std::uint8_t> code_out) {
    if (v.size() != cb.dim()) throw UsageError("pq_encode: dimension mismatch");
    if (code_out.size() != cb.m) throw UsageError("pq_encode: code buffer size mismatch");
    for (std::size_t j = 0; j < cb.m; ++j) {
        const float* sub = v.data() + j * cb.dsub;
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t c = 0; c < cb.ksub; ++c) {
            const double d = detail::l2_sq_unchecked(sub, cb.centroid(j, c).data(), cb.dsub);
            if (d < best) {  // strict: ties keep the lower centroid index
                best = d;
                arg = c;
            }
        }
        code_out[j] = static_cast<std::uint8_t>(arg);
    }
}

std::vector<float> pq_decode(const PqCodebook& cb, std::span<const std::uint8_t> code) {
    if (code.size() != cb.m) throw UsageError("pq_decode: code size mismatch");
    std::vector<float> out(cb.dim());
    for (std::size_t j = 0; j < cb.m; ++j) {
        const auto c = cb.centroid(j, code[j]);
        std::copy(c.begin(), c.end(), out.begin() + j * cb.dsub);
    }
    return out;
}

}  // namespace lidann
