#include "lidann/lid.hpp"

#include <cmath>
#include <string>

#include "lidann/brute_force.hpp"
#include "lidann/dataset_io.hpp"
#include "lidann/parallel.hpp"

namespace lidann {

double mle_lid(const DistanceProfile& profile) {
    const auto& x = profile.distances;
    const double w = profile.w;
    if (x.size() < 2) throw UsageError("mle_lid: need at least 2 distances");
    if (!(w > 0.0)) throw UsageError("mle_lid: reference radius must be positive");
    double sum = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < prev) throw UsageError("mle_lid: distances not ascending");
        if (x[i] > w) throw UsageError("mle_lid: distance exceeds reference radius");
        if (x[i] == 0.0) throw DegenerateDistances("mle_lid: zero distance in profile");
        prev = x[i];
        sum += std::log(w / x[i]);
    }
    if (sum == 0.0) throw DegenerateDistances("mle_lid: all distances equal the radius");
    return static_cast<double>(x.size()) / sum;
}

BatchLidResult batch_lid(const VectorStore& subject, const VectorStore& base,
                         std::size_t k, std::size_t nthreads) {
    if (k < 2) throw UsageError("batch_lid: k must be at least 2");
    if (k > base.count()) throw UsageError("batch_lid: k exceeds base count");
    if (subject.dim() != base.dim()) throw UsageError("batch_lid: dimension mismatch");

    BatchLidResult out;
    out.values.assign(subject.count(), 0.0);
    out.ok.assign(subject.count(), 0);

    parallel_for(subject.count(), nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto nn = brute_force_knn(base, subject.row(i), k);
            DistanceProfile profile;
            profile.w = nn.back().dist;
            profile.distances.reserve(k);
            for (const auto& n : nn) {
                if (n.dist == 0.0f) continue;  // exact duplicate / self-match
                profile.distances.push_back(n.dist);
            }
            if (profile.distances.size() < 2) continue;  // recorded as failure
            try {
                out.values[i] = mle_lid(profile);
                out.ok[i] = 1;
            } catch (const DegenerateDistances&) {
            }
        }
    });
    for (auto flag : out.ok)
        if (!flag) ++out.failures;
    return out;
}

void save_lid_values(const BatchLidResult& result, const std::string& path) {
    VectorStore store(1, result.values.size());
    for (std::size_t i = 0; i < result.values.size(); ++i)
        store.row_mut(i)[0] = result.ok[i] ? static_cast<float>(result.values[i]) : -1.0f;
    write_vectors(store, path, VecFormat::F32);
}

}  // namespace lidann
