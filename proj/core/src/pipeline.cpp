#include "lidann/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lidann/brute_force.hpp"
#include "lidann/lid.hpp"
#include "lidann/parallel.hpp"

namespace lidann {

namespace {

struct RawLabel {
    bool reached = false;
    bool lid_ok = false;
    double lid = 0.0;
    std::uint64_t cost = 0;
};

// Shared labeling scaffold: the per-vector exhaustive scan feeds both the
// intrinsic-dimension profile and the ground-truth id handed to `labeler`.
template <typename Labeler>
LabeledData label_all(const VectorStore& base, const VectorStore& training,
                      std::size_t k_lid, std::size_t nthreads, CostKind kind,
                      Labeler&& labeler) {
    if (training.count() == 0) throw UsageError("generate_training_data: empty training set");
    if (k_lid < 2 || k_lid > base.count())
        throw UsageError("generate_training_data: k_lid out of range");

    std::vector<RawLabel> raw(training.count());
    parallel_for(training.count(), nthreads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto nn = brute_force_knn(base, training.row(i), k_lid);
            DistanceProfile profile;
            profile.w = nn.back().dist;
            for (const auto& n : nn)
                if (n.dist != 0.0f) profile.distances.push_back(n.dist);
            if (profile.distances.size() >= 2) {
                try {
                    raw[i].lid = mle_lid(profile);
                    raw[i].lid_ok = true;
                } catch (const DegenerateDistances&) {
                }
            }
            if (raw[i].lid_ok) {
                const auto label = labeler(training.row(i), nn.front().id);
                raw[i].reached = label.first;
                raw[i].cost = label.second;
            }
        }
    });

    LabeledData out;
    out.cost_kind = kind;
    out.vectors = VectorStore(training.dim(), 0);
    for (std::size_t i = 0; i < training.count(); ++i) {
        if (!raw[i].lid_ok) {
            ++out.dropped_degenerate;
            continue;
        }
        if (!raw[i].reached) {
            ++out.dropped_not_reached;
            continue;
        }
        TrainingRow row;
        row.id = static_cast<std::uint32_t>(i);
        row.lid_true = raw[i].lid;
        row.min_cost = std::max<std::uint64_t>(raw[i].cost, 1);
        row.target = std::log2(static_cast<double>(row.min_cost));
        out.rows.push_back(row);
        out.vectors.append(training.row(i));
    }
    if (out.rows.empty())
        throw PipelineError("generate_training_data: every row was dropped");
    return out;
}

MlpDataset to_dataset(const LabeledData& data, bool target_is_lid) {
    MlpDataset ds;
    ds.dim = data.vectors.dim();
    ds.inputs.reserve(data.rows.size() * ds.dim);
    ds.targets.reserve(data.rows.size());
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto row = data.vectors.row(i);
        for (float v : row) ds.inputs.push_back(v);
        ds.targets.push_back(target_is_lid ? data.rows[i].lid_true : data.rows[i].target);
    }
    return ds;
}

RegressionReport evaluate(const MlpWeights& net, const MlpDataset& holdout) {
    RegressionReport rep;
    rep.n = holdout.count();
    if (rep.n == 0) return rep;
    double abs_sum = 0.0, sq_sum = 0.0, mean_y = 0.0;
    std::vector<double> preds(rep.n);
    for (std::size_t i = 0; i < rep.n; ++i) {
        preds[i] = mlp_forward(net, holdout.row(i));
        mean_y += holdout.targets[i];
    }
    mean_y /= static_cast<double>(rep.n);
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < rep.n; ++i) {
        const double err = preds[i] - holdout.targets[i];
        abs_sum += std::fabs(err);
        sq_sum += err * err;
        const double c = holdout.targets[i] - mean_y;
        ss_tot += c * c;
    }
    rep.mae = abs_sum / static_cast<double>(rep.n);
    rep.rmse = std::sqrt(sq_sum / static_cast<double>(rep.n));
    rep.r2 = ss_tot > 0.0 ? 1.0 - sq_sum / ss_tot : 0.0;
    return rep;
}

// Seeded holdout split over a standardized dataset.
void split_holdout(const MlpDataset& all, double fraction, std::uint64_t seed,
                   MlpDataset& train, MlpDataset& holdout) {
    const std::size_t n = all.count();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbull);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng() % i;
        std::swap(order[i - 1], order[j]);
    }
    std::size_t n_hold = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    if (n_hold >= n) n_hold = n - 1;  // always keep something to train on
    train.dim = holdout.dim = all.dim;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = i < n_hold ? holdout : train;
        dst.append(all.row(order[i]), all.targets[order[i]]);
    }
}

}  // namespace

LabeledData generate_training_data(const HnswGraph& graph, const VectorStore& base,
                                   const VectorStore& training, std::size_t k_lid,
                                   std::size_t nthreads) {
    return label_all(base, training, k_lid, nthreads, CostKind::DistanceEvals,
                     [&](std::span<const float> v, std::uint32_t gt) {
                         const MinCostLabel label = label_min_ndis(graph, v, gt);
                         return std::make_pair(label.reached, label.ndis);
                     });
}

LabeledData generate_training_data(const IvfPqIndex& index, const VectorStore& base,
                                   const VectorStore& training, std::size_t k_lid,
                                   std::size_t nthreads) {
    return label_all(base, training, k_lid, nthreads, CostKind::Nprobe,
                     [&](std::span<const float> v, std::uint32_t gt) {
                         const std::uint32_t rank = label_min_nprobe(index, v, gt);
                         return std::make_pair(true, static_cast<std::uint64_t>(rank));
                     });
}

std::size_t default_batch_size(std::size_t rows) {
    const std::size_t scaled = std::clamp<std::size_t>(rows / 20, 200, 1000);
    return std::min(scaled, rows);
}

Stage1Result train_stage1(const LabeledData& data, TrainConfig config,
                          double holdout_fraction) {
    if (data.rows.size() < 2) throw UsageError("train_stage1: need at least 2 rows");
    MlpDataset all = to_dataset(data, /*target_is_lid=*/true);

    Stage1Result result;
    result.input_std = Standardizer::fit(all);
    for (std::size_t i = 0; i < all.count(); ++i)
        result.input_std.apply({all.inputs.data() + i * all.dim, all.dim});

    MlpDataset train, holdout;
    split_holdout(all, holdout_fraction, config.seed, train, holdout);

    if (config.epochs == 0) config.epochs = 200;
    if (config.batch_size == 0) config.batch_size = default_batch_size(train.count());
    config.batch_size = std::min(config.batch_size, train.count());
    MlpSpec spec{{all.dim, 200, 200, 1}};
    result.net = mlp_train(spec, train, config);
    result.holdout = evaluate(result.net, holdout);
    return result;
}

MlpWeights train_stage2(const LabeledData& data, TrainConfig config) {
    if (data.rows.size() < 2) throw UsageError("train_stage2: need at least 2 rows");
    MlpDataset ds;
    ds.dim = 1;
    for (const auto& row : data.rows) {
        ds.inputs.push_back(row.lid_true);
        ds.targets.push_back(row.target);
    }
    if (config.epochs == 0) config.epochs = 20;  // the second stage trains briefly
    if (config.batch_size == 0) config.batch_size = default_batch_size(ds.count());
    config.batch_size = std::min(config.batch_size, ds.count());
    MlpSpec spec{{1, 10, 10, 1}};
    return mlp_train(spec, ds, config);
}

VoResult train_vo(const LabeledData& data, TrainConfig config) {
    if (data.rows.size() < 2) throw UsageError("train_vo: need at least 2 rows");
    MlpDataset all = to_dataset(data, /*target_is_lid=*/false);

    VoResult result;
    result.model.cost_kind = data.cost_kind;
    result.model.thresh = default_thresh(data.rows);
    result.model.input_std = Standardizer::fit(all);
    for (std::size_t i = 0; i < all.count(); ++i)
        result.model.input_std.apply({all.inputs.data() + i * all.dim, all.dim});

    MlpDataset train, holdout;
    split_holdout(all, 0.1, config.seed, train, holdout);

    if (config.epochs == 0) config.epochs = 200;
    if (config.batch_size == 0) config.batch_size = default_batch_size(train.count());
    config.batch_size = std::min(config.batch_size, train.count());
    MlpSpec spec{{all.dim, 200, 200, 1, 10, 10, 1}};
    result.model.net = mlp_train(spec, train, config);
    result.holdout = evaluate(result.model.net, holdout);
    return result;
}

std::uint64_t default_thresh(const std::vector<TrainingRow>& rows) {
    if (rows.empty()) return 1;
    std::vector<std::uint64_t> costs;
    costs.reserve(rows.size());
    for (const auto& r : rows) costs.push_back(r.min_cost);
    std::sort(costs.begin(), costs.end());
    const std::size_t idx =
        static_cast<std::size_t>(0.05 * static_cast<double>(costs.size() - 1));
    return std::max<std::uint64_t>(costs[idx], 1);
}

TerminationPolicy make_policy(Stage1Result stage1, MlpWeights stage2, const LabeledData& data,
                              std::uint64_t thresh_override, double multiplier) {
    TerminationPolicy policy;
    policy.stage1 = std::move(stage1.net);
    policy.input_std = std::move(stage1.input_std);
    policy.stage2 = std::move(stage2);
    policy.cost_kind = data.cost_kind;
    policy.thresh = thresh_override != 0 ? thresh_override : default_thresh(data.rows);
    policy.multiplier = multiplier;
    return policy;
}

void save_rows(const LabeledData& data, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << "id,lid_true,min_cost,target\n";
    char buf[128];
    for (const auto& row : data.rows) {
        std::snprintf(buf, sizeof(buf), "%u,%.17g,%" PRIu64 ",%.17g\n", row.id, row.lid_true,
                      static_cast<std::uint64_t>(row.min_cost), row.target);
        out << buf;
    }
    if (!out) throw FormatError("write failure on '" + path + "'");
}

LabeledData load_rows(const std::string& path, const VectorStore& training) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line) || line != "id,lid_true,min_cost,target")
        throw FormatError(path + ": missing rows header");

    LabeledData data;
    data.vectors = VectorStore(training.dim(), 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TrainingRow row;
        std::uint64_t cost = 0;
        char* endp = nullptr;
        const char* p = line.c_str();
        row.id = static_cast<std::uint32_t>(std::strtoul(p, &endp, 10));
        if (*endp != ',') throw FormatError(path + ": malformed row '" + line + "'");
        row.lid_true = std::strtod(endp + 1, &endp);
        if (*endp != ',') throw FormatError(path + ": malformed row '" + line + "'");
        cost = std::strtoull(endp + 1, &endp, 10);
        if (*endp != ',') throw FormatError(path + ": malformed row '" + line + "'");
        row.target = std::strtod(endp + 1, &endp);
        row.min_cost = cost;
        if (row.id >= training.count())
            throw FormatError(path + ": row id " + std::to_string(row.id) +
                              " outside the training store");
        data.rows.push_back(row);
        data.vectors.append(training.row(row.id));
    }
    if (data.rows.empty()) throw FormatError(path + ": no rows");
    return data;
}

}  // namespace lidann
