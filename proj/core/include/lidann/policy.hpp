#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "lidann/mlp.hpp"

namespace lidann {

/// What the predicted budget means to the index that consumes it.
enum class CostKind : std::uint8_t {
    DistanceEvals = 0,  // graph search: cap on distance evaluations
    Nprobe = 1,         // quantization search: clusters to probe (clamped to nlist)
};

/// Two chained regressors plus the budget rule
///   budget = max(thresh, ceil(multiplier * 2^tc))
/// where stage 1 maps a (standardized) query vector to an intrinsic-dimension
/// estimate and stage 2 maps that estimate to tc, the log2-scale search cost.
struct TerminationPolicy {
    MlpWeights stage1;       // vector -> lid, hidden 200/200
    MlpWeights stage2;       // lid -> tc, hidden 10/10
    Standardizer input_std;  // applied to stage-1 inputs
    std::uint64_t thresh = 1;
    double multiplier = 1.0;
    CostKind cost_kind = CostKind::DistanceEvals;
};

/// Single deeper network predicting tc straight from the query vector,
/// wrapped by the same budget rule. Hidden widths fixed at 200/200/1/10/10.
struct VoModel {
    MlpWeights net;
    Standardizer input_std;
    std::uint64_t thresh = 1;
    double multiplier = 1.0;
    CostKind cost_kind = CostKind::DistanceEvals;
};

/// Stage-1 intrinsic-dimension estimate for a raw query.
double predict_lid(const TerminationPolicy& policy, std::span<const float> query);

/// Budget from an externally supplied intrinsic dimension (stage 2 plus the
/// budget rule). Also the ablation path that feeds the true value.
std::uint64_t budget_from_lid(const TerminationPolicy& policy, double lid);

/// Full chain: stage 1, stage 2, budget rule. Throws PredictionError if any
/// intermediate value is non-finite.
std::uint64_t predict_termination(const TerminationPolicy& policy,
                                  std::span<const float> query);

std::uint64_t predict_vo(const VoModel& model, std::span<const float> query);

/// Raw tc outputs (before the budget rule); used by the multiplier tuner so
/// one forward pass per query serves every candidate multiplier.
double predict_tc(const TerminationPolicy& policy, std::span<const float> query);
double predict_tc_vo(const VoModel& model, std::span<const float> query);

/// Applies the budget rule to a raw tc value.
std::uint64_t apply_budget_rule(double tc, double multiplier, std::uint64_t thresh);

void policy_save(const TerminationPolicy& policy, const std::string& path);
TerminationPolicy policy_load(const std::string& path);
void vo_save(const VoModel& model, const std::string& path);
VoModel vo_load(const std::string& path);

}  // namespace lidann
