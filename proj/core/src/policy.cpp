#include "lidann/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace lidann {

namespace {

constexpr char kPolicyMagic[8] = {'L', 'A', 'N', 'N', 'P', 'O', 'L', '1'};
constexpr std::uint8_t kKindTao = 0;
constexpr std::uint8_t kKindVo = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_vec(std::ostream& out, const std::vector<double>& v) {
    write_pod<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_vec(std::istream& in, const std::string& path) {
    std::uint64_t n = 0;
    read_pod(in, n);
    if (!in || n > (1ull << 32)) throw FormatError(path + ": corrupt vector length");
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw FormatError(path + ": truncated vector payload");
    return v;
}

void write_net(std::ostream& out, const MlpWeights& net) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.spec.layer_sizes.size()));
    for (std::size_t s : net.spec.layer_sizes) write_pod<std::uint64_t>(out, s);
    for (std::size_t l = 0; l < net.spec.layer_count(); ++l) {
        write_vec(out, net.w[l]);
        write_vec(out, net.b[l]);
    }
}

MlpWeights read_net(std::istream& in, const std::string& path) {
    std::uint32_t layers = 0;
    read_pod(in, layers);
    if (!in || layers < 2 || layers > 64) throw FormatError(path + ": corrupt network header");
    MlpWeights net;
    net.spec.layer_sizes.resize(layers);
    for (auto& s : net.spec.layer_sizes) {
        std::uint64_t v = 0;
        read_pod(in, v);
        if (!in || v == 0) throw FormatError(path + ": corrupt layer size");
        s = static_cast<std::size_t>(v);
    }
    net.spec.validate();
    for (std::size_t l = 0; l < net.spec.layer_count(); ++l) {
        net.w.push_back(read_vec(in, path));
        net.b.push_back(read_vec(in, path));
        if (net.w[l].size() != net.spec.layer_sizes[l] * net.spec.layer_sizes[l + 1] ||
            net.b[l].size() != net.spec.layer_sizes[l + 1])
            throw FormatError(path + ": weight shape mismatch");
    }
    return net;
}

void write_header(std::ostream& out, std::uint8_t kind, CostKind cost, std::uint64_t thresh,
                  double multiplier, const Standardizer& std1) {
    out.write(kPolicyMagic, sizeof(kPolicyMagic));
    write_pod(out, kind);
    write_pod(out, static_cast<std::uint8_t>(cost));
    write_pod(out, thresh);
    write_pod(out, multiplier);
    write_vec(out, std1.mean);
    write_vec(out, std1.inv_std);
}

std::uint8_t read_header(std::istream& in, const std::string& path, CostKind& cost,
                         std::uint64_t& thresh, double& multiplier, Standardizer& std1) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPolicyMagic, sizeof(magic)) != 0)
        throw FormatError(path + ": not a policy bundle");
    std::uint8_t kind = 0, cost_raw = 0;
    read_pod(in, kind);
    read_pod(in, cost_raw);
    read_pod(in, thresh);
    read_pod(in, multiplier);
    if (!in || cost_raw > 1) throw FormatError(path + ": corrupt policy header");
    cost = static_cast<CostKind>(cost_raw);
    std1.mean = read_vec(in, path);
    std1.inv_std = read_vec(in, path);
    if (std1.mean.size() != std1.inv_std.size())
        throw FormatError(path + ": corrupt standardizer");
    return kind;
}

}  // namespace

std::uint64_t apply_budget_rule(double tc, double multiplier, std::uint64_t thresh) {
    if (!std::isfinite(tc)) throw PredictionError("budget rule: non-finite tc");
    // exp2 of a wild regression output would overflow; clamping at 2^62 keeps
    // the budget math in integer range while still meaning "search everything".
    const double clamped = std::min(tc, 62.0);
    const double scaled = multiplier * std::exp2(clamped);
    std::uint64_t budget = thresh;
    if (scaled >= static_cast<double>(budget))
        budget = static_cast<std::uint64_t>(std::ceil(std::min(scaled, 0x1.0p62)));
    return std::max<std::uint64_t>(budget, 1);
}

double predict_lid(const TerminationPolicy& policy, std::span<const float> query) {
    const std::vector<double> x = policy.input_std.applied(query);
    const double lid = mlp_forward(policy.stage1, x);
    if (!std::isfinite(lid))
        throw PredictionError("predict_lid: stage-1 output is non-finite");
    return lid;
}

double predict_tc(const TerminationPolicy& policy, std::span<const float> query) {
    const double lid = predict_lid(policy, query);
    const double one[1] = {lid};
    const double tc = mlp_forward(policy.stage2, one);
    if (!std::isfinite(tc))
        throw PredictionError("predict_tc: stage-2 output is non-finite");
    return tc;
}

std::uint64_t budget_from_lid(const TerminationPolicy& policy, double lid) {
    const double one[1] = {lid};
    const double tc = mlp_forward(policy.stage2, one);
    if (!std::isfinite(tc))
        throw PredictionError("budget_from_lid: stage-2 output is non-finite");
    return apply_budget_rule(tc, policy.multiplier, policy.thresh);
}

std::uint64_t predict_termination(const TerminationPolicy& policy,
                                  std::span<const float> query) {
    return apply_budget_rule(predict_tc(policy, query), policy.multiplier, policy.thresh);
}

double predict_tc_vo(const VoModel& model, std::span<const float> query) {
    const std::vector<double> x = model.input_std.applied(query);
    const double tc = mlp_forward(model.net, x);
    if (!std::isfinite(tc)) throw PredictionError("predict_tc_vo: output is non-finite");
    return tc;
}

std::uint64_t predict_vo(const VoModel& model, std::span<const float> query) {
    return apply_budget_rule(predict_tc_vo(model, query), model.multiplier, model.thresh);
}

void policy_save(const TerminationPolicy& policy, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    write_header(out, kKindTao, policy.cost_kind, policy.thresh, policy.multiplier,
                 policy.input_std);
    write_net(out, policy.stage1);
    write_net(out, policy.stage2);
    if (!out) throw FormatError("write failure on '" + path + "'");
}

TerminationPolicy policy_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    TerminationPolicy policy;
    const std::uint8_t kind = read_header(in, path, policy.cost_kind, policy.thresh,
                                          policy.multiplier, policy.input_std);
    if (kind != kKindTao) throw FormatError(path + ": bundle holds a different model kind");
    policy.stage1 = read_net(in, path);
    policy.stage2 = read_net(in, path);
    return policy;
}

void vo_save(const VoModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    write_header(out, kKindVo, model.cost_kind, model.thresh, model.multiplier,
                 model.input_std);
    write_net(out, model.net);
    if (!out) throw FormatError("write failure on '" + path + "'");
}

VoModel vo_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    VoModel model;
    const std::uint8_t kind = read_header(in, path, model.cost_kind, model.thresh,
                                          model.multiplier, model.input_std);
    if (kind != kKindVo) throw FormatError(path + ": bundle holds a different model kind");
    model.net = read_net(in, path);
    return model;
}

}  // namespace lidann
