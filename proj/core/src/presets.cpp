#include "nexussim/presets.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nexussim/opcost.hpp"

namespace nexus {

std::optional<ModelConfig> model_preset(std::string_view name) {
    if (name == "tiny") return ModelConfig::derive(256, 1024, 8, 8, 2);
    if (name == "3b") return ModelConfig::derive(2048, 8192, 36, 16, 2);
    if (name == "8b") return ModelConfig::derive(4096, 14336, 32, 32, 2);
    if (name == "14b") return ModelConfig::derive(5120, 13824, 48, 40, 2);
    return std::nullopt;
}

std::vector<std::string> model_preset_names() { return {"tiny", "3b", "8b", "14b"}; }

std::optional<GpuSpec> gpu_preset(std::string_view name) {
    if (name == "l20like") return GpuSpec{92, 1.0e14, 8.64e11, 40LL << 30};
    if (name == "desk") return GpuSpec{64, 2.0e12, 1.0e11, 4LL << 30};
    if (name == "desk-contention") return GpuSpec{64, 2.0e13, 1.0e10, 8LL << 30};
    if (name == "desk-tight") return GpuSpec{64, 2.0e12, 1.0e11, 768LL << 20};
    return std::nullopt;
}

std::vector<std::string> gpu_preset_names() {
    return {"l20like", "desk", "desk-contention", "desk-tight"};
}

namespace {

// Input/output token length summaries (mean, p50, p95, p99).
WorkloadSpec long_data_spec(double rate, long count, std::uint64_t seed) {
    WorkloadSpec s;
    s.rate_rps = rate;
    s.count = count;
    s.seed = seed;
    s.input_len = LengthDistribution::empirical(5905, 5461, 9292, 9817);
    s.output_len = LengthDistribution::empirical(180, 159, 339, 454);
    return s;
}

WorkloadSpec arxiv_spec(double rate, long count, std::uint64_t seed) {
    WorkloadSpec s;
    s.rate_rps = rate;
    s.count = count;
    s.seed = seed;
    s.input_len = LengthDistribution::empirical(3832, 3575, 6460, 6894);
    s.output_len = LengthDistribution::empirical(200, 181, 357, 443);
    return s;
}

WorkloadSpec sharegpt_spec(double rate, long count, std::uint64_t seed) {
    WorkloadSpec s;
    s.rate_rps = rate;
    s.count = count;
    s.seed = seed;
    s.input_len = LengthDistribution::empirical(496, 432, 970, 1367);
    s.output_len = LengthDistribution::empirical(97, 37, 383, 474);
    return s;
}

}  // namespace

std::optional<WorkloadPreset> workload_preset(std::string_view name, double rate_rps, long count,
                                              std::uint64_t seed) {
    WorkloadPreset p;
    p.name = std::string(name);
    if (name == "long-data") {
        p.components = {long_data_spec(rate_rps, count, seed)};
        p.weights = {1.0};
        return p;
    }
    if (name == "arxiv") {
        p.components = {arxiv_spec(rate_rps, count, seed)};
        p.weights = {1.0};
        return p;
    }
    if (name == "sharegpt") {
        p.components = {sharegpt_spec(rate_rps, count, seed)};
        p.weights = {1.0};
        return p;
    }
    if (name == "mixed") {
        p.components = {sharegpt_spec(rate_rps, count, seed),
                        long_data_spec(rate_rps, count, seed)};
        p.weights = {0.6, 0.4};
        return p;
    }
    return std::nullopt;
}

std::vector<std::string> workload_preset_names() {
    return {"long-data", "arxiv", "sharegpt", "mixed"};
}

std::vector<Request> realize(const WorkloadPreset& preset) {
    if (preset.components.size() == 1) return generate_trace(preset.components.front());
    return mix_traces(preset.components, preset.weights, preset.components.front().seed);
}

KernelProfile default_kernel_profile() { return KernelProfile{}; }

std::string kernel_profile_text(const KernelProfile& profile) {
    std::ostringstream os;
    os << "# op\tr_sat\tlambda\n";
    char buf[96];
    const OperatorKind kinds[] = {OperatorKind::QkvProj, OperatorKind::AttnPrefill,
                                  OperatorKind::AttnDecode, OperatorKind::AttnOutProj,
                                  OperatorKind::Ffn};
    for (OperatorKind k : kinds) {
        const SaturationCurve& c = profile_for(profile, k);
        std::snprintf(buf, sizeof(buf), "%s\t%.17g\t%.17g\n", to_string(k), c.r_sat, c.lambda);
        os << buf;
    }
    return os.str();
}

void save_kernel_profile(const std::string& path, const KernelProfile& profile) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_kernel_profile: cannot open " + path);
    out << kernel_profile_text(profile);
}

KernelProfile load_kernel_profile(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_kernel_profile: cannot open " + path);
    KernelProfile profile = default_kernel_profile();
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::string op;
        if (!(is >> op)) continue;  // blank line
        double r_sat = 0, lambda = 0;
        if (!(is >> r_sat >> lambda))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected '<op> <r_sat> <lambda>'");
        const auto kind = operator_kind_from_string(op);
        if (!kind)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": unknown operator kind '" + op + "'");
        if (!(r_sat > 0.0 && r_sat <= 1.0))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": r_sat must lie in (0, 1]");
        if (!(lambda >= 0.0))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": lambda must be >= 0");
        SaturationCurve& slot = profile_for(profile, *kind);
        slot.r_sat = r_sat;
        slot.lambda = lambda;
        seen.insert(op);
    }
    const char* all[] = {"qkv_proj", "attn_prefill", "attn_decode", "attn_out_proj", "ffn"};
    for (const char* op : all) {
        if (!seen.count(op) && warnings)
            warnings->push_back(std::string("calibration file ") + path + " has no entry for '" +
                                op + "'; using the default curve");
    }
    return profile;
}

}  // namespace nexus
