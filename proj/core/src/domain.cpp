#include "nexussim/domain.hpp"

#include <sstream>

namespace nexus {

ModelConfig ModelConfig::derive(long hidden_dim, long ffn_dim, int num_layers,
                                int num_heads, int element_bytes) {
    ModelConfig m;
    m.hidden_dim = hidden_dim;
    m.ffn_dim = ffn_dim;
    m.num_layers = num_layers;
    m.num_heads = num_heads;
    m.element_bytes = element_bytes;
    m.kv_bytes_per_token = m.expected_kv_bytes_per_token();
    // 3*d*d (QKV) + d*d (out-proj) + 2*d*d_ff (FFN), per layer.
    const std::int64_t params_dense =
        4 * static_cast<std::int64_t>(hidden_dim) * hidden_dim +
        2 * static_cast<std::int64_t>(hidden_dim) * ffn_dim;
    m.weight_bytes_per_layer_dense = params_dense * element_bytes;
    m.weight_bytes_per_layer_attn =
        static_cast<std::int64_t>(hidden_dim) * element_bytes;
    return m;
}

namespace {

void check(std::vector<InvalidField>& out, bool ok, const char* field, const char* reason) {
    if (!ok) out.push_back({field, reason});
}

void check_curve(std::vector<InvalidField>& out, const SaturationCurve& c, const char* name) {
    std::string f = std::string("profile.") + name;
    if (!(c.r_sat > 0.0 && c.r_sat <= 1.0))
        out.push_back({f + ".r_sat", "must lie in (0, 1]"});
    if (!(c.lambda >= 0.0))
        out.push_back({f + ".lambda", "must be >= 0"});
}

}  // namespace

std::vector<InvalidField> validate_config(const ModelConfig& model, const GpuSpec& gpu,
                                          const ControllerConfig& ctrl,
                                          const KernelProfile& prof) {
    std::vector<InvalidField> errors;

    check(errors, model.hidden_dim > 0, "model.hidden_dim", "must be > 0");
    check(errors, model.ffn_dim > 0, "model.ffn_dim", "must be > 0");
    check(errors, model.ffn_dim >= model.hidden_dim, "model.ffn_dim", "must be >= hidden_dim");
    check(errors, model.num_layers > 0, "model.num_layers", "must be > 0");
    check(errors, model.num_heads > 0, "model.num_heads", "must be > 0");
    check(errors, model.element_bytes > 0, "model.element_bytes", "must be > 0");
    check(errors, model.kv_bytes_per_token > 0, "model.kv_bytes_per_token", "must be > 0");
    if (model.hidden_dim > 0 && model.num_layers > 0 && model.element_bytes > 0) {
        check(errors, model.kv_bytes_per_token == model.expected_kv_bytes_per_token(),
              "model.kv_bytes_per_token",
              "must equal 2 * num_layers * hidden_dim * element_bytes");
    }
    check(errors, model.weight_bytes_per_layer_dense > 0,
          "model.weight_bytes_per_layer_dense", "must be > 0");
    check(errors, model.weight_bytes_per_layer_attn > 0,
          "model.weight_bytes_per_layer_attn", "must be > 0");

    check(errors, gpu.total_sm >= 2, "gpu.total_sm", "must be >= 2 so both phases are allocatable");
    check(errors, gpu.peak_compute > 0, "gpu.peak_compute", "must be > 0");
    check(errors, gpu.peak_bandwidth > 0, "gpu.peak_bandwidth", "must be > 0");
    check(errors, gpu.kv_capacity_bytes > 0, "gpu.kv_capacity_bytes", "must be > 0");

    check(errors, ctrl.alpha > 1.0, "controller.alpha", "must exceed 1");
    check(errors, ctrl.beta > 1.0, "controller.beta", "must exceed 1");
    check(errors, ctrl.kv_switch_fraction > 0.0 && ctrl.kv_switch_fraction < 1.0,
          "controller.kv_switch_fraction", "must lie in (0, 1)");
    check(errors, ctrl.delta_pp >= 0, "controller.delta_pp", "must be >= 0");
    check(errors, ctrl.gamma >= 0.0, "controller.gamma", "must be >= 0");
    check(errors, ctrl.chunk_size >= 1, "controller.chunk_size", "must be >= 1");
    check(errors, ctrl.max_decode_batch >= 1, "controller.max_decode_batch", "must be >= 1");
    check(errors, ctrl.token_budget >= 1, "controller.token_budget", "must be >= 1");

    check_curve(errors, prof.qkv_proj, "qkv_proj");
    check_curve(errors, prof.attn_prefill, "attn_prefill");
    check_curve(errors, prof.attn_decode, "attn_decode");
    check_curve(errors, prof.attn_out_proj, "attn_out_proj");
    check_curve(errors, prof.ffn, "ffn");

    return errors;
}

std::string describe(const std::vector<InvalidField>& errors) {
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i) os << "; ";
        os << errors[i].field << ": " << errors[i].reason;
    }
    return os.str();
}

}  // namespace nexus
