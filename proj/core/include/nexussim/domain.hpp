#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Shared domain types for the serving simulator. Conventions used throughout:
// times are seconds, sizes are bytes, token counts are `long`, SM shares are
// integer percents in [1, 99] (a 1% floor keeps both phases allocatable).

namespace nexus {

struct ModelConfig {
    long hidden_dim = 0;        // embedding width of the residual stream
    long ffn_dim = 0;           // inner width of the feed-forward block
    int num_layers = 0;
    int num_heads = 0;
    int element_bytes = 2;      // bytes per stored element (fp16 default)

    // Derived: 2 (K and V) * num_layers * hidden_dim * element_bytes.
    std::int64_t kv_bytes_per_token = 0;

    std::int64_t weight_bytes_per_layer_dense = 0;  // QKV + out-proj + FFN weights
    std::int64_t weight_bytes_per_layer_attn = 0;   // weights touched inside attention

    // Fills kv_bytes_per_token and the dense weight bytes from the dimensions.
    static ModelConfig derive(long hidden_dim, long ffn_dim, int num_layers,
                              int num_heads, int element_bytes);

    std::int64_t expected_kv_bytes_per_token() const {
        return static_cast<std::int64_t>(2) * num_layers * hidden_dim * element_bytes;
    }
};

struct GpuSpec {
    int total_sm = 0;
    double peak_compute = 0;      // FLOP/s
    double peak_bandwidth = 0;    // bytes/s
    std::int64_t kv_capacity_bytes = 0;
};

// One operator's compute-scaling curve: latency decays as 1/share until
// r_sat, then additional share is penalized by lambda per unit of share.
struct SaturationCurve {
    double r_sat = 0.6;
    double lambda = 0.1;
};

struct KernelProfile {
    SaturationCurve qkv_proj{0.6, 0.1};
    SaturationCurve attn_prefill{0.4, 0.05};
    SaturationCurve attn_decode{0.4, 0.05};
    SaturationCurve attn_out_proj{0.6, 0.1};
    SaturationCurve ffn{0.6, 0.1};
};

struct Request {
    std::uint64_t id = 0;
    double arrival_s = 0;
    long prompt_len = 0;
    long output_len = 0;

    // Progress, owned by the simulator.
    long prefilled_len = 0;
    long decoded_len = 0;   // output tokens emitted so far (first token included)
    std::optional<double> first_token_s;
    std::optional<double> finish_s;
    std::vector<double> token_times_s;

    bool completed() const { return finish_s.has_value(); }
};

struct PartitionState {
    int r_p = 50;
    int r_d = 50;
    int last_applied_r_p = 50;
};

struct ControllerConfig {
    double alpha = 1.3;             // slack on prefill when decode is prioritized
    double beta = 1.1;              // slack on decode when prefill is prioritized
    double kv_switch_fraction = 0.7;
    int delta_pp = 5;               // hysteresis band, percent points
    double gamma = 15.0;            // anti-starvation weight, tokens per second
    long chunk_size = 2048;         // fixed prefill chunk for mixed batches
    int max_decode_batch = 64;
    long token_budget = 2048;       // per-iteration prefill token budget
};

struct InvalidField {
    std::string field;
    std::string reason;
};

// Checks every type invariant and returns all violations, not just the first.
// An empty result means the configuration is valid.
std::vector<InvalidField> validate_config(const ModelConfig& model, const GpuSpec& gpu,
                                          const ControllerConfig& ctrl,
                                          const KernelProfile& prof);

// Renders violations as "field: reason" lines, for error messages.
std::string describe(const std::vector<InvalidField>& errors);

}  // namespace nexus
