#include "nexussim/opcost.hpp"

#include <stdexcept>
#include <utility>

#include "nexussim/costmodel.hpp"

namespace nexus {

const char* to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::QkvProj: return "qkv_proj";
        case OperatorKind::AttnPrefill: return "attn_prefill";
        case OperatorKind::AttnDecode: return "attn_decode";
        case OperatorKind::AttnOutProj: return "attn_out_proj";
        case OperatorKind::Ffn: return "ffn";
    }
    return "unknown";
}

std::optional<OperatorKind> operator_kind_from_string(std::string_view name) {
    if (name == "qkv_proj") return OperatorKind::QkvProj;
    if (name == "attn_prefill") return OperatorKind::AttnPrefill;
    if (name == "attn_decode") return OperatorKind::AttnDecode;
    if (name == "attn_out_proj") return OperatorKind::AttnOutProj;
    if (name == "ffn") return OperatorKind::Ffn;
    return std::nullopt;
}

const SaturationCurve& profile_for(const KernelProfile& prof, OperatorKind kind) {
    switch (kind) {
        case OperatorKind::QkvProj: return prof.qkv_proj;
        case OperatorKind::AttnPrefill: return prof.attn_prefill;
        case OperatorKind::AttnDecode: return prof.attn_decode;
        case OperatorKind::AttnOutProj: return prof.attn_out_proj;
        case OperatorKind::Ffn: return prof.ffn;
    }
    return prof.ffn;
}

SaturationCurve& profile_for(KernelProfile& prof, OperatorKind kind) {
    return const_cast<SaturationCurve&>(profile_for(std::as_const(prof), kind));
}

namespace {

struct DenseWeightSplit {
    double qkv_bytes;
    double out_proj_bytes;
    double ffn_bytes;
};

// The dense weight budget is a single config field; apportion it across the
// three dense operators by parameter count so the per-iteration total stays
// exactly num_layers * weight_bytes_per_layer_dense.
DenseWeightSplit split_dense_weights(const ModelConfig& m) {
    const double d = static_cast<double>(m.hidden_dim);
    const double dff = static_cast<double>(m.ffn_dim);
    const double qkv = 3.0 * d * d;
    const double out = d * d;
    const double ffn = 2.0 * d * dff;
    const double total_params = qkv + out + ffn;
    const double total_bytes =
        static_cast<double>(m.num_layers) * static_cast<double>(m.weight_bytes_per_layer_dense);
    return {total_bytes * (qkv / total_params), total_bytes * (out / total_params),
            total_bytes * (ffn / total_params)};
}

double attn_weight_bytes(const ModelConfig& m) {
    return static_cast<double>(m.num_layers) *
           static_cast<double>(m.weight_bytes_per_layer_attn);
}

// Dense operators of one iteration over n batch tokens, all layers.
void append_dense_ops(std::vector<OperatorWorkload>& ops, const ModelConfig& m, double n,
                      bool qkv_first) {
    const double d = static_cast<double>(m.hidden_dim);
    const double dff = static_cast<double>(m.ffn_dim);
    const double layers = static_cast<double>(m.num_layers);
    const DenseWeightSplit w = split_dense_weights(m);
    if (qkv_first) {
        ops.push_back({OperatorKind::QkvProj, 6.0 * n * d * d * layers, w.qkv_bytes, 0, false});
    } else {
        ops.push_back({OperatorKind::AttnOutProj, 2.0 * n * d * d * layers, w.out_proj_bytes, 0, false});
        ops.push_back({OperatorKind::Ffn, 4.0 * n * d * dff * layers, w.ffn_bytes, 0, false});
    }
}

}  // namespace

std::vector<OperatorWorkload> prefill_op_workloads(const ModelConfig& model,
                                                   long chunk_tokens, long context_len) {
    if (chunk_tokens < 1) throw std::invalid_argument("prefill_op_workloads: chunk_tokens must be >= 1");
    if (context_len < chunk_tokens)
        throw std::invalid_argument("prefill_op_workloads: context_len must be >= chunk_tokens");
    return prefill_batch_workloads(model, {{chunk_tokens, context_len}});
}

std::vector<OperatorWorkload> prefill_batch_workloads(const ModelConfig& model,
                                                      const std::vector<PrefillChunk>& chunks) {
    if (chunks.empty()) throw std::invalid_argument("prefill_batch_workloads: empty batch");
    double n_total = 0;
    double attn_flops = 0;
    double attn_kv_bytes = 0;
    const double d = static_cast<double>(model.hidden_dim);
    const double layers = static_cast<double>(model.num_layers);
    for (const PrefillChunk& c : chunks) {
        if (c.chunk_tokens < 1)
            throw std::invalid_argument("prefill_batch_workloads: chunk_tokens must be >= 1");
        if (c.context_len < c.chunk_tokens)
            throw std::invalid_argument("prefill_batch_workloads: context_len must be >= chunk_tokens");
        n_total += static_cast<double>(c.chunk_tokens);
        // Score (n x L) and value aggregation (n x d over L) GEMMs.
        attn_flops += 4.0 * static_cast<double>(c.chunk_tokens) *
                      static_cast<double>(c.context_len) * d * layers;
        attn_kv_bytes += static_cast<double>(c.context_len) *
                         static_cast<double>(model.kv_bytes_per_token);
    }
    std::vector<OperatorWorkload> ops;
    ops.reserve(4);
    append_dense_ops(ops, model, n_total, /*qkv_first=*/true);
    ops.push_back({OperatorKind::AttnPrefill, attn_flops,
                   attn_kv_bytes + attn_weight_bytes(model), attn_kv_bytes, true});
    append_dense_ops(ops, model, n_total, /*qkv_first=*/false);
    return ops;
}

std::vector<OperatorWorkload> decode_op_workloads(const ModelConfig& model,
                                                  const std::vector<long>& context_lens) {
    if (context_lens.empty()) throw std::invalid_argument("decode_op_workloads: empty batch");
    const double d = static_cast<double>(model.hidden_dim);
    const double layers = static_cast<double>(model.num_layers);
    double attn_flops = 0;
    double attn_kv_bytes = 0;
    for (long len : context_lens) {
        if (len < 1) throw std::invalid_argument("decode_op_workloads: context_len must be >= 1");
        attn_flops += 4.0 * static_cast<double>(len) * d * layers;
        attn_kv_bytes += static_cast<double>(len) * static_cast<double>(model.kv_bytes_per_token);
    }
    const double n = static_cast<double>(context_lens.size());
    std::vector<OperatorWorkload> ops;
    ops.reserve(4);
    append_dense_ops(ops, model, n, /*qkv_first=*/true);
    ops.push_back({OperatorKind::AttnDecode, attn_flops,
                   attn_kv_bytes + attn_weight_bytes(model), attn_kv_bytes, true});
    append_dense_ops(ops, model, n, /*qkv_first=*/false);
    return ops;
}

std::vector<OperatorWorkload> mixed_batch_workloads(const ModelConfig& model,
                                                    const std::vector<PrefillChunk>& chunks,
                                                    const std::vector<long>& decode_context_lens) {
    if (chunks.empty() && decode_context_lens.empty())
        throw std::invalid_argument("mixed_batch_workloads: empty batch");
    if (chunks.empty()) return decode_op_workloads(model, decode_context_lens);
    if (decode_context_lens.empty()) return prefill_batch_workloads(model, chunks);

    const double d = static_cast<double>(model.hidden_dim);
    const double layers = static_cast<double>(model.num_layers);
    double n_total = static_cast<double>(decode_context_lens.size());
    double prefill_attn_flops = 0;
    double prefill_attn_kv = 0;
    for (const PrefillChunk& c : chunks) {
        if (c.chunk_tokens < 1 || c.context_len < c.chunk_tokens)
            throw std::invalid_argument("mixed_batch_workloads: bad chunk shape");
        n_total += static_cast<double>(c.chunk_tokens);
        prefill_attn_flops += 4.0 * static_cast<double>(c.chunk_tokens) *
                              static_cast<double>(c.context_len) * d * layers;
        prefill_attn_kv += static_cast<double>(c.context_len) *
                           static_cast<double>(model.kv_bytes_per_token);
    }
    double decode_attn_flops = 0;
    double decode_attn_kv = 0;
    for (long len : decode_context_lens) {
        if (len < 1) throw std::invalid_argument("mixed_batch_workloads: bad context_len");
        decode_attn_flops += 4.0 * static_cast<double>(len) * d * layers;
        decode_attn_kv += static_cast<double>(len) * static_cast<double>(model.kv_bytes_per_token);
    }

    std::vector<OperatorWorkload> ops;
    ops.reserve(5);
    append_dense_ops(ops, model, n_total, /*qkv_first=*/true);
    ops.push_back({OperatorKind::AttnPrefill, prefill_attn_flops,
                   prefill_attn_kv + attn_weight_bytes(model), prefill_attn_kv, true});
    ops.push_back({OperatorKind::AttnDecode, decode_attn_flops,
                   decode_attn_kv + attn_weight_bytes(model), decode_attn_kv, true});
    append_dense_ops(ops, model, n_total, /*qkv_first=*/false);
    return ops;
}

bool classify_memory_bound(const OperatorWorkload& w, const GpuSpec& gpu, double share,
                           const KernelProfile& prof) {
    if (!(share > 0.0 && share <= 1.0))
        throw std::invalid_argument("classify_memory_bound: share must lie in (0, 1]");
    const double mem_s = w.mem_bytes / gpu.peak_bandwidth;
    const double compute_s =
        compute_latency(w.flops, share, profile_for(prof, w.kind), gpu.peak_compute);
    return mem_s > compute_s;
}

}  // namespace nexus
