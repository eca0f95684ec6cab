#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "nexussim/domain.hpp"

// Enumerates the operators of one prefill or decode iteration and their
// FLOP counts and memory traffic, aggregated over all layers.
//
// FLOP convention: a GEMM of shape (m x k) * (k x n) costs 2*m*n*k. The
// constant cancels in every ratio-based decision; fixing it keeps the model
// deterministic.
//
// Memory convention: dense operators read their weights once per iteration
// (activation traffic ignored); attention operators read the KV entries of
// every attended token plus their per-layer weights.

namespace nexus {

enum class OperatorKind { QkvProj, AttnPrefill, AttnDecode, AttnOutProj, Ffn };

const char* to_string(OperatorKind kind);
std::optional<OperatorKind> operator_kind_from_string(std::string_view name);
const SaturationCurve& profile_for(const KernelProfile& prof, OperatorKind kind);
SaturationCurve& profile_for(KernelProfile& prof, OperatorKind kind);

struct OperatorWorkload {
    OperatorKind kind = OperatorKind::QkvProj;
    double flops = 0;       // c_o
    double mem_bytes = 0;   // total bytes moved (weights + KV for attention)
    double kv_bytes = 0;    // KV portion of mem_bytes; 0 for dense operators
    bool is_attention = false;
};

// One prefill chunk: chunk_tokens new tokens attending to context_len total
// tokens (the chunk included), so context_len >= chunk_tokens.
struct PrefillChunk {
    long chunk_tokens = 0;
    long context_len = 0;
};

// Workloads of a prefill iteration processing a single chunk.
std::vector<OperatorWorkload> prefill_op_workloads(const ModelConfig& model,
                                                   long chunk_tokens, long context_len);

// Same, for a batch of chunks from different requests fused into one
// iteration: dense ops see the summed token count, attention is aggregated.
std::vector<OperatorWorkload> prefill_batch_workloads(const ModelConfig& model,
                                                      const std::vector<PrefillChunk>& chunks);

// Workloads of a decode iteration over a batch; context_lens holds each
// member's attended token count (batch size = context_lens.size()).
std::vector<OperatorWorkload> decode_op_workloads(const ModelConfig& model,
                                                  const std::vector<long>& context_lens);

// A fused chunked-prefill + decode iteration, as run by monolithic engines.
std::vector<OperatorWorkload> mixed_batch_workloads(const ModelConfig& model,
                                                    const std::vector<PrefillChunk>& chunks,
                                                    const std::vector<long>& decode_context_lens);

// True iff, at SM share r, the operator's memory time exceeds its compute
// time under the saturation curve (see costmodel::compute_latency).
bool classify_memory_bound(const OperatorWorkload& w, const GpuSpec& gpu, double share,
                           const KernelProfile& prof);

}  // namespace nexus
