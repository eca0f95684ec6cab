#include "nexussim/costmodel.hpp"

#include <algorithm>
#include <stdexcept>

namespace nexus {

double compute_latency(double flops, double share, const SaturationCurve& curve,
                       double peak_compute) {
    if (!(share > 0.0)) throw std::invalid_argument("compute_latency: share must be > 0");
    if (flops < 0) throw std::invalid_argument("compute_latency: flops must be >= 0");
    if (share <= curve.r_sat) return flops / (share * peak_compute);
    return flops / (curve.r_sat * peak_compute) * (1.0 + curve.lambda * (share - curve.r_sat));
}

namespace {

PhaseLatencyBreakdown breakdown_with_bandwidth(const std::vector<OperatorWorkload>& ops,
                                               double share, const GpuSpec& gpu,
                                               const KernelProfile& prof,
                                               double decode_attn_bandwidth) {
    if (ops.empty()) throw std::invalid_argument("phase latency: empty operator list");
    PhaseLatencyBreakdown out;
    out.per_op.reserve(ops.size());
    for (const OperatorWorkload& w : ops) {
        const double bw = (w.kind == OperatorKind::AttnDecode && decode_attn_bandwidth > 0)
                              ? decode_attn_bandwidth
                              : gpu.peak_bandwidth;
        OpLatency lat;
        lat.kind = w.kind;
        lat.compute_s = compute_latency(w.flops, share, profile_for(prof, w.kind),
                                        gpu.peak_compute);
        lat.mem_s = w.mem_bytes / bw;
        lat.memory_bound = lat.mem_s > lat.compute_s;
        const double op_total = std::max(lat.compute_s, lat.mem_s);
        out.total_s += op_total;
        if (w.is_attention && lat.memory_bound) out.attn_mem_time_s += op_total;
        out.per_op.push_back(lat);
    }
    return out;
}

}  // namespace

PhaseLatencyBreakdown phase_latency_isolated(const std::vector<OperatorWorkload>& ops,
                                             double share, const GpuSpec& gpu,
                                             const KernelProfile& prof) {
    return breakdown_with_bandwidth(ops, share, gpu, prof, /*decode_attn_bandwidth=*/0);
}

double p_attn(const PhaseLatencyBreakdown& prefill_breakdown) {
    if (prefill_breakdown.total_s <= 0) return 0.0;
    return prefill_breakdown.attn_mem_time_s / prefill_breakdown.total_s;
}

double effective_decode_bandwidth(const ContentionContext& ctx, double peak_bandwidth) {
    if (!(ctx.m_d > 0)) throw std::invalid_argument("effective_decode_bandwidth: m_d must be > 0");
    if (ctx.m_p1 < 0 || ctx.m_p2 < 0)
        throw std::invalid_argument("effective_decode_bandwidth: m_p1/m_p2 must be >= 0");
    const double attn_share = ctx.m_d / (ctx.m_d + ctx.m_p1);
    const double dense_share = ctx.m_d / (ctx.m_d + ctx.m_p2);
    return attn_share * ctx.p_attn * peak_bandwidth +
           dense_share * (1.0 - ctx.p_attn) * peak_bandwidth;
}

ContentionContext build_contention_context(const PhaseLatencyBreakdown& prefill_breakdown,
                                           const std::vector<OperatorWorkload>& prefill_ops,
                                           const std::vector<OperatorWorkload>& decode_ops,
                                           double peak_bandwidth) {
    ContentionContext ctx;
    ctx.p_attn = p_attn(prefill_breakdown);
    for (const OperatorWorkload& w : prefill_ops) {
        if (w.is_attention)
            ctx.m_p1 += w.kv_bytes;
        else
            ctx.m_p2 += w.mem_bytes;
    }
    for (const OperatorWorkload& w : decode_ops) {
        if (w.kind == OperatorKind::AttnDecode) ctx.m_d += w.kv_bytes;
    }
    ctx.b_decode = ctx.m_d > 0 ? effective_decode_bandwidth(ctx, peak_bandwidth) : peak_bandwidth;
    return ctx;
}

PhaseLatencyBreakdown decode_latency_contended(const std::vector<OperatorWorkload>& decode_ops,
                                               double share,
                                               const PhaseLatencyBreakdown* prefill_breakdown,
                                               const std::vector<OperatorWorkload>& prefill_ops,
                                               const GpuSpec& gpu, const KernelProfile& prof) {
    if (prefill_breakdown == nullptr)
        return phase_latency_isolated(decode_ops, share, gpu, prof);
    const ContentionContext ctx =
        build_contention_context(*prefill_breakdown, prefill_ops, decode_ops,
                                 gpu.peak_bandwidth);
    return breakdown_with_bandwidth(decode_ops, share, gpu, prof, ctx.b_decode);
}

double min_phase_latency(const std::vector<OperatorWorkload>& ops, const GpuSpec& gpu,
                         const KernelProfile& prof) {
    if (ops.empty()) return 0.0;  // a vacuous phase imposes no constraint
    return phase_latency_isolated(ops, 1.0, gpu, prof).total_s;
}

}  // namespace nexus
