#pragma once

#include <vector>

#include "nexussim/domain.hpp"
#include "nexussim/opcost.hpp"

// Predicts prefill and decode iteration latency under any SM split.
//
// Per-operator latency is max(compute, memory). Compute follows a two-regime
// saturation curve; memory uses peak bandwidth, except that a decode
// iteration overlapping a prefill iteration sees a reduced effective
// bandwidth on its attention operator. Contention is modeled asymmetrically:
// prefill always uses peak bandwidth, and its memory-bound attention share
// only feeds the overlap probability.

namespace nexus {

struct OpLatency {
    OperatorKind kind = OperatorKind::QkvProj;
    double compute_s = 0;
    double mem_s = 0;
    bool memory_bound = false;   // mem_s > compute_s
};

struct PhaseLatencyBreakdown {
    double total_s = 0;           // sum over ops of max(compute_s, mem_s)
    double attn_mem_time_s = 0;   // latency summed over memory-bound attention ops
    std::vector<OpLatency> per_op;
};

// Compute latency of one operator with c_o FLOPs at SM share r in (0, 1]:
// c_o / (r*C) below the saturation point, then a linear decay penalty.
// The two branches agree exactly at r == r_sat.
double compute_latency(double flops, double share, const SaturationCurve& curve,
                       double peak_compute);

// Latency of an iteration in isolation (memory at peak bandwidth).
PhaseLatencyBreakdown phase_latency_isolated(const std::vector<OperatorWorkload>& ops,
                                             double share, const GpuSpec& gpu,
                                             const KernelProfile& prof);

// Fraction of the prefill iteration spent in memory-bound attention; this is
// the probability that a concurrent decode overlaps with prefill's KV reads.
// Zero when no prefill is active (total_s == 0).
double p_attn(const PhaseLatencyBreakdown& prefill_breakdown);

struct ContentionContext {
    double p_attn = 0;    // overlap probability with prefill attention
    double m_d = 0;       // decode attention KV bytes
    double m_p1 = 0;      // prefill attention KV bytes
    double m_p2 = 0;      // prefill dense weight bytes
    double b_decode = 0;  // resulting effective bandwidth, bytes/s
};

// Effective decode bandwidth under contention:
//   B_decode = m_d/(m_d+m_p1) * p_attn * B  +  m_d/(m_d+m_p2) * (1-p_attn) * B
// Requires m_d > 0. Returns B when m_p1 == m_p2 == 0.
double effective_decode_bandwidth(const ContentionContext& ctx, double peak_bandwidth);

// Builds the contention context for a decode batch overlapping the given
// prefill iteration, filling b_decode.
ContentionContext build_contention_context(const PhaseLatencyBreakdown& prefill_breakdown,
                                           const std::vector<OperatorWorkload>& prefill_ops,
                                           const std::vector<OperatorWorkload>& decode_ops,
                                           double peak_bandwidth);

// Decode iteration latency. With a concurrent prefill iteration, the decode
// attention operator's memory time is charged at the contended bandwidth;
// dense decode operators keep peak bandwidth. Without one (prefill_breakdown
// == nullptr), identical to phase_latency_isolated.
PhaseLatencyBreakdown decode_latency_contended(const std::vector<OperatorWorkload>& decode_ops,
                                               double share,
                                               const PhaseLatencyBreakdown* prefill_breakdown,
                                               const std::vector<OperatorWorkload>& prefill_ops,
                                               const GpuSpec& gpu, const KernelProfile& prof);

// Ideal latency with all SMs (share = 1.0); 0 for an empty phase.
double min_phase_latency(const std::vector<OperatorWorkload>& ops, const GpuSpec& gpu,
                         const KernelProfile& prof);

}  // namespace nexus
