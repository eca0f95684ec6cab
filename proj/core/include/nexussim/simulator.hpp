#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nexussim/costmodel.hpp"
#include "nexussim/domain.hpp"
#include "nexussim/eventlog.hpp"
#include "nexussim/metrics.hpp"
#include "nexussim/optimizer.hpp"

// Discrete-event serving engines over one (or, for engine-level
// disaggregation, two) simulated GPUs. Four engines share the machinery:
//
//   NexusDisagg       — concurrent prefill/decode lanes, per-batch SM
//                       partitioning with hysteresis, SPF prefill + FCFS
//                       decode, contention-aware decode costing.
//   StaticPartition   — the same dual-lane loop with a fixed split.
//   MonolithicChunked — a single lane running fused chunked-prefill +
//                       decode batches at full GPU share.
//   EngineLevelDisagg — prefill and decode on separate devices with a
//                       per-request KV handoff latency and a transfer
//                       buffer that stalls when the decode device is full.
//
// Runs are deterministic: identical (trace, config) inputs produce
// byte-identical event logs.

namespace nexus {

enum class EngineKind { NexusDisagg, MonolithicChunked, StaticPartition, EngineLevelDisagg };
enum class PrefillPolicy { Spf, Fcfs };

const char* to_string(EngineKind kind);

struct EngineConfig {
    EngineKind kind = EngineKind::NexusDisagg;
    int static_r_p = 50;                       // StaticPartition only
    PrefillPolicy prefill_policy = PrefillPolicy::Spf;
    double transfer_base_s = 0.05;             // EngineLevelDisagg handoff setup cost
    double transfer_bandwidth_fraction = 0.5;  // handoff moves bytes at this fraction of B;
                                               // 0 disables the bandwidth term
    double timeout_sim_s = 3600.0;
    std::uint64_t max_events = 10'000'000;
};

struct SimConfig {
    ModelConfig model;
    GpuSpec gpu;
    ControllerConfig ctrl;
    KernelProfile profile;
    EngineConfig engine;
};

struct DecisionLogEntry {
    double time_s = 0;
    double kv_frac = 0;
    ObjectiveMode mode = ObjectiveMode::PrefillPrioritized;
    int candidate_r_p = 0;
    int applied_r_p = 0;
    bool switched = false;
    bool infeasible = false;
    int queries = 0;
};

std::string decision_log_text(const std::vector<DecisionLogEntry>& entries);

struct SimResult {
    std::vector<Request> requests;   // final request states, trace order
    MetricsReport metrics;           // over completed requests; empty if none
    std::vector<EventRecord> events;
    std::vector<DecisionLogEntry> decisions;
    bool timed_out = false;
    double sim_end_s = 0;
};

// Runs the selected engine over the trace (sorted by arrival time) until all
// requests finish or the timeout budget is hit. Requests whose whole KV
// footprint cannot fit the device are rejected up front with an exception.
SimResult run(const SimConfig& cfg, const std::vector<Request>& trace);

}  // namespace nexus
