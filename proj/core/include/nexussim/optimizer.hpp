#pragma once

#include <cstdint>
#include <functional>

#include "nexussim/domain.hpp"

// Chooses the SM split per iteration: the objective mode follows live KV
// pressure, a two-phase greedy walk finds the largest feasible share for the
// prioritized phase, and a hysteresis band suppresses small repartitions.

namespace nexus {

enum class Phase { Prefill, Decode };
enum class ObjectiveMode { PrefillPrioritized, DecodePrioritized };

const char* to_string(ObjectiveMode mode);

// Latency of one phase's pending batch as a function of its SM share in
// percent. latency_at(100) is the all-SMs ideal used for the slack bound;
// the search itself stays within [1, 99]. An inactive phase imposes no
// constraint and receives no share of its own.
struct PhaseModel {
    bool active = false;
    std::function<double(int share_pct)> latency_at;
};

// DecodePrioritized iff kv_used/kv_capacity strictly exceeds the switch
// fraction; the boundary itself stays prefill-prioritized.
ObjectiveMode select_mode(std::int64_t kv_used_bytes, std::int64_t kv_capacity_bytes,
                          double kv_switch_fraction);

struct AdjustOutcome {
    int r_p = 0;
    int r_d = 0;
    // Set when no share in [1, 99] satisfied the constraint during the
    // downward walk; in that case the constrained phase gets 99.
    bool infeasible = false;
    int queries = 0;  // latency_at invocations, the all-SMs bound included
};

// Two-phase greedy walk: starting from the target phase's current share,
// decrement until the other phase's latency fits within slack * its ideal,
// then increment while the constraint still holds. Slack is beta when the
// target is prefill, alpha when it is decode. Shares clamp to [1, 99].
AdjustOutcome adjust_partition(Phase target, const PartitionState& cur,
                               const PhaseModel& prefill, const PhaseModel& decode,
                               const ControllerConfig& cfg);

struct PartitionDecision {
    int r_p = 0;
    int r_d = 0;
    ObjectiveMode mode = ObjectiveMode::PrefillPrioritized;
    bool switched = false;
    bool infeasible = false;
    int candidate_r_p = 0;
    int iterations_searched = 0;
};

// Stateful controller: owns the partition and its hysteresis memory. A
// candidate within delta percent points of the last applied split is
// suppressed, and the last applied value is only updated on a real switch.
class PartitionController {
public:
    PartitionController(PartitionState initial, ControllerConfig cfg)
        : state_(initial), cfg_(cfg) {}

    PartitionDecision decide(std::int64_t kv_used_bytes, std::int64_t kv_capacity_bytes,
                             const PhaseModel& prefill, const PhaseModel& decode);

    const PartitionState& state() const { return state_; }
    const ControllerConfig& config() const { return cfg_; }

private:
    PartitionState state_;
    ControllerConfig cfg_;
};

}  // namespace nexus
