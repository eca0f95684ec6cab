#include "nexussim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nexus {

const char* to_string(ObjectiveMode mode) {
    return mode == ObjectiveMode::PrefillPrioritized ? "prefill" : "decode";
}

ObjectiveMode select_mode(std::int64_t kv_used_bytes, std::int64_t kv_capacity_bytes,
                          double kv_switch_fraction) {
    if (kv_used_bytes < 0 || kv_used_bytes > kv_capacity_bytes)
        throw std::invalid_argument("select_mode: kv_used must lie in [0, capacity]");
    const bool over = static_cast<double>(kv_used_bytes) >
                      kv_switch_fraction * static_cast<double>(kv_capacity_bytes);
    return over ? ObjectiveMode::DecodePrioritized : ObjectiveMode::PrefillPrioritized;
}

AdjustOutcome adjust_partition(Phase target, const PartitionState& cur,
                               const PhaseModel& prefill, const PhaseModel& decode,
                               const ControllerConfig& cfg) {
    const bool target_is_prefill = target == Phase::Prefill;
    const PhaseModel& other = target_is_prefill ? decode : prefill;
    const double slack = target_is_prefill ? cfg.beta : cfg.alpha;

    AdjustOutcome out;
    auto finish = [&](int target_share, bool infeasible, int queries) {
        out.r_p = target_is_prefill ? target_share : 100 - target_share;
        out.r_d = 100 - out.r_p;
        out.infeasible = infeasible;
        out.queries = queries;
        return out;
    };

    if (!other.active) return finish(99, false, 0);

    int queries = 0;
    auto other_latency = [&](int target_share) {
        ++queries;
        return other.latency_at(100 - target_share);
    };
    ++queries;
    const double bound = slack * other.latency_at(100);

    int share = std::clamp(target_is_prefill ? cur.r_p : cur.r_d, 1, 99);

    // Phase 1: shrink the target until the other phase meets its bound.
    while (other_latency(share) > bound) {
        if (share == 1) return finish(1, true, queries);
        --share;
    }
    // Phase 2: grow the target while the bound still holds at the next step.
    while (share < 99) {
        if (other_latency(share + 1) > bound) break;
        ++share;
    }
    return finish(share, false, queries);
}

PartitionDecision PartitionController::decide(std::int64_t kv_used_bytes,
                                              std::int64_t kv_capacity_bytes,
                                              const PhaseModel& prefill,
                                              const PhaseModel& decode) {
    PartitionDecision d;
    d.mode = select_mode(kv_used_bytes, kv_capacity_bytes, cfg_.kv_switch_fraction);
    const Phase target =
        d.mode == ObjectiveMode::DecodePrioritized ? Phase::Decode : Phase::Prefill;
    const PhaseModel& target_model = target == Phase::Prefill ? prefill : decode;

    // No batch on the prioritized side: keep the current split untouched.
    if (!target_model.active) {
        d.r_p = state_.r_p;
        d.r_d = state_.r_d;
        d.candidate_r_p = state_.r_p;
        return d;
    }

    const AdjustOutcome adj = adjust_partition(target, state_, prefill, decode, cfg_);
    d.candidate_r_p = adj.r_p;
    d.infeasible = adj.infeasible;
    d.iterations_searched = adj.queries;

    if (std::abs(adj.r_p - state_.last_applied_r_p) < cfg_.delta_pp) {
        d.r_p = state_.r_p;
        d.r_d = state_.r_d;
        d.switched = false;
        return d;
    }
    state_.r_p = adj.r_p;
    state_.r_d = adj.r_d;
    state_.last_applied_r_p = adj.r_p;
    d.r_p = adj.r_p;
    d.r_d = adj.r_d;
    d.switched = true;
    return d;
}

}  // namespace nexus
