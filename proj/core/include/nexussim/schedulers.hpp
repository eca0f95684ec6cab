#pragma once

#include <cstdint>
#include <vector>

// Batch formation policies. All schedulers are pure functions of queue
// snapshots; ties break on (score, arrival, id) ascending so replays are
// deterministic.

namespace nexus {

struct PrefillQueueEntry {
    std::uint64_t id = 0;
    long remaining = 0;   // prompt_len - prefilled_len, >= 1 while queued
    double arrival_s = 0;
};

struct DecodeCandidate {
    std::uint64_t id = 0;
    double arrival_s = 0;
};

enum class BatchPhase { Prefill, Decode, Mixed };

struct BatchMember {
    std::uint64_t id = 0;
    long tokens = 0;
};

struct BatchPlan {
    BatchPhase phase = BatchPhase::Prefill;
    std::vector<BatchMember> members;
    long total_tokens = 0;

    bool empty() const { return members.empty(); }
};

// Shortest-prompt-first with aging: score = remaining - gamma * (now -
// arrival), lowest first. Entries are taken greedily while the cumulative
// token count fits the budget; the first entry that does not fit stops the
// scan (set skip_non_fitting to keep scanning instead). If the first
// selected entry alone exceeds the budget it contributes a budget-sized
// chunk.
BatchPlan spf_schedule(const std::vector<PrefillQueueEntry>& queue, long token_budget,
                       double gamma, double now_s, bool skip_non_fitting = false);

// Arrival-ordered prefill fill with the same budget rules; the FCFS ablation
// baseline for the prefill lane.
BatchPlan fcfs_prefill_schedule(const std::vector<PrefillQueueEntry>& queue, long token_budget);

// First max_batch decode-phase requests by arrival time, one token each.
BatchPlan fcfs_decode_schedule(const std::vector<DecodeCandidate>& active, int max_batch);

// Monolithic chunked-prefill batch: every eligible decode token first (FCFS,
// up to max_batch), then prefill chunk tokens FCFS up to the remaining
// budget, at most chunk_size per request per tick. Returns one fused batch.
BatchPlan chunked_mixed_schedule(const std::vector<PrefillQueueEntry>& prefill_queue,
                                 const std::vector<DecodeCandidate>& active_decodes,
                                 long token_budget, int max_batch, long chunk_size);

}  // namespace nexus
