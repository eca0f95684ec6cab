#include "nexussim/schedulers.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace nexus {

namespace {

// Greedy budget fill shared by the SPF and FCFS prefill policies. `ordered`
// must already be in service order.
BatchPlan fill_prefill_budget(const std::vector<PrefillQueueEntry>& ordered, long token_budget,
                              bool skip_non_fitting) {
    BatchPlan plan;
    plan.phase = BatchPhase::Prefill;
    for (const PrefillQueueEntry& e : ordered) {
        if (plan.total_tokens + e.remaining <= token_budget) {
            plan.members.push_back({e.id, e.remaining});
            plan.total_tokens += e.remaining;
            continue;
        }
        if (plan.members.empty()) {
            // Head entry longer than the whole budget: take a budget-sized chunk.
            plan.members.push_back({e.id, token_budget});
            plan.total_tokens = token_budget;
            continue;
        }
        if (!skip_non_fitting) break;
    }
    return plan;
}

std::vector<DecodeCandidate> sorted_by_arrival(std::vector<DecodeCandidate> v) {
    std::sort(v.begin(), v.end(), [](const DecodeCandidate& a, const DecodeCandidate& b) {
        return std::tie(a.arrival_s, a.id) < std::tie(b.arrival_s, b.id);
    });
    return v;
}

}  // namespace

BatchPlan spf_schedule(const std::vector<PrefillQueueEntry>& queue, long token_budget,
                       double gamma, double now_s, bool skip_non_fitting) {
    if (token_budget < 1) throw std::invalid_argument("spf_schedule: token_budget must be >= 1");
    struct Scored {
        double score;
        PrefillQueueEntry entry;
    };
    std::vector<Scored> scored;
    scored.reserve(queue.size());
    for (const PrefillQueueEntry& e : queue) {
        const double age = now_s - e.arrival_s;
        scored.push_back({static_cast<double>(e.remaining) - gamma * age, e});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        return std::tie(a.score, a.entry.arrival_s, a.entry.id) <
               std::tie(b.score, b.entry.arrival_s, b.entry.id);
    });
    std::vector<PrefillQueueEntry> ordered;
    ordered.reserve(scored.size());
    for (const Scored& s : scored) ordered.push_back(s.entry);
    return fill_prefill_budget(ordered, token_budget, skip_non_fitting);
}

BatchPlan fcfs_prefill_schedule(const std::vector<PrefillQueueEntry>& queue, long token_budget) {
    if (token_budget < 1)
        throw std::invalid_argument("fcfs_prefill_schedule: token_budget must be >= 1");
    std::vector<PrefillQueueEntry> ordered = queue;
    std::sort(ordered.begin(), ordered.end(),
              [](const PrefillQueueEntry& a, const PrefillQueueEntry& b) {
                  return std::tie(a.arrival_s, a.id) < std::tie(b.arrival_s, b.id);
              });
    return fill_prefill_budget(ordered, token_budget, /*skip_non_fitting=*/false);
}

BatchPlan fcfs_decode_schedule(const std::vector<DecodeCandidate>& active, int max_batch) {
    BatchPlan plan;
    plan.phase = BatchPhase::Decode;
    const std::vector<DecodeCandidate> ordered = sorted_by_arrival(active);
    const std::size_t take = std::min<std::size_t>(ordered.size(),
                                                   max_batch < 0 ? 0 : static_cast<std::size_t>(max_batch));
    for (std::size_t i = 0; i < take; ++i) {
        plan.members.push_back({ordered[i].id, 1});
        plan.total_tokens += 1;
    }
    return plan;
}

BatchPlan chunked_mixed_schedule(const std::vector<PrefillQueueEntry>& prefill_queue,
                                 const std::vector<DecodeCandidate>& active_decodes,
                                 long token_budget, int max_batch, long chunk_size) {
    if (token_budget < 1)
        throw std::invalid_argument("chunked_mixed_schedule: token_budget must be >= 1");
    if (chunk_size < 1)
        throw std::invalid_argument("chunked_mixed_schedule: chunk_size must be >= 1");
    BatchPlan plan;
    plan.phase = BatchPhase::Mixed;

    const std::vector<DecodeCandidate> decodes = sorted_by_arrival(active_decodes);
    long budget_left = token_budget;
    std::size_t take = std::min<std::size_t>(decodes.size(),
                                             max_batch < 0 ? 0 : static_cast<std::size_t>(max_batch));
    take = std::min<std::size_t>(take, static_cast<std::size_t>(budget_left));
    for (std::size_t i = 0; i < take; ++i) {
        plan.members.push_back({decodes[i].id, 1});
        plan.total_tokens += 1;
        --budget_left;
    }

    std::vector<PrefillQueueEntry> ordered = prefill_queue;
    std::sort(ordered.begin(), ordered.end(),
              [](const PrefillQueueEntry& a, const PrefillQueueEntry& b) {
                  return std::tie(a.arrival_s, a.id) < std::tie(b.arrival_s, b.id);
              });
    for (const PrefillQueueEntry& e : ordered) {
        if (budget_left <= 0) break;
        const long tokens = std::min({e.remaining, chunk_size, budget_left});
        if (tokens <= 0) continue;
        plan.members.push_back({e.id, tokens});
        plan.total_tokens += tokens;
        budget_left -= tokens;
    }
    return plan;
}

}  // namespace nexus
