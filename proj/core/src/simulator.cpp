#include "nexussim/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nexussim/opcost.hpp"
#include "nexussim/schedulers.hpp"

namespace nexus {

const char* to_string(EngineKind kind) {
    switch (kind) {
        case EngineKind::NexusDisagg: return "nexus";
        case EngineKind::MonolithicChunked: return "monolithic";
        case EngineKind::StaticPartition: return "static";
        case EngineKind::EngineLevelDisagg: return "engine-disagg";
    }
    return "unknown";
}

std::string decision_log_text(const std::vector<DecisionLogEntry>& entries) {
    std::ostringstream os;
    os << "# time_s\tkv_frac\tmode\tcandidate_r_p\tapplied_r_p\tswitched\tqueries\n";
    char buf[160];
    for (const DecisionLogEntry& d : entries) {
        std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%s\t%d\t%d\t%d\t%d\n", d.time_s, d.kv_frac,
                      to_string(d.mode), d.candidate_r_p, d.applied_r_p, d.switched ? 1 : 0,
                      d.queries);
        os << buf;
    }
    return os.str();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RuntimeRequest {
    Request req;
    bool admitted = false;   // KV footprint reserved
    bool in_flight = false;  // member of an in-flight batch
    // EngineLevelDisagg bookkeeping.
    bool transferred = false;
    bool on_decode_device = false;
};

struct Lane {
    bool busy = false;
    double done_at = 0;
    std::vector<BatchMember> decode_members;
    std::vector<BatchMember> prefill_members;
    std::vector<OperatorWorkload> ops;
    PhaseLatencyBreakdown bd;
    int launch_r_p = 0;
};

void validate_or_throw(const SimConfig& cfg) {
    const auto errors = validate_config(cfg.model, cfg.gpu, cfg.ctrl, cfg.profile);
    if (!errors.empty()) throw std::invalid_argument("invalid simulation config: " + describe(errors));
    if (cfg.engine.kind == EngineKind::StaticPartition &&
        (cfg.engine.static_r_p < 1 || cfg.engine.static_r_p > 99))
        throw std::invalid_argument("static partition share must lie in [1, 99]");
}

// Shared driver state: request table, clock, logs, KV ledger for one device.
class SimBase {
public:
    SimBase(const SimConfig& cfg, const std::vector<Request>& trace) : cfg_(cfg) {
        validate_or_throw(cfg);
        requests_.reserve(trace.size());
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const Request& r = trace[i];
            if (i > 0 && r.arrival_s < trace[i - 1].arrival_s)
                throw std::invalid_argument("trace must be sorted by arrival time");
            if (r.prompt_len < 1 || r.output_len < 1)
                throw std::invalid_argument("trace token counts must be >= 1");
            if (footprint_bytes(r) > cfg.gpu.kv_capacity_bytes)
                throw std::invalid_argument("request " + std::to_string(r.id) +
                                            ": KV footprint exceeds device capacity");
            if (by_id_.count(r.id))
                throw std::invalid_argument("duplicate request id in trace");
            by_id_[r.id] = i;
            RuntimeRequest rt;
            rt.req = r;
            rt.req.prefilled_len = 0;
            rt.req.decoded_len = 0;
            requests_.push_back(std::move(rt));
        }
    }

protected:
    std::int64_t footprint_bytes(const Request& r) const {
        return (r.prompt_len + r.output_len) * cfg_.model.kv_bytes_per_token;
    }

    RuntimeRequest& by_id(std::uint64_t id) { return requests_[by_id_.at(id)]; }

    void log_event(LaneId lane, EventKind kind, std::vector<EventMember> members, int r_p,
                   std::int64_t kv_used, double latency) {
        events_.push_back({clock_, lane, kind, std::move(members), r_p, kv_used, latency});
    }

    bool consume_event_budget() {
        ++events_processed_;
        return events_processed_ <= cfg_.engine.max_events;
    }

    SimResult finalize(bool timed_out) {
        SimResult result;
        result.timed_out = timed_out;
        result.sim_end_s = clock_;
        result.requests.reserve(requests_.size());
        std::size_t completed = 0;
        for (const RuntimeRequest& rt : requests_) {
            result.requests.push_back(rt.req);
            if (rt.req.completed()) ++completed;
        }
        if (completed > 0) result.metrics = report_from_requests(result.requests);
        result.events = std::move(events_);
        result.decisions = std::move(decisions_);
        return result;
    }

    const SimConfig& cfg_;
    std::vector<RuntimeRequest> requests_;
    std::map<std::uint64_t, std::size_t> by_id_;
    std::vector<std::size_t> active_;  // arrived, not finished
    std::size_t next_arrival_ = 0;
    double clock_ = 0;
    std::uint64_t events_processed_ = 0;
    std::vector<EventRecord> events_;
    std::vector<DecisionLogEntry> decisions_;
};

// ---------------------------------------------------------------------------
// Intra-GPU engines: NexusDisagg, StaticPartition, MonolithicChunked.
// ---------------------------------------------------------------------------
class IntraGpuSim : public SimBase {
public:
    IntraGpuSim(const SimConfig& cfg, const std::vector<Request>& trace)
        : SimBase(cfg, trace),
          controller_(initial_state(cfg), cfg.ctrl),
          dynamic_(cfg.engine.kind == EngineKind::NexusDisagg),
          monolithic_(cfg.engine.kind == EngineKind::MonolithicChunked) {}

    SimResult run() {
        bool timed_out = false;
        for (;;) {
            try_launches();
            const double t_prefill = prefill_.busy ? prefill_.done_at : kInf;
            const double t_decode = decode_.busy ? decode_.done_at : kInf;
            const double t_arrival =
                next_arrival_ < requests_.size() ? requests_[next_arrival_].req.arrival_s : kInf;
            const double t = std::min({t_prefill, t_decode, t_arrival});
            if (t == kInf) break;
            if (t > cfg_.engine.timeout_sim_s || !consume_event_budget()) {
                timed_out = true;
                log_event(LaneId::None, EventKind::Timeout, {}, current_r_p(), kv_used_, 0);
                break;
            }
            clock_ = t;
            // Fixed priority on time ties keeps replays deterministic.
            if (prefill_.busy && prefill_.done_at == t) {
                complete_lane(prefill_, monolithic_ ? LaneId::Mixed : LaneId::Prefill);
            } else if (decode_.busy && decode_.done_at == t) {
                complete_lane(decode_, LaneId::Decode);
            } else {
                RuntimeRequest& rt = requests_[next_arrival_++];
                active_.push_back(by_id_.at(rt.req.id));
                log_event(LaneId::None, EventKind::Arrival, {{rt.req.id, 0, 0}}, current_r_p(),
                          kv_used_, 0);
            }
        }
        return finalize(timed_out);
    }

private:
    static PartitionState initial_state(const SimConfig& cfg) {
        PartitionState s;
        if (cfg.engine.kind == EngineKind::StaticPartition) {
            s.r_p = cfg.engine.static_r_p;
            s.r_d = 100 - s.r_p;
            s.last_applied_r_p = s.r_p;
        }
        return s;
    }

    int current_r_p() const {
        return monolithic_ ? 100 : controller_.state().r_p;
    }

    // ---- candidate queues -------------------------------------------------

    std::vector<PrefillQueueEntry> prefill_entries() const {
        std::vector<PrefillQueueEntry> entries;
        for (std::size_t idx : active_) {
            const RuntimeRequest& rt = requests_[idx];
            if (rt.in_flight) continue;
            const long remaining = rt.req.prompt_len - rt.req.prefilled_len;
            if (remaining > 0) entries.push_back({rt.req.id, remaining, rt.req.arrival_s});
        }
        return entries;
    }

    std::vector<DecodeCandidate> decode_candidates() const {
        std::vector<DecodeCandidate> cands;
        for (std::size_t idx : active_) {
            const RuntimeRequest& rt = requests_[idx];
            if (rt.in_flight) continue;
            if (rt.req.prefilled_len == rt.req.prompt_len && rt.req.decoded_len < rt.req.output_len)
                cands.push_back({rt.req.id, rt.req.arrival_s});
        }
        return cands;
    }

    // Admits plan members in order. New requests reserve their whole KV
    // footprint; the first one that does not fit stops further prefill
    // admission this tick (decode members are pre-reserved and always pass).
    std::vector<BatchMember> filter_admissible(const std::vector<BatchMember>& members,
                                               bool commit) {
        std::vector<BatchMember> kept;
        std::int64_t reserved = kv_reserved_;
        for (const BatchMember& m : members) {
            RuntimeRequest& rt = by_id(m.id);
            const bool is_prefill_member = rt.req.prefilled_len < rt.req.prompt_len;
            if (!is_prefill_member || rt.admitted) {
                kept.push_back(m);
                continue;
            }
            const std::int64_t need = footprint_bytes(rt.req);
            if (reserved + need > cfg_.gpu.kv_capacity_bytes) break;
            reserved += need;
            if (commit) {
                rt.admitted = true;
                kv_reserved_ = reserved;
            }
            kept.push_back(m);
        }
        return kept;
    }

    std::vector<long> decode_context_lens(const std::vector<BatchMember>& members) {
        std::vector<long> lens;
        lens.reserve(members.size());
        for (const BatchMember& m : members) {
            const Request& r = by_id(m.id).req;
            lens.push_back(r.prompt_len + r.decoded_len);
        }
        return lens;
    }

    std::vector<PrefillChunk> prefill_chunks(const std::vector<BatchMember>& members) {
        std::vector<PrefillChunk> chunks;
        chunks.reserve(members.size());
        for (const BatchMember& m : members) {
            const Request& r = by_id(m.id).req;
            chunks.push_back({m.tokens, r.prefilled_len + m.tokens});
        }
        return chunks;
    }

    // ---- partition control --------------------------------------------------

    std::vector<OperatorWorkload> provisional_prefill_ops() {
        const auto entries = prefill_entries();
        if (entries.empty()) return {};
        BatchPlan plan = cfg_.engine.prefill_policy == PrefillPolicy::Spf
                             ? spf_schedule(entries, cfg_.ctrl.token_budget, cfg_.ctrl.gamma, clock_)
                             : fcfs_prefill_schedule(entries, cfg_.ctrl.token_budget);
        const auto kept = filter_admissible(plan.members, /*commit=*/false);
        if (kept.empty()) return {};
        return prefill_batch_workloads(cfg_.model, prefill_chunks(kept));
    }

    std::vector<OperatorWorkload> provisional_decode_ops() {
        const auto cands = decode_candidates();
        if (cands.empty()) return {};
        BatchPlan plan = fcfs_decode_schedule(cands, cfg_.ctrl.max_decode_batch);
        if (plan.empty()) return {};
        return decode_op_workloads(cfg_.model, decode_context_lens(plan.members));
    }

    // Consults the partition controller ahead of a lane launch. The launching
    // lane contributes the batch it is about to run; the other lane's model is
    // its in-flight batch, or its would-be next batch when idle.
    PartitionDecision controller_decide(Phase launching,
                                        const std::vector<OperatorWorkload>& launching_ops) {
        const std::vector<OperatorWorkload> prefill_ops =
            prefill_.busy ? prefill_.ops
                          : (launching == Phase::Prefill ? launching_ops : provisional_prefill_ops());
        const std::vector<OperatorWorkload> decode_ops =
            decode_.busy ? decode_.ops
                         : (launching == Phase::Decode ? launching_ops : provisional_decode_ops());

        // Planning latencies are isolated: the slack bound CostModel(other,
        // 100) is the all-SMs ideal, so the walked evaluations must come from
        // the same family or contention alone could exceed the slack at every
        // share. Contention enters the actual launch costing instead.
        PhaseModel prefill_model;
        prefill_model.active = !prefill_ops.empty();
        prefill_model.latency_at = [this, &prefill_ops](int share) {
            return phase_latency_isolated(prefill_ops, share / 100.0, cfg_.gpu, cfg_.profile)
                .total_s;
        };
        PhaseModel decode_model;
        decode_model.active = !decode_ops.empty();
        decode_model.latency_at = [this, &decode_ops](int share) {
            return phase_latency_isolated(decode_ops, share / 100.0, cfg_.gpu, cfg_.profile)
                .total_s;
        };

        const PartitionDecision d =
            controller_.decide(kv_used_, cfg_.gpu.kv_capacity_bytes, prefill_model, decode_model);
        decisions_.push_back({clock_,
                              static_cast<double>(kv_used_) /
                                  static_cast<double>(cfg_.gpu.kv_capacity_bytes),
                              d.mode, d.candidate_r_p, d.r_p, d.switched, d.infeasible,
                              d.iterations_searched});
        return d;
    }

    // ---- launches -----------------------------------------------------------

    void try_launches() {
        if (monolithic_) {
            if (!prefill_.busy) launch_mixed();
            return;
        }
        if (!decode_.busy) launch_decode();
        if (!prefill_.busy) launch_prefill();
    }

    void mark_in_flight(const std::vector<BatchMember>& members, bool value) {
        for (const BatchMember& m : members) by_id(m.id).in_flight = value;
    }

    std::vector<EventMember> launch_members(const Lane& lane) {
        std::vector<EventMember> ev;
        for (const BatchMember& m : lane.decode_members) ev.push_back({m.id, m.tokens, 0});
        for (const BatchMember& m : lane.prefill_members) ev.push_back({m.id, m.tokens, 0});
        return ev;
    }

    bool launch_decode() {
        const auto cands = decode_candidates();
        if (cands.empty()) return false;
        BatchPlan plan = fcfs_decode_schedule(cands, cfg_.ctrl.max_decode_batch);
        if (plan.empty()) return false;
        auto ops = decode_op_workloads(cfg_.model, decode_context_lens(plan.members));

        int r_p = controller_.state().r_p;
        if (dynamic_) r_p = controller_decide(Phase::Decode, ops).r_p;
        const double share = (100 - r_p) / 100.0;

        // In-flight prefill batches contend at their launch-time split; the
        // new split only applies to batches launched from now on.
        decode_.bd = prefill_.busy
                         ? decode_latency_contended(ops, share, &prefill_.bd, prefill_.ops,
                                                    cfg_.gpu, cfg_.profile)
                         : phase_latency_isolated(ops, share, cfg_.gpu, cfg_.profile);
        decode_.busy = true;
        decode_.done_at = clock_ + decode_.bd.total_s;
        decode_.decode_members = plan.members;
        decode_.prefill_members.clear();
        decode_.ops = std::move(ops);
        decode_.launch_r_p = r_p;
        mark_in_flight(decode_.decode_members, true);
        log_event(LaneId::Decode, EventKind::Launch, launch_members(decode_), r_p, kv_used_,
                  decode_.bd.total_s);
        return true;
    }

    bool launch_prefill() {
        const auto entries = prefill_entries();
        if (entries.empty()) return false;
        BatchPlan plan = cfg_.engine.prefill_policy == PrefillPolicy::Spf
                             ? spf_schedule(entries, cfg_.ctrl.token_budget, cfg_.ctrl.gamma, clock_)
                             : fcfs_prefill_schedule(entries, cfg_.ctrl.token_budget);
        const auto kept = filter_admissible(plan.members, /*commit=*/true);
        if (kept.empty()) return false;
        auto ops = prefill_batch_workloads(cfg_.model, prefill_chunks(kept));

        int r_p = controller_.state().r_p;
        if (dynamic_) r_p = controller_decide(Phase::Prefill, ops).r_p;

        // Prefill is costed at peak bandwidth; contention lands on decode.
        prefill_.bd = phase_latency_isolated(ops, r_p / 100.0, cfg_.gpu, cfg_.profile);
        prefill_.busy = true;
        prefill_.done_at = clock_ + prefill_.bd.total_s;
        prefill_.prefill_members = kept;
        prefill_.decode_members.clear();
        prefill_.ops = std::move(ops);
        prefill_.launch_r_p = r_p;
        mark_in_flight(kept, true);
        log_event(LaneId::Prefill, EventKind::Launch, launch_members(prefill_), r_p, kv_used_,
                  prefill_.bd.total_s);
        return true;
    }

    bool launch_mixed() {
        const auto entries = prefill_entries();
        const auto cands = decode_candidates();
        if (entries.empty() && cands.empty()) return false;
        BatchPlan plan = chunked_mixed_schedule(entries, cands, cfg_.ctrl.token_budget,
                                                cfg_.ctrl.max_decode_batch, cfg_.ctrl.chunk_size);
        if (plan.empty()) return false;

        std::vector<BatchMember> decode_part, prefill_part;
        for (const BatchMember& m : plan.members) {
            const RuntimeRequest& rt = by_id(m.id);
            if (rt.req.prefilled_len == rt.req.prompt_len)
                decode_part.push_back(m);
            else
                prefill_part.push_back(m);
        }
        prefill_part = filter_admissible(prefill_part, /*commit=*/true);
        if (decode_part.empty() && prefill_part.empty()) return false;

        auto ops = mixed_batch_workloads(cfg_.model, prefill_chunks(prefill_part),
                                         decode_context_lens(decode_part));
        // One fused batch over the whole GPU; every decode member's next token
        // waits for the prefill chunks riding in the same iteration.
        prefill_.bd = phase_latency_isolated(ops, 1.0, cfg_.gpu, cfg_.profile);
        prefill_.busy = true;
        prefill_.done_at = clock_ + prefill_.bd.total_s;
        prefill_.decode_members = std::move(decode_part);
        prefill_.prefill_members = std::move(prefill_part);
        prefill_.ops = std::move(ops);
        prefill_.launch_r_p = 100;
        mark_in_flight(prefill_.decode_members, true);
        mark_in_flight(prefill_.prefill_members, true);
        log_event(LaneId::Mixed, EventKind::Launch, launch_members(prefill_), 100, kv_used_,
                  prefill_.bd.total_s);
        return true;
    }

    // ---- completions ----------------------------------------------------------

    void complete_lane(Lane& lane, LaneId lane_id) {
        const double latency = lane.bd.total_s;
        const int r_p = lane.launch_r_p;
        std::vector<EventMember> ev;
        std::vector<std::uint64_t> finished;

        for (const BatchMember& m : lane.decode_members) {
            RuntimeRequest& rt = by_id(m.id);
            rt.in_flight = false;
            rt.req.decoded_len += 1;
            rt.req.token_times_s.push_back(clock_);
            kv_used_ += cfg_.model.kv_bytes_per_token;
            ev.push_back({m.id, m.tokens, 1});
            if (rt.req.decoded_len == rt.req.output_len) finished.push_back(m.id);
        }
        for (const BatchMember& m : lane.prefill_members) {
            RuntimeRequest& rt = by_id(m.id);
            rt.in_flight = false;
            rt.req.prefilled_len += m.tokens;
            kv_used_ += m.tokens * cfg_.model.kv_bytes_per_token;
            int emitted = 0;
            if (rt.req.prefilled_len == rt.req.prompt_len) {
                // The finished prompt yields the first output token, whose KV
                // entry joins the cache for the decode steps that follow.
                emitted = 1;
                rt.req.decoded_len = 1;
                rt.req.first_token_s = clock_;
                rt.req.token_times_s.push_back(clock_);
                kv_used_ += cfg_.model.kv_bytes_per_token;
                if (rt.req.output_len == 1) finished.push_back(m.id);
            }
            ev.push_back({m.id, m.tokens, emitted});
        }
        lane.busy = false;
        lane.decode_members.clear();
        lane.prefill_members.clear();
        log_event(lane_id, EventKind::Complete, std::move(ev), r_p, kv_used_, latency);
        for (std::uint64_t id : finished) finish_request(id, r_p);
    }

    void finish_request(std::uint64_t id, int r_p) {
        RuntimeRequest& rt = by_id(id);
        rt.req.finish_s = clock_;
        kv_used_ -= (rt.req.prompt_len + rt.req.decoded_len) * cfg_.model.kv_bytes_per_token;
        kv_reserved_ -= footprint_bytes(rt.req);
        rt.admitted = false;
        const std::size_t idx = by_id_.at(id);
        active_.erase(std::remove(active_.begin(), active_.end(), idx), active_.end());
        log_event(LaneId::None, EventKind::Finish, {{id, 0, 0}}, r_p, kv_used_, 0);
    }

    Lane prefill_;
    Lane decode_;
    std::int64_t kv_used_ = 0;
    std::int64_t kv_reserved_ = 0;
    PartitionController controller_;
    const bool dynamic_;
    const bool monolithic_;
};

// ---------------------------------------------------------------------------
// Engine-level disaggregation: two devices and a KV handoff.
// ---------------------------------------------------------------------------
class EngineDisaggSim : public SimBase {
public:
    EngineDisaggSim(const SimConfig& cfg, const std::vector<Request>& trace)
        : SimBase(cfg, trace) {}

    SimResult run() {
        bool timed_out = false;
        for (;;) {
            try_launches();
            const double t_prefill = prefill_.busy ? prefill_.done_at : kInf;
            const double t_decode = decode_.busy ? decode_.done_at : kInf;
            const double t_transfer = next_transfer_time();
            const double t_arrival =
                next_arrival_ < requests_.size() ? requests_[next_arrival_].req.arrival_s : kInf;
            const double t = std::min({t_prefill, t_decode, t_transfer, t_arrival});
            if (t == kInf) break;
            if (t > cfg_.engine.timeout_sim_s || !consume_event_budget()) {
                timed_out = true;
                log_event(LaneId::None, EventKind::Timeout, {}, 0, total_kv(), 0);
                break;
            }
            clock_ = t;
            if (prefill_.busy && prefill_.done_at == t) {
                complete_prefill();
            } else if (decode_.busy && decode_.done_at == t) {
                complete_decode();
            } else if (t_transfer == t) {
                complete_transfer();
            } else {
                RuntimeRequest& rt = requests_[next_arrival_++];
                active_.push_back(by_id_.at(rt.req.id));
                log_event(LaneId::None, EventKind::Arrival, {{rt.req.id, 0, 0}}, 0, total_kv(), 0);
            }
        }
        return finalize(timed_out);
    }

private:
    struct Transfer {
        double done_at;
        std::uint64_t id;
    };

    std::int64_t total_kv() const { return kv_prefill_dev_ + kv_decode_dev_; }

    double next_transfer_time() const {
        double best = kInf;
        for (const Transfer& t : transfers_) best = std::min(best, t.done_at);
        return best;
    }

    void try_launches() {
        admit_from_buffer();
        if (!decode_.busy) launch_decode_device();
        if (!prefill_.busy) launch_prefill_device();
    }

    void launch_prefill_device() {
        std::vector<PrefillQueueEntry> entries;
        for (std::size_t idx : active_) {
            const RuntimeRequest& rt = requests_[idx];
            if (rt.in_flight || rt.transferred || rt.on_decode_device) continue;
            const long remaining = rt.req.prompt_len - rt.req.prefilled_len;
            if (remaining > 0) entries.push_back({rt.req.id, remaining, rt.req.arrival_s});
        }
        if (entries.empty()) return;
        BatchPlan plan = cfg_.engine.prefill_policy == PrefillPolicy::Spf
                             ? spf_schedule(entries, cfg_.ctrl.token_budget, cfg_.ctrl.gamma, clock_)
                             : fcfs_prefill_schedule(entries, cfg_.ctrl.token_budget);
        // Prefill-side admission reserves the prompt bytes only; the decode
        // device reserves the full footprint at handoff.
        std::vector<BatchMember> kept;
        for (const BatchMember& m : plan.members) {
            RuntimeRequest& rt = by_id(m.id);
            if (!rt.admitted) {
                const std::int64_t need = rt.req.prompt_len * cfg_.model.kv_bytes_per_token;
                if (reserved_prefill_dev_ + need > cfg_.gpu.kv_capacity_bytes) break;
                reserved_prefill_dev_ += need;
                rt.admitted = true;
            }
            kept.push_back(m);
        }
        if (kept.empty()) return;

        std::vector<PrefillChunk> chunks;
        for (const BatchMember& m : kept) {
            const Request& r = by_id(m.id).req;
            chunks.push_back({m.tokens, r.prefilled_len + m.tokens});
        }
        prefill_.ops = prefill_batch_workloads(cfg_.model, chunks);
        prefill_.bd = phase_latency_isolated(prefill_.ops, 1.0, cfg_.gpu, cfg_.profile);
        prefill_.busy = true;
        prefill_.done_at = clock_ + prefill_.bd.total_s;
        prefill_.prefill_members = kept;
        for (const BatchMember& m : kept) by_id(m.id).in_flight = true;
        std::vector<EventMember> ev;
        for (const BatchMember& m : kept) ev.push_back({m.id, m.tokens, 0});
        log_event(LaneId::Prefill, EventKind::Launch, std::move(ev), 100, total_kv(),
                  prefill_.bd.total_s);
    }

    void complete_prefill() {
        const double latency = prefill_.bd.total_s;
        std::vector<EventMember> ev;
        std::vector<std::uint64_t> finished;
        for (const BatchMember& m : prefill_.prefill_members) {
            RuntimeRequest& rt = by_id(m.id);
            rt.in_flight = false;
            rt.req.prefilled_len += m.tokens;
            kv_prefill_dev_ += m.tokens * cfg_.model.kv_bytes_per_token;
            int emitted = 0;
            if (rt.req.prefilled_len == rt.req.prompt_len) {
                emitted = 1;
                rt.req.decoded_len = 1;
                rt.req.first_token_s = clock_;
                rt.req.token_times_s.push_back(clock_);
                if (rt.req.output_len == 1) {
                    finished.push_back(m.id);
                } else {
                    start_transfer(rt);
                }
            }
            ev.push_back({m.id, m.tokens, emitted});
        }
        prefill_.busy = false;
        prefill_.prefill_members.clear();
        log_event(LaneId::Prefill, EventKind::Complete, std::move(ev), 100, total_kv(), latency);
        for (std::uint64_t id : finished) {
            RuntimeRequest& rt = by_id(id);
            rt.req.finish_s = clock_;
            kv_prefill_dev_ -= rt.req.prompt_len * cfg_.model.kv_bytes_per_token;
            reserved_prefill_dev_ -= rt.req.prompt_len * cfg_.model.kv_bytes_per_token;
            const std::size_t idx = by_id_.at(id);
            active_.erase(std::remove(active_.begin(), active_.end(), idx), active_.end());
            log_event(LaneId::None, EventKind::Finish, {{id, 0, 0}}, 100, total_kv(), 0);
        }
    }

    void start_transfer(RuntimeRequest& rt) {
        const double bytes =
            static_cast<double>(rt.req.prompt_len) *
            static_cast<double>(cfg_.model.kv_bytes_per_token);
        double duration = cfg_.engine.transfer_base_s;
        if (cfg_.engine.transfer_bandwidth_fraction > 0)
            duration += bytes / (cfg_.engine.transfer_bandwidth_fraction * cfg_.gpu.peak_bandwidth);
        transfers_.push_back({clock_ + duration, rt.req.id});
        log_event(LaneId::Transfer, EventKind::Launch, {{rt.req.id, rt.req.prompt_len, 0}}, 100,
                  total_kv(), duration);
    }

    void complete_transfer() {
        // Deterministic pick: earliest completion, lowest id on ties.
        std::size_t best = 0;
        for (std::size_t i = 1; i < transfers_.size(); ++i) {
            if (transfers_[i].done_at < transfers_[best].done_at ||
                (transfers_[i].done_at == transfers_[best].done_at &&
                 transfers_[i].id < transfers_[best].id))
                best = i;
        }
        const Transfer t = transfers_[best];
        transfers_.erase(transfers_.begin() + static_cast<std::ptrdiff_t>(best));
        RuntimeRequest& rt = by_id(t.id);
        rt.transferred = true;
        // Source KV leaves the prefill device once the copy lands.
        kv_prefill_dev_ -= rt.req.prompt_len * cfg_.model.kv_bytes_per_token;
        reserved_prefill_dev_ -= rt.req.prompt_len * cfg_.model.kv_bytes_per_token;
        transfer_buffer_.push_back(t.id);
        log_event(LaneId::Transfer, EventKind::Complete, {{t.id, rt.req.prompt_len, 0}}, 100,
                  total_kv(), 0);
        admit_from_buffer();
    }

    void admit_from_buffer() {
        // FIFO admission onto the decode device; stalls when its KV is full.
        while (!transfer_buffer_.empty()) {
            const std::uint64_t id = transfer_buffer_.front();
            RuntimeRequest& rt = by_id(id);
            const std::int64_t need = footprint_bytes(rt.req);
            if (reserved_decode_dev_ + need > cfg_.gpu.kv_capacity_bytes) break;
            reserved_decode_dev_ += need;
            kv_decode_dev_ += (rt.req.prompt_len + 1) * cfg_.model.kv_bytes_per_token;
            rt.on_decode_device = true;
            transfer_buffer_.erase(transfer_buffer_.begin());
        }
    }

    void launch_decode_device() {
        std::vector<DecodeCandidate> cands;
        for (std::size_t idx : active_) {
            const RuntimeRequest& rt = requests_[idx];
            if (!rt.on_decode_device || rt.in_flight) continue;
            if (rt.req.decoded_len < rt.req.output_len)
                cands.push_back({rt.req.id, rt.req.arrival_s});
        }
        if (cands.empty()) return;
        BatchPlan plan = fcfs_decode_schedule(cands, cfg_.ctrl.max_decode_batch);
        if (plan.empty()) return;
        std::vector<long> lens;
        for (const BatchMember& m : plan.members) {
            const Request& r = by_id(m.id).req;
            lens.push_back(r.prompt_len + r.decoded_len);
        }
        decode_.ops = decode_op_workloads(cfg_.model, lens);
        decode_.bd = phase_latency_isolated(decode_.ops, 1.0, cfg_.gpu, cfg_.profile);
        decode_.busy = true;
        decode_.done_at = clock_ + decode_.bd.total_s;
        decode_.decode_members = plan.members;
        for (const BatchMember& m : plan.members) by_id(m.id).in_flight = true;
        std::vector<EventMember> ev;
        for (const BatchMember& m : plan.members) ev.push_back({m.id, m.tokens, 0});
        log_event(LaneId::Decode, EventKind::Launch, std::move(ev), 0, total_kv(),
                  decode_.bd.total_s);
    }

    void complete_decode() {
        const double latency = decode_.bd.total_s;
        std::vector<EventMember> ev;
        std::vector<std::uint64_t> finished;
        for (const BatchMember& m : decode_.decode_members) {
            RuntimeRequest& rt = by_id(m.id);
            rt.in_flight = false;
            rt.req.decoded_len += 1;
            rt.req.token_times_s.push_back(clock_);
            kv_decode_dev_ += cfg_.model.kv_bytes_per_token;
            ev.push_back({m.id, 1, 1});
            if (rt.req.decoded_len == rt.req.output_len) finished.push_back(m.id);
        }
        decode_.busy = false;
        decode_.decode_members.clear();
        log_event(LaneId::Decode, EventKind::Complete, std::move(ev), 0, total_kv(), latency);
        for (std::uint64_t id : finished) {
            RuntimeRequest& rt = by_id(id);
            rt.req.finish_s = clock_;
            kv_decode_dev_ -=
                (rt.req.prompt_len + rt.req.decoded_len) * cfg_.model.kv_bytes_per_token;
            reserved_decode_dev_ -= footprint_bytes(rt.req);
            const std::size_t idx = by_id_.at(id);
            active_.erase(std::remove(active_.begin(), active_.end(), idx), active_.end());
            log_event(LaneId::None, EventKind::Finish, {{id, 0, 0}}, 0, total_kv(), 0);
        }
    }

    Lane prefill_;
    Lane decode_;
    std::vector<Transfer> transfers_;
    std::vector<std::uint64_t> transfer_buffer_;
    std::int64_t kv_prefill_dev_ = 0;
    std::int64_t kv_decode_dev_ = 0;
    std::int64_t reserved_prefill_dev_ = 0;
    std::int64_t reserved_decode_dev_ = 0;
};

}  // namespace

SimResult run(const SimConfig& cfg, const std::vector<Request>& trace) {
    switch (cfg.engine.kind) {
        case EngineKind::NexusDisagg:
        case EngineKind::StaticPartition:
        case EngineKind::MonolithicChunked:
            return IntraGpuSim(cfg, trace).run();
        case EngineKind::EngineLevelDisagg:
            return EngineDisaggSim(cfg, trace).run();
    }
    throw std::invalid_argument("unknown engine kind");
}

}  // namespace nexus
