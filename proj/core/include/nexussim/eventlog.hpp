#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nexussim/metrics.hpp"

// Line-delimited simulation event log. The format is stable: replay tooling
// and the log-replay test oracle parse it back, so changes here are breaking.
//
// One record per line, seven tab-separated columns:
//   time_s  lane  event  members  r_p  kv_used  latency_s
// `members` is a comma-separated list of id:tokens:emitted triples ("-" when
// empty); `emitted` counts output tokens emitted for that request by this
// event. Doubles are printed with %.17g and round-trip exactly.

namespace nexus {

enum class LaneId { None, Prefill, Decode, Mixed, Transfer };
enum class EventKind { Arrival, Launch, Complete, Finish, Timeout };

const char* to_string(LaneId lane);
const char* to_string(EventKind kind);

struct EventMember {
    std::uint64_t id = 0;
    long tokens = 0;
    int emitted = 0;

    bool operator==(const EventMember&) const = default;
};

struct EventRecord {
    double time_s = 0;
    LaneId lane = LaneId::None;
    EventKind event = EventKind::Arrival;
    std::vector<EventMember> members;
    int r_p = 0;
    std::int64_t kv_used = 0;
    double latency_s = 0;

    bool operator==(const EventRecord&) const = default;
};

std::string to_line(const EventRecord& record);
EventRecord parse_event_line(const std::string& line, int line_no);

std::string serialize_event_log(const std::vector<EventRecord>& events);
void write_event_log(const std::string& path, const std::vector<EventRecord>& events);
std::vector<EventRecord> read_event_log(const std::string& path);

// Re-derives per-request metrics from a log alone: arrivals, token emissions
// (complete members with emitted > 0) and finishes carry everything needed.
MetricsReport replay_report(const std::vector<EventRecord>& events);

}  // namespace nexus
