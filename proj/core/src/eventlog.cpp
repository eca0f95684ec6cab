#include "nexussim/eventlog.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nexus {

const char* to_string(LaneId lane) {
    switch (lane) {
        case LaneId::None: return "-";
        case LaneId::Prefill: return "prefill";
        case LaneId::Decode: return "decode";
        case LaneId::Mixed: return "mixed";
        case LaneId::Transfer: return "xfer";
    }
    return "-";
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Arrival: return "arrival";
        case EventKind::Launch: return "launch";
        case EventKind::Complete: return "complete";
        case EventKind::Finish: return "finish";
        case EventKind::Timeout: return "timeout";
    }
    return "arrival";
}

namespace {

LaneId lane_from_string(const std::string& s, int line_no) {
    if (s == "-") return LaneId::None;
    if (s == "prefill") return LaneId::Prefill;
    if (s == "decode") return LaneId::Decode;
    if (s == "mixed") return LaneId::Mixed;
    if (s == "xfer") return LaneId::Transfer;
    throw std::runtime_error("event log line " + std::to_string(line_no) + ": unknown lane " + s);
}

EventKind event_from_string(const std::string& s, int line_no) {
    if (s == "arrival") return EventKind::Arrival;
    if (s == "launch") return EventKind::Launch;
    if (s == "complete") return EventKind::Complete;
    if (s == "finish") return EventKind::Finish;
    if (s == "timeout") return EventKind::Timeout;
    throw std::runtime_error("event log line " + std::to_string(line_no) + ": unknown event " + s);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

}  // namespace

std::string to_line(const EventRecord& r) {
    std::ostringstream os;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g\t", r.time_s);
    os << buf << to_string(r.lane) << '\t' << to_string(r.event) << '\t';
    if (r.members.empty()) {
        os << '-';
    } else {
        for (std::size_t i = 0; i < r.members.size(); ++i) {
            if (i) os << ',';
            std::snprintf(buf, sizeof(buf), "%llu:%ld:%d",
                          static_cast<unsigned long long>(r.members[i].id), r.members[i].tokens,
                          r.members[i].emitted);
            os << buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "\t%d\t%lld\t%.17g",
                  r.r_p, static_cast<long long>(r.kv_used), r.latency_s);
    os << buf;
    return os.str();
}

EventRecord parse_event_line(const std::string& line, int line_no) {
    const std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 7)
        throw std::runtime_error("event log line " + std::to_string(line_no) +
                                 ": expected 7 columns, got " + std::to_string(cols.size()));
    EventRecord r;
    r.time_s = std::strtod(cols[0].c_str(), nullptr);
    r.lane = lane_from_string(cols[1], line_no);
    r.event = event_from_string(cols[2], line_no);
    if (cols[3] != "-") {
        for (const std::string& part : split(cols[3], ',')) {
            EventMember m;
            unsigned long long id = 0;
            if (std::sscanf(part.c_str(), "%llu:%ld:%d", &id, &m.tokens, &m.emitted) != 3)
                throw std::runtime_error("event log line " + std::to_string(line_no) +
                                         ": malformed member '" + part + "'");
            m.id = id;
            r.members.push_back(m);
        }
    }
    r.r_p = std::atoi(cols[4].c_str());
    r.kv_used = std::strtoll(cols[5].c_str(), nullptr, 10);
    r.latency_s = std::strtod(cols[6].c_str(), nullptr);
    return r;
}

std::string serialize_event_log(const std::vector<EventRecord>& events) {
    std::ostringstream os;
    for (const EventRecord& e : events) os << to_line(e) << '\n';
    return os.str();
}

void write_event_log(const std::string& path, const std::vector<EventRecord>& events) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_event_log: cannot open " + path);
    out << serialize_event_log(events);
    if (!out) throw std::runtime_error("write_event_log: write failed for " + path);
}

std::vector<EventRecord> read_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_event_log: cannot open " + path);
    std::vector<EventRecord> events;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        events.push_back(parse_event_line(line, line_no));
    }
    return events;
}

MetricsReport replay_report(const std::vector<EventRecord>& events) {
    struct Partial {
        Request req;
        bool seen_arrival = false;
    };
    std::map<std::uint64_t, Partial> requests;
    for (const EventRecord& e : events) {
        switch (e.event) {
            case EventKind::Arrival: {
                for (const EventMember& m : e.members) {
                    Partial& p = requests[m.id];
                    p.req.id = m.id;
                    p.req.arrival_s = e.time_s;
                    p.seen_arrival = true;
                }
                break;
            }
            case EventKind::Complete: {
                for (const EventMember& m : e.members) {
                    Partial& p = requests[m.id];
                    for (int k = 0; k < m.emitted; ++k) {
                        if (p.req.token_times_s.empty()) p.req.first_token_s = e.time_s;
                        p.req.token_times_s.push_back(e.time_s);
                    }
                }
                break;
            }
            case EventKind::Finish: {
                for (const EventMember& m : e.members) {
                    Partial& p = requests[m.id];
                    p.req.finish_s = e.time_s;
                    p.req.output_len = static_cast<long>(p.req.token_times_s.size());
                    p.req.decoded_len = p.req.output_len;
                }
                break;
            }
            default:
                break;
        }
    }
    std::vector<RequestMetrics> per;
    for (auto& [id, p] : requests) {
        if (!p.seen_arrival || !p.req.completed()) continue;
        per.push_back(compute_request_metrics(p.req));
    }
    return aggregate(std::move(per));
}

}  // namespace nexus
