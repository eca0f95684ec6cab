#include "nexussim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nexus {

RequestMetrics compute_request_metrics(const Request& req) {
    if (!req.completed() || !req.first_token_s.has_value() || req.token_times_s.empty())
        throw std::invalid_argument("compute_request_metrics: request not completed");
    RequestMetrics m;
    m.id = req.id;
    m.arrival_s = req.arrival_s;
    m.finish_s = *req.finish_s;
    m.ttft_s = *req.first_token_s - req.arrival_s;
    m.e2e_s = *req.finish_s - req.arrival_s;
    m.output_len = static_cast<long>(req.token_times_s.size());
    m.normalized_s_per_token = m.e2e_s / static_cast<double>(m.output_len);
    m.tbt_s.reserve(req.token_times_s.size() - 1);
    for (std::size_t i = 1; i < req.token_times_s.size(); ++i)
        m.tbt_s.push_back(req.token_times_s[i] - req.token_times_s[i - 1]);
    return m;
}

double percentile_nearest_rank(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return values[rank - 1];
}

namespace {

Aggregate make_aggregate(const std::vector<double>& values) {
    Aggregate a;
    a.count = values.size();
    if (values.empty()) return a;
    a.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    a.p50 = percentile_nearest_rank(values, 50);
    a.p95 = percentile_nearest_rank(values, 95);
    a.p99 = percentile_nearest_rank(values, 99);
    return a;
}

}  // namespace

MetricsReport aggregate(std::vector<RequestMetrics> reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate: no completed requests");
    std::sort(reports.begin(), reports.end(),
              [](const RequestMetrics& a, const RequestMetrics& b) { return a.id < b.id; });

    MetricsReport out;
    std::vector<double> ttft, e2e, normalized, pooled_tbt, per_req_mean_tbt;
    double first_arrival = reports.front().arrival_s;
    double last_finish = reports.front().finish_s;
    for (const RequestMetrics& m : reports) {
        ttft.push_back(m.ttft_s);
        e2e.push_back(m.e2e_s);
        normalized.push_back(m.normalized_s_per_token);
        first_arrival = std::min(first_arrival, m.arrival_s);
        last_finish = std::max(last_finish, m.finish_s);
        if (!m.tbt_s.empty()) {
            double sum = 0;
            for (double gap : m.tbt_s) {
                pooled_tbt.push_back(gap);
                sum += gap;
            }
            per_req_mean_tbt.push_back(sum / static_cast<double>(m.tbt_s.size()));
        }
    }
    out.ttft = make_aggregate(ttft);
    out.e2e = make_aggregate(e2e);
    out.normalized = make_aggregate(normalized);
    out.tbt_pooled = make_aggregate(pooled_tbt);
    out.tbt_per_request_mean = make_aggregate(per_req_mean_tbt);
    out.completed = reports.size();
    out.makespan_s = last_finish - first_arrival;
    out.throughput_rps =
        out.makespan_s > 0 ? static_cast<double>(out.completed) / out.makespan_s : 0.0;
    out.per_request = std::move(reports);
    return out;
}

MetricsReport report_from_requests(const std::vector<Request>& requests) {
    std::vector<RequestMetrics> per;
    per.reserve(requests.size());
    for (const Request& r : requests)
        if (r.completed()) per.push_back(compute_request_metrics(r));
    return aggregate(std::move(per));
}

namespace {

void json_aggregate(std::ostringstream& os, const char* name, const Aggregate& a) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "  \"%s\": {\"mean\": %.17g, \"p50\": %.17g, \"p95\": %.17g, "
                  "\"p99\": %.17g, \"count\": %zu}",
                  name, a.mean, a.p50, a.p95, a.p99, a.count);
    os << buf;
}

}  // namespace

std::string summary_json(const MetricsReport& report, const std::string& engine) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"engine\": \"" << engine << "\",\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "  \"completed\": %zu,\n  \"makespan_s\": %.17g,\n"
                  "  \"throughput_rps\": %.17g,\n",
                  report.completed, report.makespan_s, report.throughput_rps);
    os << buf;
    json_aggregate(os, "ttft_s", report.ttft);
    os << ",\n";
    json_aggregate(os, "tbt_pooled_s", report.tbt_pooled);
    os << ",\n";
    json_aggregate(os, "tbt_per_request_mean_s", report.tbt_per_request_mean);
    os << ",\n";
    json_aggregate(os, "e2e_s", report.e2e);
    os << ",\n";
    json_aggregate(os, "normalized_s_per_token", report.normalized);
    os << "\n}\n";
    return os.str();
}

void write_summary_json(const std::string& path, const MetricsReport& report,
                        const std::string& engine) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_summary_json: cannot open " + path);
    out << summary_json(report, engine);
}

std::string plot_data_tsv(const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    std::ostringstream os;
    os << "engine\tmetric\tstat\tvalue\n";
    char buf[192];
    auto emit = [&](const std::string& engine, const char* metric, const Aggregate& a) {
        const std::pair<const char*, double> stats[] = {
            {"mean", a.mean}, {"p50", a.p50}, {"p95", a.p95}, {"p99", a.p99}};
        for (const auto& [stat, value] : stats) {
            std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%.17g\n", engine.c_str(), metric, stat,
                          value);
            os << buf;
        }
    };
    for (const auto& [engine, report] : reports) {
        emit(engine, "ttft_s", report.ttft);
        emit(engine, "tbt_pooled_s", report.tbt_pooled);
        emit(engine, "tbt_per_request_mean_s", report.tbt_per_request_mean);
        emit(engine, "e2e_s", report.e2e);
        emit(engine, "normalized_s_per_token", report.normalized);
        std::snprintf(buf, sizeof(buf), "%s\tthroughput_rps\tvalue\t%.17g\n", engine.c_str(),
                      report.throughput_rps);
        os << buf;
        std::snprintf(buf, sizeof(buf), "%s\tmakespan_s\tvalue\t%.17g\n", engine.c_str(),
                      report.makespan_s);
        os << buf;
    }
    return os.str();
}

void write_plot_data(const std::string& path,
                     const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_plot_data: cannot open " + path);
    out << plot_data_tsv(reports);
}

}  // namespace nexus
