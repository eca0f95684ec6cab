#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nexussim/domain.hpp"

// Evaluation metrics computed from completed requests: TTFT, TBT, end-to-end
// latency, normalized latency (e2e / output tokens), and throughput.
//
// Percentiles use the nearest-rank convention: the p-th percentile of N
// sorted values is the value at 1-based index ceil(p/100 * N). TBT is
// aggregated both over the pooled multiset of all per-token gaps (the
// default reported figure) and as per-request means.

namespace nexus {

struct RequestMetrics {
    std::uint64_t id = 0;
    double arrival_s = 0;
    double finish_s = 0;
    double ttft_s = 0;
    std::vector<double> tbt_s;  // empty for single-token outputs
    double e2e_s = 0;
    double normalized_s_per_token = 0;
    long output_len = 0;
};

struct Aggregate {
    double mean = 0, p50 = 0, p95 = 0, p99 = 0;
    std::size_t count = 0;
};

struct MetricsReport {
    std::vector<RequestMetrics> per_request;  // sorted by id
    Aggregate ttft;
    Aggregate tbt_pooled;            // over all token gaps of all requests
    Aggregate tbt_per_request_mean;  // over per-request mean gaps
    Aggregate e2e;
    Aggregate normalized;
    double makespan_s = 0;       // last finish - first arrival
    double throughput_rps = 0;   // completed / makespan
    std::size_t completed = 0;
};

// Requires a completed request with at least one emitted token.
RequestMetrics compute_request_metrics(const Request& req);

double percentile_nearest_rank(std::vector<double> values, double pct);

MetricsReport aggregate(std::vector<RequestMetrics> reports);

// Convenience: metrics over the completed subset of a request set.
MetricsReport report_from_requests(const std::vector<Request>& requests);

std::string summary_json(const MetricsReport& report, const std::string& engine);
void write_summary_json(const std::string& path, const MetricsReport& report,
                        const std::string& engine);

// Tabular plot data: one "engine <TAB> metric <TAB> stat <TAB> value" row per
// aggregate, consumable by any plotting tool.
std::string plot_data_tsv(const std::vector<std::pair<std::string, MetricsReport>>& reports);
void write_plot_data(const std::string& path,
                     const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace nexus
