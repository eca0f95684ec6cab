#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nexussim/domain.hpp"

// Trace generation: Poisson arrivals with configurable token-length
// distributions, plus a line-delimited trace file format.
//
// All randomness flows from one top-level seed; independent streams are
// derived with a splitmix64 hash of (seed, stream tag) so adding a consumer
// never perturbs the others. Distribution transforms are implemented on top
// of raw 64-bit draws to keep traces reproducible across standard libraries.

namespace nexus {

std::uint64_t splitmix64(std::uint64_t x);

class SplitRng {
public:
    SplitRng(std::uint64_t seed, std::uint64_t stream)
        : gen_(splitmix64(seed ^ splitmix64(stream))) {}

    double uniform01();               // in (0, 1)
    double exponential(double rate);  // mean 1/rate
    double normal();                  // standard normal via Box-Muller

private:
    std::mt19937_64 gen_;
};

struct LengthDistribution {
    enum class Kind { Constant, Lognormal, Empirical };

    Kind kind = Kind::Constant;
    double constant_value = 1;
    double mu = 0;      // lognormal location (log tokens)
    double sigma = 0;   // lognormal scale, >= 0
    // Empirical summary the lognormal was fitted to; kept for reporting.
    double mean = 0, p50 = 0, p95 = 0, p99 = 0;

    static LengthDistribution constant(double value);
    static LengthDistribution lognormal(double mu, double sigma);
    // Fits a lognormal to summary statistics: the median pins mu, the mean
    // pins sigma. Tail quantiles are reported, not matched exactly.
    static LengthDistribution empirical(double mean, double p50, double p95, double p99);

    // Always >= 1 (truncated at one token).
    long sample(SplitRng& rng) const;

    std::vector<InvalidField> validate(const std::string& prefix) const;
};

struct WorkloadSpec {
    double rate_rps = 1.0;
    long count = 0;
    LengthDistribution input_len;
    LengthDistribution output_len;
    std::uint64_t seed = 0;

    std::vector<InvalidField> validate() const;
};

// Poisson arrivals at spec.rate_rps with i.i.d. lengths; deterministic for a
// fixed seed; arrival times are sorted by construction.
std::vector<Request> generate_trace(const WorkloadSpec& spec);

// One merged Poisson stream (rate and count from specs[0]); each request's
// lengths come from component i with probability weights[i]. Weights must
// sum to 1. With weights {1, 0, ...} this reproduces generate_trace(specs[0])
// exactly.
std::vector<Request> mix_traces(const std::vector<WorkloadSpec>& specs,
                                const std::vector<double>& weights, std::uint64_t seed);

// Line format: "id <TAB> arrival_s <TAB> prompt_tokens <TAB> output_tokens"
// behind a "# nexustrace v1" header. Round-trips exactly.
void save_trace(const std::string& path, const std::vector<Request>& trace);
std::vector<Request> load_trace(const std::string& path);

}  // namespace nexus
