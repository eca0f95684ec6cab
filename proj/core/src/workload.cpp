#include "nexussim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nexus {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double SplitRng::uniform01() {
    // 53-bit mantissa draw mapped into (0, 1); never returns 0 or 1.
    const std::uint64_t bits = gen_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double SplitRng::exponential(double rate) {
    return -std::log(uniform01()) / rate;
}

double SplitRng::normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

LengthDistribution LengthDistribution::constant(double value) {
    LengthDistribution d;
    d.kind = Kind::Constant;
    d.constant_value = value;
    d.mean = d.p50 = d.p95 = d.p99 = value;
    return d;
}

LengthDistribution LengthDistribution::lognormal(double mu, double sigma) {
    LengthDistribution d;
    d.kind = Kind::Lognormal;
    d.mu = mu;
    d.sigma = sigma;
    d.mean = std::exp(mu + sigma * sigma / 2.0);
    d.p50 = std::exp(mu);
    d.p95 = std::exp(mu + 1.6449 * sigma);
    d.p99 = std::exp(mu + 2.3263 * sigma);
    return d;
}

LengthDistribution LengthDistribution::empirical(double mean, double p50, double p95,
                                                 double p99) {
    LengthDistribution d;
    d.kind = Kind::Empirical;
    d.mean = mean;
    d.p50 = p50;
    d.p95 = p95;
    d.p99 = p99;
    d.mu = std::log(p50);
    // E[X] = exp(mu + sigma^2/2) => sigma^2 = 2 (ln mean - mu).
    const double s2 = 2.0 * (std::log(mean) - d.mu);
    d.sigma = s2 > 0 ? std::sqrt(s2) : 0.0;
    return d;
}

long LengthDistribution::sample(SplitRng& rng) const {
    double v = 1;
    switch (kind) {
        case Kind::Constant:
            v = constant_value;
            break;
        case Kind::Lognormal:
        case Kind::Empirical:
            v = std::exp(mu + sigma * rng.normal());
            break;
    }
    const long tokens = static_cast<long>(std::llround(v));
    return std::max<long>(1, tokens);
}

std::vector<InvalidField> LengthDistribution::validate(const std::string& prefix) const {
    std::vector<InvalidField> errors;
    switch (kind) {
        case Kind::Constant:
            if (!(constant_value >= 1))
                errors.push_back({prefix + ".constant_value", "must be >= 1 token"});
            break;
        case Kind::Lognormal:
            if (!(sigma >= 0)) errors.push_back({prefix + ".sigma", "must be >= 0"});
            if (!std::isfinite(mu)) errors.push_back({prefix + ".mu", "must be finite"});
            break;
        case Kind::Empirical:
            if (!(mean > 0)) errors.push_back({prefix + ".mean", "must be > 0"});
            if (!(p50 > 0)) errors.push_back({prefix + ".p50", "must be > 0"});
            if (!(mean >= p50))
                errors.push_back({prefix + ".mean", "must be >= p50 for a lognormal fit"});
            if (!(p95 >= p50)) errors.push_back({prefix + ".p95", "must be >= p50"});
            if (!(p99 >= p95)) errors.push_back({prefix + ".p99", "must be >= p95"});
            break;
    }
    return errors;
}

std::vector<InvalidField> WorkloadSpec::validate() const {
    std::vector<InvalidField> errors;
    if (!(rate_rps > 0)) errors.push_back({"workload.rate_rps", "must be > 0"});
    if (count < 0) errors.push_back({"workload.count", "must be >= 0"});
    for (auto& e : input_len.validate("workload.input_len")) errors.push_back(e);
    for (auto& e : output_len.validate("workload.output_len")) errors.push_back(e);
    return errors;
}

namespace {

// Stream tags; keep stable so mix_traces with weight 1 on the first
// component reproduces generate_trace byte for byte.
constexpr std::uint64_t kArrivalStream = 0;
constexpr std::uint64_t kChoiceStream = 1;
constexpr std::uint64_t kLengthStreamBase = 2;

void throw_if_invalid(const WorkloadSpec& spec) {
    const auto errors = spec.validate();
    if (!errors.empty())
        throw std::invalid_argument("invalid workload spec: " + describe(errors));
}

}  // namespace

std::vector<Request> generate_trace(const WorkloadSpec& spec) {
    throw_if_invalid(spec);
    SplitRng arrivals(spec.seed, kArrivalStream);
    SplitRng lengths(spec.seed, kLengthStreamBase);
    std::vector<Request> trace;
    trace.reserve(static_cast<std::size_t>(spec.count));
    double t = 0;
    for (long i = 0; i < spec.count; ++i) {
        t += arrivals.exponential(spec.rate_rps);
        Request r;
        r.id = static_cast<std::uint64_t>(i);
        r.arrival_s = t;
        r.prompt_len = spec.input_len.sample(lengths);
        r.output_len = spec.output_len.sample(lengths);
        trace.push_back(r);
    }
    return trace;
}

std::vector<Request> mix_traces(const std::vector<WorkloadSpec>& specs,
                                const std::vector<double>& weights, std::uint64_t seed) {
    if (specs.empty()) throw std::invalid_argument("mix_traces: no component specs");
    if (specs.size() != weights.size())
        throw std::invalid_argument("mix_traces: specs/weights size mismatch");
    double sum = 0;
    for (double w : weights) {
        if (w < 0) throw std::invalid_argument("mix_traces: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("mix_traces: weights must sum to 1");
    for (const WorkloadSpec& s : specs) throw_if_invalid(s);

    const WorkloadSpec& lead = specs.front();
    SplitRng arrivals(seed, kArrivalStream);
    SplitRng choice(seed, kChoiceStream);
    std::vector<SplitRng> lengths;
    lengths.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i)
        lengths.emplace_back(seed, kLengthStreamBase + i);

    std::vector<Request> trace;
    trace.reserve(static_cast<std::size_t>(lead.count));
    double t = 0;
    for (long i = 0; i < lead.count; ++i) {
        t += arrivals.exponential(lead.rate_rps);
        const double u = choice.uniform01();
        std::size_t pick = 0;
        double acc = 0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            acc += weights[k];
            if (u <= acc) {
                pick = k;
                break;
            }
            pick = k;  // numerical slack: the last component absorbs the tail
        }
        Request r;
        r.id = static_cast<std::uint64_t>(i);
        r.arrival_s = t;
        r.prompt_len = specs[pick].input_len.sample(lengths[pick]);
        r.output_len = specs[pick].output_len.sample(lengths[pick]);
        trace.push_back(r);
    }
    return trace;
}

namespace {
constexpr const char* kTraceHeader = "# nexustrace v1";
}

void save_trace(const std::string& path, const std::vector<Request>& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_trace: cannot open " + path);
    out << kTraceHeader << "\n";
    char buf[160];
    for (const Request& r : trace) {
        std::snprintf(buf, sizeof(buf), "%llu\t%.17g\t%ld\t%ld\n",
                      static_cast<unsigned long long>(r.id), r.arrival_s, r.prompt_len,
                      r.output_len);
        out << buf;
    }
    if (!out) throw std::runtime_error("save_trace: write failed for " + path);
}

std::vector<Request> load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_trace: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw std::runtime_error("load_trace: " + path + ":1: bad or missing header (expected '" +
                                 std::string(kTraceHeader) + "')");
    std::vector<Request> trace;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Request r;
        unsigned long long id = 0;
        if (std::sscanf(line.c_str(), "%llu\t%lg\t%ld\t%ld", &id, &r.arrival_s, &r.prompt_len,
                        &r.output_len) != 4)
            throw std::runtime_error("load_trace: " + path + ":" + std::to_string(line_no) +
                                     ": malformed record");
        r.id = id;
        if (r.prompt_len < 1 || r.output_len < 1)
            throw std::runtime_error("load_trace: " + path + ":" + std::to_string(line_no) +
                                     ": token counts must be >= 1");
        trace.push_back(r);
    }
    return trace;
}

}  // namespace nexus
