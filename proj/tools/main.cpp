// nexussim — experiment driver for the serving simulator.
//
// Subcommands: run, compare, sweep, gen-trace, calibrate-import, replay.
// All randomness flows from --seed; option values can also come from an INI
// config file (--config), with command-line flags taking precedence.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nexussim/eventlog.hpp"
#include "nexussim/metrics.hpp"
#include "nexussim/presets.hpp"
#include "nexussim/simulator.hpp"
#include "nexussim/workload.hpp"

namespace fs = std::filesystem;
using namespace nexus;

namespace {

struct EngineSelect {
    EngineKind kind = EngineKind::NexusDisagg;
    int static_r_p = 50;
    PrefillPolicy prefill_policy = PrefillPolicy::Spf;

    std::string label() const {
        if (kind == EngineKind::StaticPartition)
            return "static-" + std::to_string(static_r_p);
        std::string base = to_string(kind);
        if (kind == EngineKind::NexusDisagg && prefill_policy == PrefillPolicy::Fcfs)
            base += "-fcfs";
        return base;
    }
};

EngineSelect parse_engine(const std::string& text) {
    EngineSelect e;
    if (text == "nexus") {
        e.kind = EngineKind::NexusDisagg;
    } else if (text == "nexus-fcfs") {
        e.kind = EngineKind::NexusDisagg;
        e.prefill_policy = PrefillPolicy::Fcfs;
    } else if (text == "monolithic") {
        e.kind = EngineKind::MonolithicChunked;
    } else if (text == "engine-disagg") {
        e.kind = EngineKind::EngineLevelDisagg;
    } else if (text.rfind("static", 0) == 0) {
        e.kind = EngineKind::StaticPartition;
        const std::size_t colon = text.find(':');
        if (colon != std::string::npos) {
            try {
                e.static_r_p = std::stoi(text.substr(colon + 1));
            } catch (const std::exception&) {
                throw CLI::ValidationError("engine", "bad static share in '" + text + "'");
            }
        }
        if (e.static_r_p < 1 || e.static_r_p > 99)
            throw CLI::ValidationError("engine", "static share must lie in [1, 99]");
    } else {
        throw CLI::ValidationError(
            "engine", "unknown engine '" + text +
                          "' (expected nexus, nexus-fcfs, monolithic, static[:N], engine-disagg)");
    }
    return e;
}

// Options shared by run/compare/sweep.
struct ExperimentOptions {
    std::string workload = "long-data";
    std::string trace_path;
    std::string model = "tiny";
    std::string gpu = "desk";
    std::string profile_path;
    double rate = 2.5;
    long count = 200;
    std::uint64_t seed = 1;
    std::string out_dir = "results";
    double timeout_s = 3600.0;
    // Controller overrides.
    ControllerConfig ctrl;
    std::string prefill_policy = "spf";
};

void add_experiment_options(CLI::App* cmd, ExperimentOptions& opt, bool include_rate = true) {
    cmd->add_option("--workload", opt.workload, "Workload preset: long-data|arxiv|sharegpt|mixed")
        ->capture_default_str();
    cmd->add_option("--trace", opt.trace_path, "Trace file to replay instead of generating");
    cmd->add_option("--model", opt.model, "Model preset: tiny|3b|8b|14b")->capture_default_str();
    cmd->add_option("--gpu", opt.gpu, "GPU preset: l20like|desk|desk-contention|desk-tight")
        ->capture_default_str();
    cmd->add_option("--profile", opt.profile_path, "Kernel profile calibration file");
    if (include_rate)
        cmd->add_option("--rate", opt.rate, "Poisson arrival rate, requests/s")
            ->capture_default_str();
    cmd->add_option("--count", opt.count, "Number of requests")->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Top-level seed")->capture_default_str();
    cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--timeout-s", opt.timeout_s, "Simulated-time budget")->capture_default_str();
    cmd->add_option("--alpha", opt.ctrl.alpha, "Prefill slack under decode priority")
        ->capture_default_str();
    cmd->add_option("--beta", opt.ctrl.beta, "Decode slack under prefill priority")
        ->capture_default_str();
    cmd->add_option("--kv-switch", opt.ctrl.kv_switch_fraction, "KV fraction flipping the objective")
        ->capture_default_str();
    cmd->add_option("--delta", opt.ctrl.delta_pp, "Hysteresis band, percent points")
        ->capture_default_str();
    cmd->add_option("--gamma", opt.ctrl.gamma, "SPF anti-starvation weight, tokens/s")
        ->capture_default_str();
    cmd->add_option("--chunk-size", opt.ctrl.chunk_size, "Mixed-batch prefill chunk tokens")
        ->capture_default_str();
    cmd->add_option("--max-decode-batch", opt.ctrl.max_decode_batch, "Decode batch cap")
        ->capture_default_str();
    cmd->add_option("--token-budget", opt.ctrl.token_budget, "Prefill token budget per iteration")
        ->capture_default_str();
    cmd->add_option("--prefill-policy", opt.prefill_policy, "Prefill scheduler: spf|fcfs")
        ->capture_default_str();
}

SimConfig build_sim_config(const ExperimentOptions& opt, const EngineSelect& engine) {
    SimConfig cfg;
    const auto model = model_preset(opt.model);
    if (!model) throw CLI::ValidationError("model", "unknown model preset '" + opt.model + "'");
    const auto gpu = gpu_preset(opt.gpu);
    if (!gpu) throw CLI::ValidationError("gpu", "unknown gpu preset '" + opt.gpu + "'");
    cfg.model = *model;
    cfg.gpu = *gpu;
    cfg.ctrl = opt.ctrl;
    cfg.profile = default_kernel_profile();
    if (!opt.profile_path.empty()) {
        std::vector<std::string> warnings;
        cfg.profile = load_kernel_profile(opt.profile_path, &warnings);
        for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    }
    cfg.engine.kind = engine.kind;
    cfg.engine.static_r_p = engine.static_r_p;
    cfg.engine.prefill_policy =
        opt.prefill_policy == "fcfs" ? PrefillPolicy::Fcfs : engine.prefill_policy;
    cfg.engine.timeout_sim_s = opt.timeout_s;
    const auto errors = validate_config(cfg.model, cfg.gpu, cfg.ctrl, cfg.profile);
    if (!errors.empty()) throw CLI::ValidationError("config", describe(errors));
    return cfg;
}

std::vector<Request> build_trace(const ExperimentOptions& opt) {
    if (!opt.trace_path.empty()) return load_trace(opt.trace_path);
    const auto preset = workload_preset(opt.workload, opt.rate, opt.count, opt.seed);
    if (!preset)
        throw CLI::ValidationError("workload", "unknown workload preset '" + opt.workload + "'");
    return realize(*preset);
}

void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

double mean_queue_wait_s(const std::vector<EventRecord>& events) {
    std::map<std::uint64_t, double> arrivals;
    std::map<std::uint64_t, double> first_service;
    for (const EventRecord& e : events) {
        if (e.event == EventKind::Arrival) {
            for (const EventMember& m : e.members) arrivals.emplace(m.id, e.time_s);
        } else if (e.event == EventKind::Launch &&
                   (e.lane == LaneId::Prefill || e.lane == LaneId::Mixed)) {
            for (const EventMember& m : e.members) first_service.emplace(m.id, e.time_s);
        }
    }
    double sum = 0;
    std::size_t n = 0;
    for (const auto& [id, t0] : arrivals) {
        const auto it = first_service.find(id);
        if (it == first_service.end()) continue;
        sum += it->second - t0;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

void print_table_header() {
    std::printf("%-14s %10s %10s %10s %10s %10s %12s %12s %9s\n", "engine", "thru(r/s)",
                "ttft_mean", "ttft_p95", "tbt_mean", "tbt_p95", "norm_mean", "norm_p95", "done");
}

void print_table_row(const std::string& label, const SimResult& result) {
    const MetricsReport& m = result.metrics;
    std::printf("%-14s %10.3f %10.4f %10.4f %10.5f %10.5f %12.5f %12.5f %8zu%s\n", label.c_str(),
                m.throughput_rps, m.ttft.mean, m.ttft.p95, m.tbt_pooled.mean, m.tbt_pooled.p95,
                m.normalized.mean, m.normalized.p95, m.completed,
                result.timed_out ? "T" : "");
}

// Runs every engine on the identical trace, writes result files, prints the
// comparison table. Returns 0 iff every engine completed without timeout.
int run_engines(const ExperimentOptions& opt, const std::vector<EngineSelect>& engines) {
    const std::vector<Request> trace = build_trace(opt);
    fs::create_directories(opt.out_dir);

    std::vector<std::pair<std::string, MetricsReport>> reports;
    int status = 0;
    print_table_header();
    for (const EngineSelect& engine : engines) {
        const SimConfig cfg = build_sim_config(opt, engine);
        const SimResult result = nexus::run(cfg, trace);
        const std::string label = engine.label();
        atomic_write(fs::path(opt.out_dir) / (label + ".metrics.json"),
                     summary_json(result.metrics, label));
        atomic_write(fs::path(opt.out_dir) / (label + ".events.log"),
                     serialize_event_log(result.events));
        if (!result.decisions.empty())
            atomic_write(fs::path(opt.out_dir) / (label + ".decisions.log"),
                         decision_log_text(result.decisions));
        reports.emplace_back(label, result.metrics);
        print_table_row(label, result);
        if (result.timed_out) status = 2;
    }
    atomic_write(fs::path(opt.out_dir) / "plotdata.tsv", plot_data_tsv(reports));
    return status;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale serving simulator: prefill/decode disaggregation experiments"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    // run ------------------------------------------------------------------
    ExperimentOptions run_opt;
    std::string run_engine = "nexus";
    CLI::App* run_cmd = app.add_subcommand("run", "Run one engine over a workload");
    run_cmd->add_option("--engine", run_engine,
                        "nexus|nexus-fcfs|monolithic|static[:N]|engine-disagg")
        ->capture_default_str();
    add_experiment_options(run_cmd, run_opt);

    // compare --------------------------------------------------------------
    ExperimentOptions cmp_opt;
    std::string cmp_engines = "nexus,monolithic,static:50";
    CLI::App* cmp_cmd = app.add_subcommand("compare", "Run several engines on the identical trace");
    cmp_cmd->add_option("--engines", cmp_engines, "Comma-separated engine list")
        ->capture_default_str();
    add_experiment_options(cmp_cmd, cmp_opt);

    // sweep ------------------------------------------------------------------
    ExperimentOptions sweep_opt;
    std::string sweep_engine = "nexus";
    std::string sweep_rate = "1..4";
    double sweep_step = 0.5;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep arrival rate for one engine");
    sweep_cmd->add_option("--engine", sweep_engine, "Engine under test")->capture_default_str();
    sweep_cmd->add_option("--rate", sweep_rate, "Rate range, e.g. 1..6")->capture_default_str();
    sweep_cmd->add_option("--step", sweep_step, "Rate step")->capture_default_str();
    add_experiment_options(sweep_cmd, sweep_opt, /*include_rate=*/false);

    // gen-trace ---------------------------------------------------------------
    ExperimentOptions gen_opt;
    std::string gen_out = "trace.tsv";
    long input_const = 0, output_const = 0;
    CLI::App* gen_cmd = app.add_subcommand("gen-trace", "Generate and save a trace file");
    gen_cmd->add_option("--workload", gen_opt.workload, "Workload preset")->capture_default_str();
    gen_cmd->add_option("--rate", gen_opt.rate, "Arrival rate, requests/s")->capture_default_str();
    gen_cmd->add_option("--count", gen_opt.count, "Number of requests")->capture_default_str();
    gen_cmd->add_option("--seed", gen_opt.seed, "Seed")->capture_default_str();
    gen_cmd->add_option("--out", gen_out, "Output trace path")->capture_default_str();
    gen_cmd->add_option("--input-const", input_const, "Constant prompt length override");
    gen_cmd->add_option("--output-const", output_const, "Constant output length override");

    // calibrate-import ---------------------------------------------------------
    std::string calib_path;
    std::string calib_out;
    CLI::App* calib_cmd =
        app.add_subcommand("calibrate-import", "Validate and normalize a kernel profile file");
    calib_cmd->add_option("file", calib_path, "Calibration file")->required();
    calib_cmd->add_option("--out", calib_out, "Write the normalized profile here");

    // replay --------------------------------------------------------------------
    std::string replay_path;
    std::string replay_out;
    CLI::App* replay_cmd =
        app.add_subcommand("replay", "Re-derive metrics from an event log");
    replay_cmd->add_option("file", replay_path, "Event log file")->required();
    replay_cmd->add_option("--out", replay_out, "Write metrics JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return run_engines(run_opt, {parse_engine(run_engine)});
        }
        if (cmp_cmd->parsed()) {
            std::vector<EngineSelect> engines;
            for (const std::string& name : split_list(cmp_engines))
                engines.push_back(parse_engine(name));
            return run_engines(cmp_opt, engines);
        }
        if (sweep_cmd->parsed()) {
            double lo = 0, hi = 0;
            if (std::sscanf(sweep_rate.c_str(), "%lg..%lg", &lo, &hi) != 2 || hi < lo ||
                sweep_step <= 0)
                throw CLI::ValidationError("rate", "expected --rate LO..HI with --step > 0");
            const EngineSelect engine = parse_engine(sweep_engine);
            fs::create_directories(sweep_opt.out_dir);
            std::ostringstream rows;
            rows << "rate_rps\tthroughput_rps\tttft_mean_s\tttft_p95_s\ttbt_mean_s\t"
                    "tbt_p95_s\tnorm_mean_s\tqueue_wait_mean_s\tcompleted\ttimed_out\n";
            print_table_header();
            int status = 0;
            for (double rate = lo; rate <= hi + 1e-9; rate += sweep_step) {
                ExperimentOptions opt = sweep_opt;
                opt.rate = rate;
                const std::vector<Request> trace = build_trace(opt);
                const SimConfig cfg = build_sim_config(opt, engine);
                const SimResult result = nexus::run(cfg, trace);
                char label[48];
                std::snprintf(label, sizeof(label), "%s@%.2f", engine.label().c_str(), rate);
                print_table_row(label, result);
                char buf[320];
                std::snprintf(buf, sizeof(buf),
                              "%.4g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%zu\t%d\n",
                              rate, result.metrics.throughput_rps, result.metrics.ttft.mean,
                              result.metrics.ttft.p95, result.metrics.tbt_pooled.mean,
                              result.metrics.tbt_pooled.p95, result.metrics.normalized.mean,
                              mean_queue_wait_s(result.events), result.metrics.completed,
                              result.timed_out ? 1 : 0);
                rows << buf;
                if (result.timed_out) status = 2;
            }
            atomic_write(fs::path(sweep_opt.out_dir) / "sweep.tsv", rows.str());
            return status;
        }
        if (gen_cmd->parsed()) {
            std::vector<Request> trace;
            if (input_const > 0 || output_const > 0) {
                WorkloadSpec spec;
                spec.rate_rps = gen_opt.rate;
                spec.count = gen_opt.count;
                spec.seed = gen_opt.seed;
                spec.input_len =
                    LengthDistribution::constant(input_const > 0 ? input_const : 100);
                spec.output_len =
                    LengthDistribution::constant(output_const > 0 ? output_const : 10);
                trace = generate_trace(spec);
            } else {
                const auto preset =
                    workload_preset(gen_opt.workload, gen_opt.rate, gen_opt.count, gen_opt.seed);
                if (!preset)
                    throw CLI::ValidationError("workload",
                                               "unknown workload preset '" + gen_opt.workload + "'");
                trace = realize(*preset);
            }
            save_trace(gen_out, trace);
            std::printf("wrote %zu requests to %s\n", trace.size(), gen_out.c_str());
            return 0;
        }
        if (calib_cmd->parsed()) {
            std::vector<std::string> warnings;
            const KernelProfile profile = load_kernel_profile(calib_path, &warnings);
            for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
            std::fputs(kernel_profile_text(profile).c_str(), stdout);
            if (!calib_out.empty()) save_kernel_profile(calib_out, profile);
            return 0;
        }
        if (replay_cmd->parsed()) {
            const std::vector<EventRecord> events = read_event_log(replay_path);
            const MetricsReport report = replay_report(events);
            print_table_header();
            SimResult shim;
            shim.metrics = report;
            print_table_row("replay", shim);
            if (!replay_out.empty()) atomic_write(replay_out, summary_json(report, "replay"));
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
