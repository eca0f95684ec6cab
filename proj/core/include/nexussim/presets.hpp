#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nexussim/domain.hpp"
#include "nexussim/workload.hpp"

// Shipped parameterizations. Model and GPU presets are scale-matched
// stand-ins, not measurements; workload presets carry the published token
// length summary statistics they are fitted to.

namespace nexus {

// Models: "3b", "8b", "14b" match the named scales; "tiny" is the small
// desk-scale model the fast experiments and the test suite run on.
std::optional<ModelConfig> model_preset(std::string_view name);
std::vector<std::string> model_preset_names();

// GPUs: "l20like" is a 92-SM, 48 GB, 864 GB/s class device. The "desk"
// family is sized so full simulations finish in seconds: "desk" has a
// realistic compute/bandwidth ratio, "desk-contention" is bandwidth-lean so
// bandwidth-contention effects dominate, and "desk-tight" shrinks KV
// capacity to force memory pressure.
std::optional<GpuSpec> gpu_preset(std::string_view name);
std::vector<std::string> gpu_preset_names();

struct WorkloadPreset {
    std::string name;
    std::vector<WorkloadSpec> components;
    std::vector<double> weights;
};

// Workloads: "long-data", "arxiv", "sharegpt", and "mixed" (60% sharegpt +
// 40% long-data). Rate, count, and seed parameterize the arrival stream.
std::optional<WorkloadPreset> workload_preset(std::string_view name, double rate_rps, long count,
                                              std::uint64_t seed);
std::vector<std::string> workload_preset_names();

std::vector<Request> realize(const WorkloadPreset& preset);

KernelProfile default_kernel_profile();

// Calibration file: one "<op> <r_sat> <lambda>" record per operator kind,
// whitespace-separated, '#' comments allowed. Missing kinds fall back to the
// defaults with a warning; out-of-range values are hard errors.
KernelProfile load_kernel_profile(const std::string& path, std::vector<std::string>* warnings);
void save_kernel_profile(const std::string& path, const KernelProfile& profile);
std::string kernel_profile_text(const KernelProfile& profile);

}  // namespace nexus
