#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fogalloc/sim_harness.hpp"

namespace fogalloc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BarrierOptions {
    bool enabled = false;
    std::size_t points = 50;
    /// Barrier grid is max * k / points, k = 1..points.
    double max = 12.0;
    std::size_t replications = 10000;
};

/// Everything a run needs. Units: hours for the horizon and arrival rate,
/// milliseconds for delays.
struct RunConfig {
    ExperimentSpec experiment;
    BarrierOptions barrier;
    std::string out_dir = "out";
    bool evolution = true;
};

/// Parse a TOML run configuration. Unknown tables or keys, wrong types and
/// invalid values raise ConfigError naming the offending key.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace fogalloc
