#pragma once

// Named experiments and their CSV artifacts.

#include "fantomette/config.hpp"
#include "fantomette/netsim.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fantomette {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Preset {
    std::string name;
    /// Sweep class; unset for the analytics table.
    std::optional<AgentClass> cls;
    std::vector<std::uint64_t> sizes;
};

const std::vector<std::string>& preset_names();
/// Throws std::invalid_argument on an unknown name.
Preset find_preset(const std::string& name);

/// Version string baked in at configure time (git describe when available).
std::string build_version();

/// Analytics anchors as `quantity,n,n_c,value` rows.
std::string analytics_table_csv();

/// Runs the preset and writes metrics.csv, payoffs.csv, finality_events.csv
/// (or analytics.csv) plus manifest.txt under `out`. Throws IoError.
std::vector<RunMetrics> run_preset(const Preset& preset, const SimConfig& cfg, const std::filesystem::path& out);

}  // namespace fantomette
