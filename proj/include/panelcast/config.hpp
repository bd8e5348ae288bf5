#pragma once

#include "panelcast/edr.hpp"
#include "panelcast/panel_data.hpp"
#include "panelcast/tuning.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace panelcast {

// Pipeline settings, read from a JSON document:
//
// {
//   "paths": {"indicators": "...", "target": "...", "output_dir": "..."},
//   "year_range": [2008, 2023],
//   "coverage_threshold": 0.7,
//   "edr": {"epsilon": 0.25, "k": 10},
//   "split": {"last_train_year": 2017},
//   "cv": {"k": 3, "shuffled": false},
//   "grid": {"n_estimators": [100, 500, 1000], ...},
//   "forecast": {"horizon": 5, "trend_window": 8},
//   "seed": 42
// }
//
// Only "paths.indicators" and "paths.target" are required. Relative paths are
// resolved against the directory holding the config file. A missing "grid"
// means the full typical-values grid.
struct PipelineConfig {
    struct Paths {
        std::filesystem::path indicators;
        std::filesystem::path target;
        std::filesystem::path output_dir = "out";
    } paths;
    YearRange year_range;
    double coverage_threshold = kDefaultCoverageThreshold;
    struct Edr {
        double epsilon = 0.25;
        std::size_t k = 10;
    } edr;
    int last_train_year = 2017;
    CVConfig cv;
    GridSpec grid = GridSpec::typical_values();
    struct Forecast {
        int horizon = 5;
        std::size_t trend_window = 8;
    } forecast;
    std::uint64_t seed = 42;

    // Throws ConfigError.
    void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// Canonical form of the effective settings. Excludes the output directory so
// a run's identity does not depend on where its artifacts land.
nlohmann::json canonical_json(const PipelineConfig& config);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace panelcast
