#pragma once

#include "vinecast/forecast_engine.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace vinecast {

/// Parsed run configuration. Every field has a default, so `{}` is valid.
///
/// {
///   "transform": {"kind": "pcv",
///                 "selection": {"kind": "mst" | "cvine_min" | "random" | "fixed",
///                               "weights": "empirical" | "ewma", "lambda": 0.97,
///                               "partial_weights": "from_average" | "average_of_daily",
///                               "seed": 1, "structure": {...}}}
///              | {"kind": "cholesky", "asset_order": ["AXP", "C", ...]},
///   "margins": {"variances": "har", "tree1": "har", "tree2_3": "arfima", "tree4_plus": "mean"}
///              | {"all": "har"},
///   "dependence": {"mode": "independence" | "full" | "structured",
///                  "families": "gaussian" | "mixed", "dependent_subset": [0, 1], "test_level": 0.05},
///   "n_replications": 1000,
///   "seed": 0,
///   "bias_correction": {"enabled": false, "s_days": 264},
///   "windows": {"train_days": 502, "test_days": 22, "warmup_days": 22}
/// }
struct RunConfig {
    PipelineConfig pipeline;
    WindowConfig windows;
    std::vector<std::string> asset_order;  ///< labels; resolved against the data

    /// Maps asset_order labels to indices of `assets`.
    void resolve_assets(const std::vector<std::string>& assets);
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
[[nodiscard]] RunConfig parse_run_config(const nlohmann::json& j);
[[nodiscard]] RunConfig load_run_config(const std::string& path);
/// Canonical JSON of the settings that determine outputs (worker count excluded).
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

}  // namespace vinecast
