#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "featune/engine.hpp"
#include "featune/harness.hpp"
#include "featune/problems.hpp"

namespace featune::io {

using Json = nlohmann::ordered_json;

/// Field names match TunerConfig members.
Json to_json(engine::TunerConfig const& config);

/// Reads a configuration object. Missing fields keep their defaults;
/// unknown fields and ill-typed values throw engine::ConfigError.
engine::TunerConfig config_from_json(Json const& json, engine::TunerConfig base = {});

engine::TunerConfig load_config(std::filesystem::path const& path);

/// Applies one "key=value" override.
void apply_override(engine::TunerConfig& config, std::string_view assignment);

Json to_json(harness::EliteReport const& report);

/// Per-cell summaries (median, quartiles, mean, min, max) plus the table
/// settings.
Json summary_json(harness::EvaluationTable const& table);

/// Columns: expression, instance_features, run_index, normalized_fitness.
std::string evaluation_csv(harness::EvaluationTable const& table);

/// [{"kind": "jump", "features": {"m": 2, "n": 10}}, ...]
std::vector<problems::ProblemInstance> instances_from_json(Json const& json);
std::vector<problems::ProblemInstance> load_instances(std::filesystem::path const& path);

Json read_json(std::filesystem::path const& path);

/// Writes through a temporary file in the same directory and renames it
/// over `path`.
void write_atomic(std::filesystem::path const& path, std::string_view content);

} // namespace featune::io
