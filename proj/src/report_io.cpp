#include "featune/report_io.hpp"

#include <algorithm>
#include <fstream>
#include <system_error>

#include <fmt/format.h>

#include "featune/stats.hpp"

namespace featune::io {

using engine::ConfigError;
using engine::TunerConfig;

namespace {

std::size_t as_count(Json const& v, std::string_view key)
{
    if (v.is_number_unsigned()) {
        return v.get<std::size_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::size_t>(v.get<std::int64_t>());
    }
    throw ConfigError(fmt::format("field '{}' must be a non-negative integer", key));
}

double as_real(Json const& v, std::string_view key)
{
    if (!v.is_number()) {
        throw ConfigError(fmt::format("field '{}' must be a number", key));
    }
    return v.get<double>();
}

std::string as_text(Json const& v, std::string_view key)
{
    if (!v.is_string()) {
        throw ConfigError(fmt::format("field '{}' must be a string", key));
    }
    return v.get<std::string>();
}

void set_field(TunerConfig& c, std::string_view key, Json const& v)
{
    try {
        if (key == "problem") {
            c.problem = problems::problem_from_string(as_text(v, key));
        } else if (key == "solver") {
            c.solver = solvers::solver_from_string(as_text(v, key));
        } else if (key == "budget") {
            c.budget = as_text(v, key);
        } else if (key == "generations") {
            c.generations = as_count(v, key);
        } else if (key == "population_size") {
            c.population_size = as_count(v, key);
        } else if (key == "tournament_size") {
            c.tournament_size = as_count(v, key);
        } else if (key == "replacement_cap") {
            c.replacement_cap = as_real(v, key);
        } else if (key == "mutation_probability") {
            c.mutation_probability = as_real(v, key);
        } else if (key == "crossover_rate") {
            c.crossover_rate = as_real(v, key);
        } else if (key == "runs") {
            c.runs = as_count(v, key);
        } else if (key == "alpha") {
            c.alpha = as_real(v, key);
        } else if (key == "seed") {
            c.seed = as_count(v, key);
        } else if (key == "max_depth") {
            c.max_depth = as_count(v, key);
        } else if (key == "grow_fraction") {
            c.grow_fraction = as_real(v, key);
        } else {
            throw ConfigError(fmt::format("unknown configuration field '{}'", key));
        }
    } catch (std::invalid_argument const& e) {
        throw ConfigError(e.what());
    }
}

bool is_text_field(std::string_view key) { return key == "problem" || key == "solver" || key == "budget"; }

Json summarize(std::vector<double> const& samples)
{
    Json j;
    j["median"] = stats::median(samples);
    j["q1"] = stats::quantile(samples, 0.25);
    j["q3"] = stats::quantile(samples, 0.75);
    j["mean"] = stats::mean(samples);
    j["min"] = *std::min_element(samples.begin(), samples.end());
    j["max"] = *std::max_element(samples.begin(), samples.end());
    return j;
}

Json instance_json(problems::ProblemInstance const& inst)
{
    Json features = Json::object();
    for (auto const& [name, value] : inst.features().values()) {
        features[name] = static_cast<std::uint64_t>(value);
    }
    return Json { { "kind", problems::to_string(inst.kind()) }, { "features", features } };
}

} // namespace

Json to_json(TunerConfig const& c)
{
    Json j;
    j["problem"] = problems::to_string(c.problem);
    j["solver"] = solvers::to_string(c.solver);
    j["budget"] = c.budget;
    j["generations"] = c.generations;
    j["population_size"] = c.population_size;
    j["tournament_size"] = c.tournament_size;
    j["replacement_cap"] = c.replacement_cap;
    j["mutation_probability"] = c.mutation_probability;
    j["crossover_rate"] = c.crossover_rate;
    j["runs"] = c.runs;
    j["alpha"] = c.alpha;
    j["seed"] = c.seed;
    j["max_depth"] = c.max_depth;
    j["grow_fraction"] = c.grow_fraction;
    return j;
}

TunerConfig config_from_json(Json const& json, TunerConfig base)
{
    if (!json.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    for (auto const& [key, value] : json.items()) {
        set_field(base, key, value);
    }
    return base;
}

TunerConfig load_config(std::filesystem::path const& path)
{
    Json j;
    try {
        j = read_json(path);
    } catch (std::runtime_error const& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(j);
}

void apply_override(TunerConfig& config, std::string_view assignment)
{
    auto const eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
    }
    auto const key = assignment.substr(0, eq);
    auto const value = std::string(assignment.substr(eq + 1));
    if (is_text_field(key)) {
        set_field(config, key, Json(value));
        return;
    }
    auto parsed = Json::parse(value, nullptr, false);
    if (parsed.is_discarded()) {
        throw ConfigError(fmt::format("override '{}': '{}' is not a number", assignment, value));
    }
    set_field(config, key, parsed);
}

Json to_json(harness::EliteReport const& report)
{
    Json j;
    j["kind"] = "elite_report";
    j["config"] = to_json(report.config);
    j["pool"] = harness::to_string(report.pool);
    j["tuner_runs"] = report.tuner_runs;
    j["seeds"] = report.seeds;
    j["instances"] = report.instance_labels;
    j["pool_size"] = report.pool_size;
    Json top = Json::array();
    for (auto const& e : report.top(3)) {
        top.push_back(e.expression);
    }
    j["top3"] = top;
    Json entries = Json::array();
    for (auto const& e : report.entries) {
        entries.push_back({ { "expression", e.expression },
                            { "frequency", e.frequency },
                            { "best_score", e.best_score },
                            { "mean_score", e.mean_score },
                            { "instance_medians", e.instance_medians } });
    }
    j["entries"] = entries;
    return j;
}

Json summary_json(harness::EvaluationTable const& table)
{
    Json j;
    j["kind"] = "evaluation_summary";
    j["solver"] = solvers::to_string(table.solver);
    j["budget"] = table.budget;
    j["runs"] = table.runs;
    j["seed"] = table.seed;
    Json cells = Json::array();
    for (auto const& cell : table.cells) {
        Json c;
        c["expression"] = cell.expression;
        c["instance"] = instance_json(cell.instance);
        c["instance_features"] = cell.instance.feature_label();
        c["parameter"] = cell.parameter;
        c["budget"] = cell.budget;
        c.update(summarize(cell.samples));
        cells.push_back(std::move(c));
    }
    j["cells"] = cells;
    return j;
}

std::string evaluation_csv(harness::EvaluationTable const& table)
{
    std::string out = "expression,instance_features,run_index,normalized_fitness\n";
    for (auto const& cell : table.cells) {
        auto const label = cell.instance.feature_label();
        for (std::size_t r = 0; r < cell.samples.size(); ++r) {
            out += fmt::format("{},{},{},{}\n", cell.expression, label, r, cell.samples[r]);
        }
    }
    return out;
}

std::vector<problems::ProblemInstance> instances_from_json(Json const& json)
{
    if (!json.is_array()) {
        throw ConfigError("instance set must be a JSON array");
    }
    std::vector<problems::ProblemInstance> out;
    for (auto const& item : json) {
        if (!item.is_object() || !item.contains("kind") || !item.contains("features")) {
            throw ConfigError("each instance needs 'kind' and 'features'");
        }
        try {
            auto const kind = problems::problem_from_string(item.at("kind").get<std::string>());
            expr::FeatureEnvironment env;
            for (auto const& [name, value] : item.at("features").items()) {
                if (!value.is_number()) {
                    throw ConfigError(fmt::format("feature '{}' must be a number", name));
                }
                env.bind(name, value.get<double>());
            }
            out.push_back(problems::ProblemInstance::from_features(kind, env));
        } catch (std::invalid_argument const& e) {
            throw ConfigError(e.what());
        } catch (nlohmann::json::exception const& e) {
            throw ConfigError(e.what());
        }
    }
    if (out.empty()) {
        throw ConfigError("instance set is empty");
    }
    return out;
}

std::vector<problems::ProblemInstance> load_instances(std::filesystem::path const& path)
{
    Json j;
    try {
        j = read_json(path);
    } catch (std::runtime_error const& e) {
        throw ConfigError(e.what());
    }
    return instances_from_json(j);
}

Json read_json(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    }
    auto j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw std::runtime_error(fmt::format("'{}' is not valid JSON", path.string()));
    }
    return j;
}

void write_atomic(std::filesystem::path const& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error(fmt::format("failed writing '{}'", tmp.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error(fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(),
                                             ec.message()));
    }
}

} // namespace featune::io
