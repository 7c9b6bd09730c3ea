#include "featune/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "featune/engine.hpp"
#include "featune/harness.hpp"
#include "featune/parallel.hpp"
#include "featune/parser.hpp"
#include "featune/report_io.hpp"

namespace featune::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

fs::path output_directory(std::string const& flag)
{
    fs::path dir = flag;
    if (dir.empty()) {
        char const* env = std::getenv(output_dir_variable);
        dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw InvalidInput(fmt::format("output directory '{}' cannot be created", dir.string()));
    }
    auto probe = dir / ".featune-probe";
    {
        std::ofstream out(probe);
        if (!out) {
            throw InvalidInput(fmt::format("output directory '{}' is not writable", dir.string()));
        }
    }
    fs::remove(probe, ec);
    return dir;
}

std::string dump(Json const& j) { return j.dump(2) + "\n"; }

std::vector<std::size_t> parse_sizes(std::string const& text)
{
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        auto const item = text.substr(start, end - start);
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || ec != std::errc {} || ptr != item.data() + item.size() || value < 1) {
            throw InvalidInput(fmt::format("bad size '{}' in '{}'", item, text));
        }
        out.push_back(value);
        start = end + 1;
    }
    return out;
}

struct TuneArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::string out;
    std::size_t workers = default_workers();
    std::string pool = "top5";
    std::size_t tuner_runs = 10;
};

int do_tune(TuneArgs const& a, std::ostream& out)
{
    auto config = a.config.empty() ? engine::TunerConfig {} : io::load_config(a.config);
    for (auto const& o : a.overrides) {
        io::apply_override(config, o);
    }
    if (a.seed) {
        config.seed = *a.seed;
    }
    config.validate();
    harness::TrainOptions options;
    options.tuner_runs = a.tuner_runs;
    options.pool = harness::pool_from_string(a.pool);
    options.workers = a.workers;
    auto const dir = output_directory(a.out);

    auto const report = harness::train_protocol(config, options);
    auto const path = dir / "elites.json";
    io::write_atomic(path, dump(io::to_json(report)));

    out << fmt::format("{} / {} / budget {}: pool of {} from {} tuner runs\n", problems::to_string(config.problem),
                       solvers::to_string(config.solver), config.budget, report.pool_size, report.tuner_runs);
    for (auto const& e : report.top(3)) {
        out << fmt::format("  {} = {}  (frequency {}, best score {:.4f})\n", solvers::parameter_name(config.solver),
                           e.expression, e.frequency, e.best_score);
    }
    out << "wrote " << path.string() << "\n";
    return exit_ok;
}

struct EvalArgs {
    std::string config;
    std::vector<std::string> exprs;
    std::string from;
    bool baseline = false;
    std::string problem;
    std::string solver;
    std::string budget;
    std::string sizes;
    std::size_t m = 0;
    std::string instances;
    std::size_t runs = 100;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t workers = default_workers();
};

int do_eval(EvalArgs const& a, std::ostream& out)
{
    auto config = a.config.empty() ? engine::TunerConfig {} : io::load_config(a.config);
    try {
        if (!a.problem.empty()) {
            config.problem = problems::problem_from_string(a.problem);
        }
        if (!a.solver.empty()) {
            config.solver = solvers::solver_from_string(a.solver);
        }
    } catch (std::invalid_argument const& e) {
        throw InvalidInput(e.what());
    }
    if (!a.budget.empty()) {
        config.budget = a.budget;
    }
    auto const seed = a.seed.value_or(config.seed);

    std::vector<expr::Expression> exprs;
    for (auto const& text : a.exprs) {
        exprs.push_back(expr::parse(text));
    }
    if (!a.from.empty()) {
        auto const j = io::read_json(a.from);
        if (!j.contains("top3") || !j.at("top3").is_array()) {
            throw InvalidInput(fmt::format("'{}' is not an elite report", a.from));
        }
        for (auto const& t : j.at("top3")) {
            exprs.push_back(expr::parse(t.get<std::string>()));
        }
    }
    if (a.baseline) {
        auto b = harness::baseline_expressions(config.solver, config.problem);
        exprs.insert(exprs.end(), b.begin(), b.end());
    }
    if (exprs.empty()) {
        throw InvalidInput("no expressions given (use --expr, --from or --baseline)");
    }

    std::vector<problems::ProblemInstance> instances;
    if (!a.instances.empty()) {
        instances = io::load_instances(a.instances);
    } else if (!a.sizes.empty()) {
        for (auto n : parse_sizes(a.sizes)) {
            try {
                switch (config.problem) {
                case problems::ProblemKind::onemax: instances.push_back(problems::ProblemInstance::onemax(n)); break;
                case problems::ProblemKind::binvalue:
                    instances.push_back(problems::ProblemInstance::binvalue(n));
                    break;
                case problems::ProblemKind::leadingones:
                    instances.push_back(problems::ProblemInstance::leadingones(n));
                    break;
                case problems::ProblemKind::jump:
                    if (a.m == 0) {
                        throw InvalidInput("--sizes with jump needs --m");
                    }
                    instances.push_back(problems::ProblemInstance::jump(a.m, n));
                    break;
                }
            } catch (std::invalid_argument const& e) {
                throw InvalidInput(e.what());
            }
        }
    } else {
        instances = problems::training_set(config.problem);
    }
    for (auto const& inst : instances) {
        if (inst.kind() != config.problem) {
            throw InvalidInput(fmt::format("instance {} of {} does not match problem {}", inst.feature_label(),
                                           problems::to_string(inst.kind()), problems::to_string(config.problem)));
        }
    }

    auto const dir = output_directory(a.out);
    auto const table = harness::evaluate_expressions(exprs, instances, config.solver, config.budget, a.runs, seed,
                                                     a.workers);

    auto summary = io::summary_json(table);
    Json echo;
    echo["problem"] = problems::to_string(config.problem);
    echo["solver"] = solvers::to_string(config.solver);
    echo["budget"] = config.budget;
    echo["runs"] = a.runs;
    echo["seed"] = seed;
    Json texts = Json::array();
    for (auto const& e : exprs) {
        texts.push_back(expr::format(e));
    }
    echo["expressions"] = texts;
    Json labels = Json::array();
    for (auto const& inst : instances) {
        labels.push_back(inst.feature_label());
    }
    echo["instances"] = labels;
    summary["config"] = echo;

    io::write_atomic(dir / "evaluation.csv", io::evaluation_csv(table));
    io::write_atomic(dir / "evaluation.json", dump(summary));
    for (auto const& cell : summary.at("cells")) {
        out << fmt::format("  {:<16} {:<12} median {:.4f}  [{:.4f}, {:.4f}]\n", cell.at("expression").get<std::string>(),
                           cell.at("instance_features").get<std::string>(), cell.at("median").get<double>(),
                           cell.at("q1").get<double>(), cell.at("q3").get<double>());
    }
    out << "wrote " << (dir / "evaluation.csv").string() << " and " << (dir / "evaluation.json").string() << "\n";
    return exit_ok;
}

int do_report(std::vector<std::string> const& inputs, std::string const& out_flag, std::ostream& out)
{
    Json merged;
    merged["kind"] = "summary";
    Json items = Json::array();
    for (auto const& name : inputs) {
        Json j;
        try {
            j = io::read_json(name);
        } catch (std::runtime_error const& e) {
            throw InvalidInput(e.what());
        }
        auto const kind = j.value("kind", std::string {});
        Json item;
        item["file"] = fs::path(name).filename().string();
        item["kind"] = kind;
        if (kind == "elite_report") {
            item["config"] = j.at("config");
            item["pool"] = j.at("pool");
            item["pool_size"] = j.at("pool_size");
            Json top = Json::array();
            auto const& entries = j.at("entries");
            for (std::size_t i = 0; i < std::min<std::size_t>(3, entries.size()); ++i) {
                top.push_back({ { "expression", entries[i].at("expression") },
                                { "frequency", entries[i].at("frequency") },
                                { "best_score", entries[i].at("best_score") } });
            }
            item["top3"] = top;
        } else if (kind == "evaluation_summary") {
            item["config"] = j.value("config", Json::object());
            Json cells = Json::array();
            for (auto const& c : j.at("cells")) {
                cells.push_back({ { "expression", c.at("expression") },
                                  { "instance_features", c.at("instance_features") },
                                  { "median", c.at("median") },
                                  { "q1", c.at("q1") },
                                  { "q3", c.at("q3") } });
            }
            item["cells"] = cells;
        } else {
            throw InvalidInput(fmt::format("'{}' is neither an elite report nor an evaluation summary", name));
        }
        items.push_back(std::move(item));
    }
    merged["inputs"] = items;
    auto const dir = output_directory(out_flag);
    io::write_atomic(dir / "summary.json", dump(merged));
    out << "merged " << inputs.size() << " file(s) into " << (dir / "summary.json").string() << "\n";
    return exit_ok;
}

int do_oracle(std::vector<std::string> checks, std::uint64_t seed, std::ostream& out)
{
    if (checks.empty()) {
        checks = harness::oracle_names();
    }
    auto const known = harness::oracle_names();
    for (auto const& c : checks) {
        if (std::find(known.begin(), known.end(), c) == known.end()) {
            throw InvalidInput(fmt::format("unknown oracle '{}'; known: {}", c, fmt::join(known, ", ")));
        }
    }
    bool all = true;
    for (auto const& c : checks) {
        auto const r = harness::run_oracle(c, seed);
        out << fmt::format("{} {}: {}\n    measured {:.6g}, expected {:.6g}", r.passed ? "PASS" : "FAIL", r.name,
                           r.description, r.measured, r.expected);
        if (r.tolerance > 0.0) {
            out << fmt::format(" +/- {:g}%", r.tolerance * 100.0);
        }
        out << "\n";
        all = all && r.passed;
    }
    return all ? exit_ok : exit_failure;
}

} // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app { "Tunes solver parameters as expressions of instance features" };
    app.name("featune");
    app.require_subcommand(1);

    TuneArgs tune;
    auto* tune_cmd = app.add_subcommand("tune", "run the training protocol and write elites.json");
    tune_cmd->add_option("--config", tune.config, "JSON configuration file")->check(CLI::ExistingFile);
    tune_cmd->add_option("--seed", tune.seed, "master seed (overrides the configuration)");
    tune_cmd->add_option("--set", tune.overrides, "configuration override key=value")->allow_extra_args(false);
    tune_cmd->add_option("--out", tune.out, "output directory");
    tune_cmd->add_option("--workers", tune.workers, "worker threads")->check(CLI::PositiveNumber);
    tune_cmd->add_option("--pool", tune.pool, "frequency pool")->check(CLI::IsMember({ "top5", "full" }));
    tune_cmd->add_option("--tuner-runs", tune.tuner_runs, "independent tuner runs")->check(CLI::PositiveNumber);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate expressions and write evaluation.csv/json");
    eval_cmd->add_option("--config", eval.config, "JSON configuration file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--expr", eval.exprs, "expression (repeatable)")->allow_extra_args(false);
    eval_cmd->add_option("--from", eval.from, "take the top 3 of an elite report")->check(CLI::ExistingFile);
    eval_cmd->add_flag("--baseline", eval.baseline, "add the baseline family");
    eval_cmd->add_option("--problem", eval.problem, "onemax, binvalue, leadingones or jump");
    eval_cmd->add_option("--solver", eval.solver, "ea or rls");
    eval_cmd->add_option("--budget", eval.budget, "budget expression");
    eval_cmd->add_option("--sizes", eval.sizes, "comma-separated n values");
    eval_cmd->add_option("--m", eval.m, "jump width used with --sizes");
    eval_cmd->add_option("--instances", eval.instances, "instance-set JSON file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--runs", eval.runs, "runs per cell")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", eval.seed, "seed");
    eval_cmd->add_option("--out", eval.out, "output directory");
    eval_cmd->add_option("--workers", eval.workers, "worker threads")->check(CLI::PositiveNumber);

    std::vector<std::string> report_inputs;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "merge outputs into summary.json");
    report_cmd->add_option("--in", report_inputs, "elites.json or evaluation.json (repeatable)")
        ->required()
        ->allow_extra_args(false);
    report_cmd->add_option("--out", report_out, "output directory");

    std::vector<std::string> checks;
    std::uint64_t oracle_seed = 1;
    auto* oracle_cmd = app.add_subcommand("oracle", "run solver runtime oracles");
    oracle_cmd->add_option("--check", checks, "oracle name (repeatable; default all)")->allow_extra_args(false);
    oracle_cmd->add_option("--seed", oracle_seed, "seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return exit_ok;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (CLI::ParseError const& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    }

    try {
        if (tune_cmd->parsed()) {
            return do_tune(tune, out);
        }
        if (eval_cmd->parsed()) {
            return do_eval(eval, out);
        }
        if (report_cmd->parsed()) {
            return do_report(report_inputs, report_out, out);
        }
        return do_oracle(checks, oracle_seed, out);
    } catch (InvalidInput const& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (engine::ConfigError const& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (expr::ParseError const& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (std::exception const& e) {
        err << "failure: " << e.what() << "\n";
        return exit_failure;
    }
}

} // namespace featune::cli
