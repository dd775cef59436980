// conflictlens: a-priori IoT service conflict detection from usage logs.
//
// Pipeline commands: generate -> ingest -> mine -> detect -> evaluate, plus
// the sweep and scale experiment harnesses. Identical inputs and flags give
// byte-identical outputs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conflictlens/config.hpp"
#include "conflictlens/conflict.hpp"
#include "conflictlens/core.hpp"
#include "conflictlens/evaluate.hpp"
#include "conflictlens/habits.hpp"
#include "conflictlens/log_io.hpp"
#include "conflictlens/preprocess.hpp"
#include "conflictlens/serialize.hpp"
#include "conflictlens/synthetic.hpp"

namespace {

using namespace conflictlens;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

Config load_config(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty()) {
        if (const char* env = std::getenv("CONFLICT_LENS_CONFIG")) path = env;
    }
    if (path.empty()) return {};
    return Config::from_string(read_file(path));
}

ParseOptions parse_options(const Config& config, const std::string& resident_flag) {
    ParseOptions opts;
    opts.default_user = resident_flag.empty()
                            ? config.get_string("parse.default_user", "R0")
                            : resident_flag;
    opts.max_event_seconds = config.get_int("parse.max_event_hours", 4) * 3600;
    return opts;
}

MiningParams mining_params(const Config& config) {
    MiningParams params;
    params.gap_minutes = config.get_double("habit.gap_minutes", 60.0);
    params.min_support = static_cast<std::size_t>(config.get_int("habit.min_support", 5));
    params.complex_merge_overlap = config.get_double("habit.complex_merge_overlap", 0.8);
    return params;
}

void report_anomalies(const ParseResult& parsed) {
    for (const auto& a : parsed.anomalies) {
        std::cerr << "warning: ";
        if (a.line_number > 0) std::cerr << "line " << a.line_number << ": ";
        std::cerr << a.message << '\n';
    }
}

std::vector<double> parse_mu_list(const std::string& text) {
    std::vector<double> mus;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        mus.push_back(std::stod(item));
    }
    if (mus.empty()) throw std::runtime_error("--mus lists no thresholds");
    return mus;
}

int run(int argc, char** argv) {
    CLI::App app{"a-priori IoT service conflict detection from usage habits"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "key=value config file (fallback: CONFLICT_LENS_CONFIG)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "normalize a raw event log");
    std::string ingest_log, ingest_out, ingest_resident;
    ingest->add_option("--log", ingest_log, "raw log file")->required();
    ingest->add_option("--resident", ingest_resident, "resident id for user-less lines");
    ingest->add_option("--out", ingest_out, "output path (default stdout)");

    // mine
    auto* mine = app.add_subcommand("mine", "mine habits from an event log");
    std::string mine_log, mine_out, mine_resident, mine_from, mine_to;
    mine->add_option("--log", mine_log, "event log file")->required();
    mine->add_option("--resident", mine_resident, "resident id for user-less lines");
    mine->add_option("--from", mine_from, "keep events starting on or after YYYY-MM-DD");
    mine->add_option("--to", mine_to, "keep events starting before YYYY-MM-DD");
    mine->add_option("--out", mine_out, "habit DB path (default stdout)");

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "detect conflicts in a habit DB");
    std::string detect_db, detect_out, detect_format = "json";
    double detect_mu = 0.0;
    detect_cmd->add_option("--db", detect_db, "habit DB file")->required();
    detect_cmd->add_option("--mu", detect_mu, "temporal proximity threshold in [0,1]");
    detect_cmd->add_option("--out", detect_out, "output path (default stdout)");
    detect_cmd->add_option("--format", detect_format, "json|tsv")
        ->check(CLI::IsMember({"json", "tsv"}));

    // generate
    auto* generate = app.add_subcommand("generate", "generate a synthetic dataset");
    std::string generate_profile, generate_out = ".";
    std::optional<std::uint64_t> generate_seed;
    generate->add_option("--profile", generate_profile, "profile JSON file")->required();
    generate->add_option("--seed", generate_seed, "override the profile seed");
    generate->add_option("--out", generate_out, "output directory");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against truth");
    std::string eval_pred, eval_truth, eval_out, eval_format = "json";
    evaluate_cmd->add_option("--pred", eval_pred, "report JSON file")->required();
    evaluate_cmd->add_option("--truth", eval_truth, "ground-truth JSON file")->required();
    evaluate_cmd->add_option("--out", eval_out, "output path (default stdout)");
    evaluate_cmd->add_option("--format", eval_format, "json|tsv")
        ->check(CLI::IsMember({"json", "tsv"}));

    // sweep
    auto* sweep = app.add_subcommand("sweep", "recall across proximity thresholds");
    std::string sweep_db, sweep_truth, sweep_out, sweep_format = "tsv";
    std::string sweep_mus = "0,0.2,0.4,0.6,0.8,1.0";
    sweep->add_option("--db", sweep_db, "habit DB file")->required();
    sweep->add_option("--truth", sweep_truth, "ground-truth JSON file")->required();
    sweep->add_option("--mus", sweep_mus, "comma-separated thresholds");
    sweep->add_option("--out", sweep_out, "output path (default stdout)");
    sweep->add_option("--format", sweep_format, "json|tsv")
        ->check(CLI::IsMember({"json", "tsv"}));

    // scale
    auto* scale = app.add_subcommand("scale", "conflict counts across habit DBs");
    std::vector<std::string> scale_dbs;
    std::string scale_out, scale_format = "tsv";
    double scale_mu = 0.0;
    scale->add_option("--db", scale_dbs, "habit DB files, one per resident count")
        ->required()
        ->expected(-1);
    scale->add_option("--mu", scale_mu, "temporal proximity threshold in [0,1]");
    scale->add_option("--out", scale_out, "output path (default stdout)");
    scale->add_option("--format", scale_format, "json|tsv")
        ->check(CLI::IsMember({"json", "tsv"}));

    CLI11_PARSE(app, argc, argv);
    const Config config = load_config(config_path);

    if (*ingest) {
        ParseResult parsed = parse_log(read_file(ingest_log), parse_options(config, ingest_resident));
        report_anomalies(parsed);
        write_output(ingest_out, print_log(parsed.events));
        return 0;
    }

    if (*mine) {
        ParseResult parsed = parse_log(read_file(mine_log), parse_options(config, mine_resident));
        report_anomalies(parsed);
        if (!mine_from.empty() || !mine_to.empty()) {
            const std::int64_t from =
                mine_from.empty() ? std::numeric_limits<std::int64_t>::min()
                                  : parse_timestamp(mine_from + " 00:00:00");
            const std::int64_t to = mine_to.empty()
                                        ? std::numeric_limits<std::int64_t>::max()
                                        : parse_timestamp(mine_to + " 00:00:00");
            std::erase_if(parsed.events, [&](const ServiceEvent& e) {
                return e.interval.start() < from || e.interval.start() >= to;
            });
        }
        std::vector<ServiceEvent> events =
            stabilize(parsed.events, config.get_int("stabilize.window_seconds", 60));
        HabitDatabase db;
        db.bin_schemes = bin_numeric_attributes(
            events, static_cast<std::size_t>(config.get_int("binning.k", 5)));
        db.habits = mine_habits(events, mining_params(config));
        write_output(mine_out, save_habits(db));
        return 0;
    }

    if (*detect_cmd) {
        const HabitDatabase db = load_habits(read_file(detect_db));
        const std::vector<ConflictReport> reports = detect_conflicts(db.habits, detect_mu);
        write_output(detect_out, detect_format == "tsv" ? reports_tsv(reports)
                                                        : save_reports(reports, detect_mu));
        return 0;
    }

    if (*generate) {
        SyntheticProfile profile = load_profile(read_file(generate_profile));
        if (generate_seed) profile.seed = *generate_seed;
        const SyntheticDataset dataset = generate_synthetic(profile);
        std::filesystem::create_directories(generate_out);
        const std::string log_path = generate_out + "/events.log";
        const std::string truth_path = generate_out + "/truth.json";
        write_output(log_path, print_log(dataset.events));
        write_output(truth_path, save_truth(dataset.truth));
        std::cerr << "wrote " << log_path << " (" << dataset.events.size() << " events), "
                  << truth_path << " (" << dataset.truth.size() << " conflicts)\n";
        return 0;
    }

    if (*evaluate_cmd) {
        const EvaluationMetrics metrics = evaluate(load_predicted(read_file(eval_pred)),
                                                   load_truth(read_file(eval_truth)));
        write_output(eval_out,
                     eval_format == "tsv" ? metrics_tsv(metrics) : save_metrics(metrics));
        return 0;
    }

    if (*sweep) {
        const HabitDatabase db = load_habits(read_file(sweep_db));
        const std::vector<SweepRow> rows = sweep_threshold(
            db.habits, load_truth(read_file(sweep_truth)), parse_mu_list(sweep_mus));
        write_output(sweep_out, sweep_format == "json" ? save_sweep(rows) : sweep_tsv(rows));
        return 0;
    }

    if (*scale) {
        std::vector<std::vector<ServiceUsageHabit>> databases;
        for (const auto& path : scale_dbs) databases.push_back(load_habits(read_file(path)).habits);
        const std::vector<ScaleRow> rows = scale_residents(databases, scale_mu);
        write_output(scale_out, scale_format == "json" ? save_scale(rows) : scale_tsv(rows));
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
