#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rvbus/bench.hpp"
#include "rvbus/config.hpp"
#include "rvbus/scenario.hpp"

namespace fs = std::filesystem;
using namespace rvbus;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;  // hazard or negative verdict
constexpr int kExitUsage = 2;         // usage / I-O / parse failure

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

int cmd_validate(const std::string& config_path, bool allow_hazards) {
    MonitorConfig cfg;
    try {
        cfg = parse_config(read_file(config_path));
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    auto hazards = validate_ordering_safety(cfg);
    for (const auto& h : hazards) std::cout << "hazard: " << h.reason << "\n";
    if (hazards.empty()) {
        std::cout << "ok: " << cfg.monitor_id << " (" << cfg.topics.size() << " topics, "
                  << cfg.services.size() << " services)\n";
        return kExitOk;
    }
    if (allow_hazards) {
        std::cout << "proceeding despite " << hazards.size() << " hazard(s) (--allow-hazards)\n";
        return kExitOk;
    }
    return kExitVerification;
}

struct RunArgs {
    std::string config_path;
    std::string properties_path;
    int runs = 10;
    std::uint64_t seed = 1;
    std::string ordering = "on";
    std::string monitor = "on";
    std::string out_dir = "out";
    std::uint64_t jitter_ns = 2 * kBatteryPeriodNs;
    bool allow_hazards = false;
    bool trace = false;
};

int cmd_run(const RunArgs& args) {
    MonitorConfig cfg;
    std::vector<NamedProperty> props;
    try {
        cfg = parse_config(read_file(args.config_path));
        props = parse_property_file(read_file(args.properties_path));
        for (const auto& p : props) parse_property(p.spec);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    auto hazards = validate_ordering_safety(cfg);
    if (!hazards.empty() && !args.allow_hazards) {
        for (const auto& h : hazards) std::cerr << "hazard: " << h.reason << "\n";
        return kExitVerification;
    }

    fs::create_directories(args.out_dir);
    std::vector<RunReport> reports;
    for (int i = 0; i < args.runs; ++i) {
        ScenarioOptions opt;
        opt.seed = args.seed + static_cast<std::uint64_t>(i);
        opt.monitor_enabled = args.monitor == "on";
        opt.ordering_enabled = args.ordering == "on";
        opt.mode = cfg.mode;
        opt.filtering = cfg.filtering;
        opt.pct_jitter_ns = args.jitter_ns;
        opt.tracing = args.trace;
        RunReport report = run_case_study(opt);

        std::ostringstream events;
        for (const auto& line : report.event_lines) events << line << '\n';
        write_file(fs::path(args.out_dir) / ("run" + std::to_string(i) + "_events.jsonl"),
                   events.str());
        std::ostringstream verdicts;
        for (const auto& v : report.verdicts)
            verdicts << serialize_verdict(v.property_id, v.time, v.verdict) << '\n';
        write_file(fs::path(args.out_dir) / ("run" + std::to_string(i) + "_verdicts.jsonl"),
                   verdicts.str());
        if (args.trace) {
            std::ostringstream trace;
            for (const auto& line : report.trace_lines) trace << line << '\n';
            write_file(fs::path(args.out_dir) / ("run" + std::to_string(i) + "_trace.jsonl"),
                       trace.str());
        }
        reports.push_back(std::move(report));
    }

    write_file(fs::path(args.out_dir) / "roundtrip.csv", roundtrip_csv(reports));
    write_file(fs::path(args.out_dir) / "wait.csv", wait_csv(reports));
    write_file(fs::path(args.out_dir) / "verdicts.csv", verdicts_csv(reports));

    std::uint64_t total_negatives = 0;
    for (const auto& r : reports)
        for (const auto& [prop, counts] : r.verdict_counts) total_negatives += counts.second;
    std::cout << "completed " << args.runs << " run(s); negatives: " << total_negatives << "\n";
    return kExitOk;
}

int cmd_check(const std::string& log_path, const std::string& properties_path,
              const std::string& out_path) {
    std::vector<std::string> lines;
    std::vector<NamedProperty> props;
    try {
        lines = read_lines(log_path);
        props = parse_property_file(read_file(properties_path));
        for (const auto& p : props) parse_property(p.spec);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    CheckResult result;
    try {
        result = check_log(lines, props);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    std::ostringstream out;
    for (const auto& line : result.verdict_lines) out << line << '\n';
    if (out_path.empty() || out_path == "-") {
        std::cout << out.str();
    } else {
        try {
            write_file(out_path, out.str());
        } catch (const std::exception& ex) {
            std::cerr << "error: " << ex.what() << "\n";
            return kExitUsage;
        }
    }
    return result.any_negative ? kExitVerification : kExitOk;
}

int cmd_summarize(const std::string& roundtrip_path, const std::string& wait_path,
                  const std::string& out_path) {
    std::vector<StatSummary> rows;
    try {
        if (!roundtrip_path.empty()) {
            std::map<std::string, std::vector<double>> series;  // call_index -> ns
            for (const auto& line : read_lines(roundtrip_path)) {
                if (line.rfind("run,", 0) == 0) continue;
                std::istringstream ss(line);
                std::string run, idx, req_id, req_status, ok, ns;
                std::getline(ss, run, ',');
                std::getline(ss, idx, ',');
                std::getline(ss, req_id, ',');
                std::getline(ss, req_status, ',');
                std::getline(ss, ok, ',');
                std::getline(ss, ns, ',');
                series["roundtrip_call" + idx].push_back(std::stod(ns));
            }
            for (const auto& [name, values] : series)
                rows.push_back(summarize_series(name, values));
        }
        if (!wait_path.empty()) {
            std::map<std::string, std::vector<double>> series;  // channel -> wait ns
            for (const auto& line : read_lines(wait_path)) {
                if (line.rfind("run,", 0) == 0) continue;
                std::istringstream ss(line);
                std::string run, channel, seq, pub, buffered, released;
                std::getline(ss, run, ',');
                std::getline(ss, channel, ',');
                std::getline(ss, seq, ',');
                std::getline(ss, pub, ',');
                std::getline(ss, buffered, ',');
                std::getline(ss, released, ',');
                series["wait_" + channel].push_back(std::stod(released) - std::stod(buffered));
            }
            for (const auto& [name, values] : series)
                rows.push_back(summarize_series(name, values));
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    std::string csv = summary_csv(rows);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rvbus: runtime verification over a simulated pub-sub/service bus"};
    app.require_subcommand(1);

    std::string config_path, properties_path, log_path, out_path;
    bool allow_hazards = false;

    auto* validate = app.add_subcommand("validate", "validate a monitor config");
    validate->add_option("config", config_path, "config file")->required();
    validate->add_flag("--allow-hazards", allow_hazards, "exit 0 even when hazards are found");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run the battery case study");
    run->add_option("--config", run_args.config_path, "monitor config")->required();
    run->add_option("--properties", run_args.properties_path, "property file")->required();
    run->add_option("--runs", run_args.runs, "number of seeded runs");
    run->add_option("--seed", run_args.seed, "base seed");
    run->add_option("--ordering", run_args.ordering, "on|off")
        ->check(CLI::IsMember({"on", "off"}));
    run->add_option("--monitor", run_args.monitor, "on|off")->check(CLI::IsMember({"on", "off"}));
    run->add_option("--out", run_args.out_dir, "output directory");
    run->add_option("--jitter-ns", run_args.jitter_ns, "percentage-topic delivery jitter");
    run->add_flag("--allow-hazards", run_args.allow_hazards, "run despite config hazards");
    run->add_flag("--trace", run_args.trace, "record the full delivery trace");

    auto* check = app.add_subcommand("check", "replay an event log through the oracle");
    check->add_option("--log", log_path, "event JSON Lines log")->required();
    check->add_option("--properties", properties_path, "property file")->required();
    check->add_option("--out", out_path, "verdict output path (default stdout)");

    std::string roundtrip_path, wait_path;
    auto* summarize = app.add_subcommand("summarize", "mean/std summaries of run CSVs");
    summarize->add_option("--roundtrip", roundtrip_path, "roundtrip.csv from `run`");
    summarize->add_option("--wait", wait_path, "wait.csv from `run`");
    summarize->add_option("--out", out_path, "summary output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (validate->parsed()) return cmd_validate(config_path, allow_hazards);
        if (run->parsed()) return cmd_run(run_args);
        if (check->parsed()) return cmd_check(log_path, properties_path, out_path);
        if (summarize->parsed()) return cmd_summarize(roundtrip_path, wait_path, out_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
