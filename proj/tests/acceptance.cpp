// Acceptance suite: runs the full battery of end-to-end checks and prints
// one PASS/FAIL line per criterion. Exit status is non-zero when any
// criterion fails. `--only N` restricts the run to a single criterion;
// `--cli PATH` points at the command-line binary for the process-level
// checks.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "rvbus/bench.hpp"
#include "rvbus/config.hpp"
#include "rvbus/scenario.hpp"

using namespace rvbus;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;
std::ostringstream g_detail;

bool is_ordered_channel(const MonitorConfig& cfg, const ChannelId& ch) {
    if (ch.kind == ChannelKind::Topic) {
        const TopicSpec* t = cfg.find_topic(ch.name);
        return t && t->ordered;
    }
    const ServiceSpec* s = cfg.find_service(ch.name);
    return s && s->ordered;
}

std::vector<OrderKey> ordered_subsequence(const RunReport& report) {
    MonitorConfig cfg = case_study_config();
    std::vector<OrderKey> out;
    for (const auto& k : report.dispatched_keys)
        if (is_ordered_channel(cfg, k.channel)) out.push_back(k);
    return out;
}

// Criteria 1 & 2 share one randomized campaign; results are cached so the
// suite does not run it twice.
struct RandomizedCampaign {
    std::uint64_t sorted_violations = 0;
    std::uint64_t lemma_violations = 0;
    std::size_t runs = 0;
    double elapsed_s = 0.0;
};

const RandomizedCampaign& randomized_campaign() {
    static RandomizedCampaign result = [] {
        RandomizedCampaign c;
        auto start = std::chrono::steady_clock::now();
        std::mt19937_64 meta(0x5EEDu);
        for (int i = 0; i < 1000; ++i) {
            ScenarioOptions opt;
            opt.seed = meta();
            opt.battery_floor = 80;  // reduced-length runs
            opt.pct_jitter_ns = meta() % (4 * kBatteryPeriodNs);
            opt.check_invariants = true;
            RunReport report = run_case_study(opt);
            auto ordered = ordered_subsequence(report);
            if (!std::is_sorted(ordered.begin(), ordered.end())) ++c.sorted_violations;
            c.lemma_violations += report.invariant_violations;
            ++c.runs;
        }
        c.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return c;
    }();
    return result;
}

// Criteria 3-8 reuse one set of seeded full runs per mode.
const std::vector<RunReport>& full_runs(bool monitor, bool ordering) {
    static std::map<std::pair<bool, bool>, std::vector<RunReport>> cache;
    auto key = std::make_pair(monitor, ordering);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<RunReport> reports;
    for (std::uint64_t i = 0; i < 10; ++i) {
        ScenarioOptions opt;
        opt.seed = 100 + i;
        opt.monitor_enabled = monitor;
        opt.ordering_enabled = ordering;
        reports.push_back(run_case_study(opt));
    }
    return cache.emplace(key, std::move(reports)).first->second;
}

bool criterion1_theorem_suite() {
    const auto& c = randomized_campaign();
    g_detail << c.runs << " randomized runs, " << c.sorted_violations << " ordering violations, "
             << std::fixed << c.elapsed_s << "s";
    return c.runs == 1000 && c.sorted_violations == 0 && c.elapsed_s < 60.0;
}

bool criterion2_lemma_suite() {
    const auto& c = randomized_campaign();
    g_detail << c.lemma_violations << " unsorted-buffer observations";
    return c.lemma_violations == 0;
}

bool criterion3_accuracy_with_ordering() {
    std::uint64_t negatives = 0;
    for (const auto& r : full_runs(true, true))
        for (const auto& p : case_study_properties()) negatives += r.negatives(p.id);
    g_detail << negatives << " negative verdicts across 10 ordered runs";
    return negatives == 0;
}

bool criterion4_false_negatives_without_ordering() {
    bool ok = true;
    for (const auto& r : full_runs(true, false)) {
        std::uint64_t n = r.negatives("1a") + r.negatives("2a") + r.negatives("3a");
        if (n == 0) ok = false;
    }
    g_detail << "each unordered run shows >=1 negative on 1a/2a/3a: " << (ok ? "yes" : "no");
    return ok;
}

bool criterion5_three_service_calls() {
    bool ok = true;
    for (bool monitor : {false, true}) {
        for (bool ordering : {false, true}) {
            if (!monitor && !ordering) continue;  // same wiring as monitor-off
            for (const auto& r : full_runs(monitor, ordering)) {
                if (r.calls.size() != 3) ok = false;
                if (r.calls.size() == 3) {
                    ok = ok && r.calls[0].req_status == "1" && r.calls[1].req_status == "2" &&
                         r.calls[2].req_status == "3";
                    ok = ok && r.calls[1].req_id >= 60 && r.calls[1].req_id <= 62;
                    ok = ok && r.calls[2].req_id >= 70 && r.calls[2].req_id <= 72;
                }
            }
        }
    }
    g_detail << "three calls with req_status 1,2,3 and id windows [60,62]/[70,72]: "
             << (ok ? "yes" : "no");
    return ok;
}

bool criterion6_buffer_wait_trend() {
    double early_sum = 0, early_n = 0, late_sum = 0, late_n = 0;
    for (const auto& r : full_runs(true, true)) {
        std::map<std::uint64_t, const WaitRecord*> by_seq;
        for (const auto& w : r.waits) {
            if (w.channel != topic_channel("/battery_percentage")) continue;
            // seq equals the battery message id for this topic.
            double wait = double(w.released_at.nanos - w.buffered_at.nanos);
            if (w.seq < 60) {
                early_sum += wait;
                early_n += 1;
            } else if (w.seq < 70) {
                late_sum += wait;
                late_n += 1;
            }
        }
    }
    double early_mean = early_sum / std::max(early_n, 1.0);
    double late_mean = late_sum / std::max(late_n, 1.0);
    double factor = late_mean > 0 ? early_mean / late_mean : 0;
    g_detail << "mean wait id<60: " << std::fixed << early_mean / 1e6
             << "ms, 60<=id<70: " << late_mean / 1e6 << "ms, factor " << factor;
    return factor >= 5.0;
}

struct CallMeans {
    double rt[3] = {0, 0, 0};
    double req_wait[3] = {0, 0, 0};
    double res_wait[3] = {0, 0, 0};
};

CallMeans call_means(const std::vector<RunReport>& reports) {
    CallMeans m;
    double counts[3] = {0, 0, 0};
    for (const auto& r : reports) {
        for (const auto& c : r.calls) {
            int i = c.call_index - 1;
            if (i < 0 || i > 2) continue;
            m.rt[i] += double(c.roundtrip_ns());
            counts[i] += 1;
        }
        int req_seen = 0, res_seen = 0;
        for (const auto& w : r.waits) {
            if (w.channel == request_channel("/SetLED") && req_seen < 3)
                m.req_wait[req_seen++] += double(w.released_at.nanos - w.buffered_at.nanos);
            if (w.channel == response_channel("/SetLED") && res_seen < 3)
                m.res_wait[res_seen++] += double(w.released_at.nanos - w.buffered_at.nanos);
        }
    }
    for (int i = 0; i < 3; ++i) {
        m.rt[i] /= std::max(counts[i], 1.0);
        m.req_wait[i] /= std::max(counts[i], 1.0);
        m.res_wait[i] /= std::max(counts[i], 1.0);
    }
    return m;
}

bool criterion7_roundtrip_trend() {
    CallMeans none = call_means(full_runs(false, false));
    CallMeans unordered = call_means(full_runs(true, false));
    CallMeans ordered = call_means(full_runs(true, true));
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
        if (!(none.rt[i] <= unordered.rt[i])) ok = false;
        if (!(unordered.rt[i] < ordered.rt[i])) ok = false;
    }
    bool max_at_third = ordered.rt[2] >= ordered.rt[0] && ordered.rt[2] >= ordered.rt[1];
    g_detail << "ordered rt (ms): " << std::fixed << ordered.rt[0] / 1e6 << ", "
             << ordered.rt[1] / 1e6 << ", " << ordered.rt[2] / 1e6
             << "; unordered rt3: " << unordered.rt[2] / 1e6
             << "ms; none rt3: " << none.rt[2] / 1e6 << "ms";
    return ok && max_at_third;
}

bool criterion8_request_wait_growth() {
    CallMeans ordered = call_means(full_runs(true, true));
    bool grows = ordered.req_wait[0] < ordered.req_wait[1] &&
                 ordered.req_wait[1] < ordered.req_wait[2];
    bool responses_prompt = true;
    for (int i = 0; i < 3; ++i)
        if (!(ordered.res_wait[i] < 0.1 * ordered.req_wait[i])) responses_prompt = false;
    g_detail << "req waits (ms): " << std::fixed << ordered.req_wait[0] / 1e6 << ", "
             << ordered.req_wait[1] / 1e6 << ", " << ordered.req_wait[2] / 1e6
             << "; res waits (ms): " << ordered.res_wait[0] / 1e6 << ", "
             << ordered.res_wait[1] / 1e6 << ", " << ordered.res_wait[2] / 1e6;
    return grows && responses_prompt;
}

bool criterion9_oracle_equivalence() {
    auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xACCE57);
    const auto shipped = case_study_properties();
    std::size_t mismatches = 0;

    auto random_event = [&](bool service_flavoured) {
        Event e;
        e.channel = topic_channel("/x");
        e.pub_time = Timestamp{rng() % 1000};
        if (service_flavoured && rng() % 3 == 0) {
            bool is_req = rng() % 2 == 0;
            e.fields = {{"service", std::string("/SetLED")},
                        {"request", is_req},
                        {"response", !is_req}};
            if (is_req) {
                e.fields["req_id"] = static_cast<std::int64_t>(rng() % 4);
                e.fields["req_status"] = std::string(rng() % 2 ? "1" : "2");
            } else {
                e.fields["res_id"] = static_cast<std::int64_t>(rng() % 4);
            }
        } else {
            switch (rng() % 3) {
                case 0:
                    e.fields = {{"topic", std::string("/battery_status")},
                                {"id", static_cast<std::int64_t>(rng() % 4)},
                                {"status", std::string(rng() % 2 ? "1" : "2")},
                                {"status_change", rng() % 2 == 0}};
                    break;
                case 1:
                    e.fields = {{"topic", std::string("/input_accepted")},
                                {"id", static_cast<std::int64_t>(rng() % 4)}};
                    break;
                default:
                    e.fields = {{"topic", std::string("/battery_percentage")},
                                {"id", static_cast<std::int64_t>(rng() % 4)},
                                {"percentage", std::string(rng() % 2 ? "1" : "2")}};
                    break;
            }
        }
        return e;
    };

    for (int round = 0; round < 500; ++round) {
        const auto& prop = shipped[rng() % shipped.size()];
        PropertyAst ast = parse_property(prop.spec);
        std::vector<Event> trace;
        std::size_t len = rng() % 51;
        for (std::size_t i = 0; i < len; ++i) trace.push_back(random_event(true));

        MonitorState state(prop.id, parse_property(prop.spec));
        std::vector<Verdict> incremental;
        for (const auto& e : trace) incremental.push_back(state.update(e));
        if (incremental != brute_force_eval(ast, trace)) ++mismatches;
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    g_detail << "500 pairs, " << mismatches << " mismatches, " << std::fixed << elapsed << "s";
    return mismatches == 0 && elapsed < 30.0;
}

bool criterion10_service_mediation() {
    // Targeted mediation checks with properties that reject tagged traffic.
    SimBus bus;
    NodeHandle* client = bus.add_node("client");
    NodeHandle* server = bus.add_node("server");
    int invocations = 0;
    bus.advertise_service(server, "/S", [&](const FieldMap& req) -> FieldMap {
        ++invocations;
        FieldMap res{{"success", true}};
        if (req.count("fail_response")) res["fail"] = true;
        return res;
    });
    MonitorConfig cfg;
    cfg.monitor_id = "m";
    cfg.mode = MonitorMode::Online;
    cfg.filtering = true;
    cfg.services = {{"/S", "/S_mon", false}};
    std::vector<NamedProperty> props{
        {"deny-bad-request", "not {service: \"/S\", request: True, bad: True}"},
        {"deny-bad-response", "not {service: \"/S\", response: True, fail: True}"},
    };
    Monitor monitor(cfg, props);
    monitor.set_transform(build_oracle_event);
    monitor.attach(bus);

    bool ok = true;
    // Good request, good response.
    FieldMap r1 = bus.call_service(client, "/S_mon", {});
    ok = ok && invocations == 1 && std::get<bool>(r1.at("success"));
    // Negative request verdict: never invoked, client sees an error mapping.
    FieldMap r2 = bus.call_service(client, "/S_mon", {{"bad", true}});
    ok = ok && invocations == 1 && !std::get<bool>(r2.at("success"));
    // Negative response verdict: invoked, client still sees an error mapping.
    FieldMap r3 = bus.call_service(client, "/S_mon", {{"fail_response", true}});
    ok = ok && invocations == 2 && !std::get<bool>(r3.at("success"));
    g_detail << "invocations: " << invocations
             << ", request-rejected ok: " << (!std::get<bool>(r2.at("success")) ? "yes" : "no")
             << ", response-rejected ok: " << (!std::get<bool>(r3.at("success")) ? "yes" : "no");
    return ok;
}

int run_cli(const std::string& args) {
    std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

bool criterion11_hazard_validation() {
    if (g_cli_path.empty()) {
        g_detail << "no --cli path given";
        return false;
    }
    const std::string dir = RVBUS_CONFIG_DIR;
    int good = run_cli("validate " + dir + "/case_study.config");
    int bad = run_cli("validate " + dir + "/deadlock_hazard.config");
    int overridden = run_cli("validate --allow-hazards " + dir + "/deadlock_hazard.config");
    int missing = run_cli("validate " + dir + "/does_not_exist.config");
    g_detail << "case_study: exit " << good << ", hazard: exit " << bad
             << ", overridden: exit " << overridden << ", missing: exit " << missing;
    return good == 0 && bad == 1 && overridden == 0 && missing == 2;
}

bool criterion12_flush() {
    bool ok = true;
    std::size_t residues = 0;
    for (const auto& r : full_runs(true, true)) {
        if (!r.buffers_empty_after_flush) ok = false;
        auto ordered = ordered_subsequence(r);
        if (!std::is_sorted(ordered.begin(), ordered.end())) ok = false;
        if (r.buffered_count != r.dispatched_ordered_count) ok = false;
        residues += ordered.size();
    }
    g_detail << "buffers empty, ordered sequences sorted through flush, no loss ("
             << residues << " ordered dispatches)";
    return ok;
}

bool criterion13_replay_equivalence() {
    ScenarioOptions opt;
    opt.seed = 2024;
    RunReport report = run_case_study(opt);
    CheckResult replay = check_log(report.event_lines, case_study_properties());
    std::vector<std::string> online;
    for (const auto& v : report.verdicts)
        online.push_back(serialize_verdict(v.property_id, v.time, v.verdict));
    bool equal = online == replay.verdict_lines;
    g_detail << online.size() << " verdict lines, byte-identical: " << (equal ? "yes" : "no");

    if (g_cli_path.empty()) return equal;
    // End to end through the CLI as well.
    fs::path tmp = fs::temp_directory_path() / "rvbus_acceptance";
    fs::create_directories(tmp);
    std::ofstream events(tmp / "events.jsonl");
    for (const auto& line : report.event_lines) events << line << '\n';
    events.close();
    std::ofstream online_file(tmp / "online.jsonl");
    for (const auto& line : online) online_file << line << '\n';
    online_file.close();
    std::string dir = RVBUS_CONFIG_DIR;
    int rc = run_cli("check --log " + (tmp / "events.jsonl").string() + " --properties " + dir +
                     "/case_study.properties --out " + (tmp / "replay.jsonl").string());
    std::ifstream a(tmp / "online.jsonl"), b(tmp / "replay.jsonl");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    bool files_equal = sa.str() == sb.str() && !sa.str().empty();
    g_detail << ", cli exit " << rc << ", file-identical: " << (files_equal ? "yes" : "no");
    return equal && rc == 0 && files_equal;
}

struct Criterion {
    int number;
    const char* name;
    std::function<bool()> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
        if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    }

    std::vector<Criterion> criteria = {
        {1, "oracle sequence sorted by publication over randomized runs",
         criterion1_theorem_suite},
        {2, "buffer queues stay sorted after every step", criterion2_lemma_suite},
        {3, "ordered runs yield accurate verdicts", criterion3_accuracy_with_ordering},
        {4, "unordered runs yield false negatives", criterion4_false_negatives_without_ordering},
        {5, "three service calls with anchored ids", criterion5_three_service_calls},
        {6, "percentage buffer wait drops after id 60", criterion6_buffer_wait_trend},
        {7, "roundtrip ordering across modes, max at third call", criterion7_roundtrip_trend},
        {8, "request waits grow; responses release promptly", criterion8_request_wait_growth},
        {9, "incremental oracle matches brute force", criterion9_oracle_equivalence},
        {10, "mediation gates the real service on verdicts", criterion10_service_mediation},
        {11, "validator rejects the deadlock-hazard config", criterion11_hazard_validation},
        {12, "flush releases residues sorted and empties buffers", criterion12_flush},
        {13, "offline replay reproduces online verdicts", criterion13_replay_equivalence},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.number != only) continue;
        g_detail.str("");
        bool pass = false;
        try {
            pass = c.run();
        } catch (const std::exception& ex) {
            g_detail << "exception: " << ex.what();
        }
        std::printf("CRITERION %2d: %s - %s (%s)\n", c.number, pass ? "PASS" : "FAIL", c.name,
                    g_detail.str().c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failing\n", failures);
    return failures == 0 ? 0 : 1;
}
