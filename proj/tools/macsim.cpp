// Command-line entry point: run scenario files, attack conflict-free algorithms, sweep grids.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "macsim/attacker.hpp"
#include "macsim/suite.hpp"

namespace fs = std::filesystem;
using namespace macsim;

namespace {

AlgorithmSpec parse_alg(const std::string& name, const std::vector<std::string>& sequences) {
    const auto kind = algorithm_from_string(name);
    if (!kind) throw SimError("unknown algorithm '" + name + "'");
    return AlgorithmSpec{*kind, sequences};
}

void print_results(const std::vector<ScenarioResult>& results) {
    std::cout << std::left << std::setw(32) << "scenario" << std::right << std::setw(10) << "max_lat"
              << std::setw(10) << "max_q" << std::setw(10) << "pending" << std::setw(10) << "collide"
              << "  status\n";
    for (const auto& r : results) {
        std::cout << std::left << std::setw(32) << r.name << std::right << std::setw(10) << r.metrics.max_latency
                  << std::setw(10) << r.metrics.max_queue_total << std::setw(10) << r.metrics.pending
                  << std::setw(10) << r.metrics.collision_rounds << "  "
                  << (r.error ? "ERROR" : (r.ok() ? "pass" : "FAIL")) << '\n';
        if (r.error) std::cout << "    " << *r.error << '\n';
        for (const auto& c : r.checks) {
            if (!c.pass) std::cout << "    check failed: " << c.check << ": " << c.detail << '\n';
        }
    }
}

int cmd_run(const fs::path& file, const fs::path& out, bool paranoid) {
    const auto entries = load_suite(file);
    fs::create_directories(out);
    SuiteOptions opts;
    opts.out_dir = out;
    opts.paranoid = paranoid;
    const auto results = run_suite_parallel(entries, workers_from_env(), opts);
    std::ofstream summary(out / "summary.csv");
    write_summary_csv(summary, results);
    print_results(results);
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.ok(); }) ? 0 : 1;
}

int cmd_attack(const AlgorithmSpec& alg, NodeId n, std::uint32_t w, std::uint32_t segments, const fs::path& out,
               bool paranoid) {
    AttackConfig cfg;
    cfg.max_segments = segments;
    const AttackPlan plan = attacker_heavy_maverick(alg, n, w, cfg);
    const AttackReport rep = execute_attack(alg, plan);
    fs::create_directories(out);
    Scenario s = rep.trace.scenario;
    s.paranoid = paranoid;
    if (paranoid) run(s);  // re-run with replicated-state checks
    {
        std::ofstream csv(out / (s.name + ".trace.csv"));
        write_trace_csv(csv, rep.trace);
        std::ofstream ledger(out / (s.name + ".ledger.json"));
        write_ledger_json(ledger, rep.trace);
        std::ofstream injections(out / (s.name + ".injections.csv"));
        write_injection_csv(injections, plan.trace);
    }
    nlohmann::ordered_json j;
    j["algorithm"] = to_string(alg.kind);
    j["n"] = n;
    j["w"] = w;
    j["segment_length"] = plan.segment_length;
    j["case"] = to_string(plan.which);
    j["segment"] = plan.segment;
    j["maverick"] = plan.maverick;
    j["injection_round"] = plan.injection_round;
    j["delay"] = rep.delay;
    j["pending"] = rep.pending;
    j["reference"] = rep.reference;
    j["heavy_queue_at_segment_end"] = plan.heavy_queue_at_segment_end;
    std::ofstream(out / (s.name + ".attack.json")) << j.dump(1) << '\n';

    std::cout << "segment length " << plan.segment_length << ", case " << to_string(plan.which) << '\n';
    if (plan.which == AttackCase::Unstable) {
        const auto& q = plan.heavy_queue_at_segment_end;
        std::cout << "unstable branch: every one of " << q.size()
                  << " segments scheduled some maverick more than once\n"
                  << "heavy-node queue grew from " << q.front() << " to " << q.back() << " over the inspected segments\n"
                  << "largest heavy-node packet delay " << rep.delay << " rounds\n";
    } else {
        std::cout << "targeted packet: maverick " << plan.maverick << ", injected in round " << plan.injection_round
                  << (rep.pending ? ", still pending" : ", heard in round " + std::to_string(*rep.heard_at)) << '\n'
                  << "delay " << rep.delay << " rounds" << (rep.pending ? " (lower bound)" : "") << '\n';
    }
    std::cout << "reference (n-1)w/4 = " << rep.reference << '\n';
    return static_cast<double>(rep.delay) >= rep.reference ? 0 : 1;
}

int cmd_sweep(const AlgorithmSpec& alg, const fs::path& grid_file, const std::string& strategy, const fs::path& out,
              bool paranoid) {
    const auto kind = strategy_from_string(strategy);
    if (!kind) throw SimError("unknown strategy '" + strategy + "'");
    const SweepGrid grid = load_grid(grid_file);
    const auto entries = sweep_entries(alg, grid, *kind);
    SuiteOptions opts;
    opts.paranoid = paranoid;
    const auto results = run_suite_parallel(entries, workers_from_env(), opts);
    fs::create_directories(out);
    std::ofstream csv(out / ("sweep_" + std::string(to_string(alg.kind)) + "_" + strategy + ".csv"));
    write_sweep_csv(csv, entries, results);
    print_results(results);
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.ok(); }) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Round-synchronous broadcast simulator for adversarial multiple-access channels"};
    app.require_subcommand(1);
    bool paranoid = false;
    app.add_flag("--paranoid", paranoid, "Keep per-node replicas of shared state and compare them every round");

    std::string run_file, out_dir = "out";
    auto* run_cmd = app.add_subcommand("run", "Run a scenario file");
    run_cmd->add_option("file", run_file, "Scenario or suite JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "Output directory");

    std::string alg_name;
    std::vector<std::string> sequences;
    NodeId n = 0;
    std::uint32_t w = 0, segments = 50;
    auto* attack_cmd = app.add_subcommand("attack", "Heavy-node/maverick attack on a conflict-free algorithm");
    attack_cmd->add_option("--alg", alg_name, "Algorithm name")->required();
    attack_cmd->add_option("--seq", sequences, "Transmission sequences (AckOblivious)");
    attack_cmd->add_option("--n", n, "Number of nodes")->required();
    attack_cmd->add_option("--w", w, "Window length")->required();
    attack_cmd->add_option("--segments", segments, "Segments inspected before reporting the unstable branch");
    attack_cmd->add_option("--out", out_dir, "Output directory");

    std::string grid_file, strategy = "burst";
    auto* sweep_cmd = app.add_subcommand("sweep", "Run an algorithm over a grid of (n, w)");
    sweep_cmd->add_option("--alg", alg_name, "Algorithm name")->required();
    sweep_cmd->add_option("--seq", sequences, "Transmission sequences (AckOblivious)");
    sweep_cmd->add_option("--grid", grid_file, "Grid JSON")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--strategy", strategy, "burst, uniform or random");
    sweep_cmd->add_option("--out", out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd) return cmd_run(run_file, out_dir, paranoid);
        if (*attack_cmd) return cmd_attack(parse_alg(alg_name, sequences), n, w, segments, out_dir, paranoid);
        if (*sweep_cmd) return cmd_sweep(parse_alg(alg_name, sequences), grid_file, strategy, out_dir, paranoid);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
