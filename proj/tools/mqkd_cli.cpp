// Copyright 2026 The mqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mqkd/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInconsistent = 1;
constexpr int kExitAborted = 2;
constexpr int kExitConfig = 3;

std::optional<mqkd::UnitaryOp> parse_forced(const std::string &s) {
    if (s == "*" || s == "-" || s == "random") {
        return std::nullopt;
    }
    return mqkd::op_from_string(s);
}

mqkd::ForcedOps parse_force_ops(const std::string &text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw mqkd::ConfigError("--force-ops expects ALICE,BOB (each I, Z, H or *)");
    }
    mqkd::ForcedOps forced;
    forced.alice = parse_forced(text.substr(0, comma));
    forced.bob = parse_forced(text.substr(comma + 1));
    return forced;
}

struct RunArgs {
    std::uint64_t rounds = 90000;
    std::uint64_t seed = 1;
    std::string adversary = "null";
    double threshold = 0.0;
    std::uint64_t tolerance = 0;
    std::optional<std::size_t> pa_out_len;
    std::string force_ops;
    unsigned threads = 1;
    std::string transcript, key, csv, report_json;
    bool timing = false;
};

int do_run(const RunArgs &a) {
    mqkd::SessionConfig config;
    config.n_rounds = a.rounds;
    config.seed = a.seed;
    config.adversary = mqkd::parse_strategy(a.adversary);
    config.case1_threshold = a.threshold;
    config.disclosure_tolerance = a.tolerance;
    config.pa_out_len = a.pa_out_len;
    if (!a.force_ops.empty()) {
        config.forced = parse_force_ops(a.force_ops);
    }
    config.threads = a.threads;
    if (!a.transcript.empty()) config.transcript_path = a.transcript;
    if (!a.key.empty()) config.key_path = a.key;
    if (!a.csv.empty()) config.csv_path = a.csv;
    if (!a.report_json.empty()) config.report_path = a.report_json;

    const mqkd::SessionReport report = mqkd::run_experiment(config);
    std::cout << mqkd::format_report(report);
    if (a.timing) {
        std::cerr << "wall time " << std::fixed << std::setprecision(3) << report.wall_seconds << " s\n";
    }
    switch (report.status) {
        case mqkd::SessionStatus::Ok:
            return kExitOk;
        case mqkd::SessionStatus::Aborted:
            return kExitAborted;
        case mqkd::SessionStatus::TooShort:
            std::cerr << "session too short: fewer than 2 key rounds\n";
            return kExitConfig;
    }
    return kExitOk;
}

int do_sweep(const std::string &grid_path, std::uint64_t rounds, std::uint64_t seed, unsigned threads,
             const std::string &out_path) {
    std::ifstream in(grid_path);
    if (!in) {
        throw mqkd::ConfigError("cannot open grid file '" + grid_path + "'");
    }
    const auto grid = mqkd::parse_sweep_grid(in);
    const auto rows = mqkd::sweep_attacks(grid, rounds, seed, threads);
    const std::string csv = mqkd::sweep_csv(rows);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!(out << csv)) {
            throw std::runtime_error("cannot write '" + out_path + "'");
        }
        std::size_t failed = 0;
        for (const auto &r : rows) {
            failed += r.error ? 1 : 0;
        }
        std::cout << rows.size() << " grid points, " << failed << " invalid\n";
    }
    return kExitOk;
}

int do_audit(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw mqkd::ConfigError("cannot open transcript '" + path + "'");
    }
    const mqkd::AuditResult audit = mqkd::audit_transcript(in);
    std::cout << mqkd::format_report(audit.rederived);
    if (audit.consistent) {
        std::cout << "audit: consistent\n";
        return kExitOk;
    }
    for (const auto &p : audit.problems) {
        std::cout << "audit: " << p << "\n";
    }
    return kExitInconsistent;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Simulator for mediated three-party quantum key distribution"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    RunArgs run;
    auto *run_cmd = app.add_subcommand("run", "Run one session and distill a key");
    run_cmd->add_option("-n,--rounds", run.rounds, "Number of rounds")->check(CLI::PositiveNumber);
    run_cmd->add_option("-s,--seed", run.seed, "64-bit seed");
    run_cmd->add_option("-a,--adversary", run.adversary,
                        "null | intercept:<X|Z>:<segment> | collective:pass-through | collective:<param file>");
    run_cmd->add_option("--threshold", run.threshold, "Case-1 error threshold in [0,1]");
    run_cmd->add_option("--tolerance", run.tolerance, "Allowed mismatches among disclosed key bits");
    run_cmd->add_option("--pa-out-len", run.pa_out_len, "Final key length after privacy amplification (default floor((1 - 2e) n), e the larger error rate)");
    run_cmd->add_option("--force-ops", run.force_ops, "Fix operations as ALICE,BOB, e.g. H,H or I,*");
    run_cmd->add_option("-j,--threads", run.threads, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--transcript", run.transcript, "Write the JSON-lines transcript here");
    run_cmd->add_option("--key", run.key, "Write the final key here");
    run_cmd->add_option("--csv", run.csv, "Write the report as CSV here");
    run_cmd->add_option("--report-json", run.report_json, "Write the report as JSON here");
    run_cmd->add_flag("--timing", run.timing, "Print wall time to stderr");

    std::uint64_t report_rounds = 90000;
    std::uint64_t report_seed = 1;
    auto *report_cmd = app.add_subcommand("report", "Compare qubit efficiency with other protocols");
    report_cmd->add_option("-n,--rounds", report_rounds, "Rounds for the measured row")->check(CLI::PositiveNumber);
    report_cmd->add_option("-s,--seed", report_seed, "64-bit seed");

    std::string grid_path;
    std::uint64_t sweep_rounds = 10000;
    std::uint64_t sweep_seed = 1;
    unsigned sweep_threads = 1;
    std::string sweep_out;
    auto *sweep_cmd = app.add_subcommand("sweep", "Evaluate a grid of attacks");
    sweep_cmd->add_option("grid", grid_path, "Grid file")->required();
    sweep_cmd->add_option("-n,--rounds", sweep_rounds, "Rounds per grid point")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("-s,--seed", sweep_seed, "64-bit seed");
    sweep_cmd->add_option("-j,--threads", sweep_threads, "Worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("-o,--out", sweep_out, "Write CSV here instead of stdout");

    std::string audit_path;
    auto *audit_cmd = app.add_subcommand("audit", "Re-derive a report from a saved transcript");
    audit_cmd->add_option("transcript", audit_path, "Transcript file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run_cmd) {
            return do_run(run);
        }
        if (*report_cmd) {
            const auto report = mqkd::comparison_report(report_rounds, report_seed);
            std::cout << mqkd::format_comparison(report);
            return kExitOk;
        }
        if (*sweep_cmd) {
            return do_sweep(grid_path, sweep_rounds, sweep_seed, sweep_threads, sweep_out);
        }
        if (*audit_cmd) {
            return do_audit(audit_path);
        }
    } catch (const mqkd::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const mqkd::InvalidAttackError &e) {
        std::cerr << "invalid attack: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInconsistent;
    }
    return kExitOk;
}
