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

#ifndef MQKD_HARNESS_HPP
#define MQKD_HARNESS_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "mqkd/adversary_lab.hpp"
#include "mqkd/attack_config.hpp"
#include "mqkd/key_distillation.hpp"
#include "mqkd/protocol_engine.hpp"
#include "mqkd/transcript_io.hpp"

namespace mqkd {

inline constexpr double kTheoreticalEfficiency = 2.0 / 9.0;
inline constexpr double kEfficiencyTolerance = 0.01;

struct SessionConfig {
    std::uint64_t n_rounds = 90000;
    std::uint64_t seed = 1;
    AttackStrategy adversary = NoAttack{};
    double case1_threshold = 0.0;
    std::uint64_t disclosure_tolerance = 0;
    std::optional<std::size_t> pa_out_len;
    ForcedOps forced;
    unsigned threads = 1;

    std::optional<std::string> transcript_path;
    std::optional<std::string> key_path;
    std::optional<std::string> csv_path;
    std::optional<std::string> report_path;

    /// Throws ConfigError.
    void validate() const;
};

enum class SessionStatus : std::uint8_t { Ok, Aborted, TooShort };

std::string_view to_string(SessionStatus status);

struct SessionReport {
    std::string adversary;
    SessionStatus status = SessionStatus::Ok;
    std::uint64_t n_rounds = 0;
    std::uint64_t check_count = 0;
    std::uint64_t key_count = 0;
    std::uint64_t discard_count = 0;
    double check_freq = 0;
    double key_freq = 0;
    double discard_freq = 0;
    ErrorReport errors;
    EfficiencyStat efficiency;
    std::size_t key_bits = 0;
    std::string key_digest;
    bool keys_agree = true;
    /// Measured, but never serialized, so persisted reports stay reproducible.
    double wall_seconds = 0;
};

struct ExperimentResult {
    SessionReport report;
    Transcript transcript;
    std::optional<DistillResult> distilled;
};

/// Runs, distills and persists one session as configured. Files are written
/// only for the paths that are set.
ExperimentResult run_experiment_detailed(const SessionConfig &config);
SessionReport run_experiment(const SessionConfig &config);

Json report_to_json(const SessionReport &report);
std::string report_csv(const SessionReport &report);
std::string format_report(const SessionReport &report);

/// SHA-256 over "bits:<n>:<hex>".
std::string key_digest(std::span<const std::uint8_t> key);

/// "bits <n>\n<hex>\n"
std::string key_file_contents(std::span<const std::uint8_t> key);

struct ComparisonRow {
    std::string protocol;
    std::string tp_capabilities;
    std::string participant_capabilities;
    std::string qubit_resource;
    std::string efficiency_label;
    double efficiency = 0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double measured = 0;
    bool within_tolerance = false;
};

/// Table of three-party protocols, with this protocol's efficiency measured
/// from a fresh honest session.
ComparisonReport comparison_report(std::uint64_t n_rounds = 90000, std::uint64_t seed = 1);
std::string format_comparison(const ComparisonReport &report);

struct SweepRow {
    std::size_t index = 0;
    std::string name;
    std::optional<std::string> error;
    AttackReport report;
};

/// One report per grid point, in grid order. Points that fail carry an error
/// and do not stop the sweep.
std::vector<SweepRow> sweep_attacks(const std::vector<GridPoint> &grid, std::uint64_t n_rounds, std::uint64_t seed,
                                    unsigned threads = 1);
std::string sweep_csv(const std::vector<SweepRow> &rows);

struct AuditResult {
    bool consistent = true;
    std::vector<std::string> problems;
    SessionReport rederived;
};

/// Re-derives the session report from a persisted transcript alone and
/// compares it with the summary stored in the file.
AuditResult audit_transcript(std::istream &in);

}  // namespace mqkd

#endif
