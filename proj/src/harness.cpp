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

#include "mqkd/harness.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace mqkd {

namespace {

void write_file(const std::string &path, const std::string &contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << contents;
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

Json op_or_null(const std::optional<UnitaryOp> &op) {
    return op ? Json(std::string(to_string(*op))) : Json(nullptr);
}

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

std::string csv_quote(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    return out + "\"";
}

std::string real_field(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

void fill_case_counts(SessionReport &report, const Transcript &transcript) {
    report.n_rounds = transcript.size();
    for (const auto &r : transcript.records()) {
        switch (r.case_label) {
            case CaseLabel::Check:
                ++report.check_count;
                break;
            case CaseLabel::Key:
                ++report.key_count;
                break;
            case CaseLabel::Discard:
                ++report.discard_count;
                break;
        }
    }
    const double n = static_cast<double>(report.n_rounds);
    report.check_freq = static_cast<double>(report.check_count) / n;
    report.key_freq = static_cast<double>(report.key_count) / n;
    report.discard_freq = static_cast<double>(report.discard_count) / n;
}

}  // namespace

void SessionConfig::validate() const {
    if (n_rounds < 1) {
        throw ConfigError("n_rounds must be at least 1");
    }
    if (!(case1_threshold >= 0.0 && case1_threshold <= 1.0)) {
        throw ConfigError("case-1 threshold must lie in [0, 1]");
    }
    if (threads < 1) {
        throw ConfigError("threads must be at least 1");
    }
}

std::string_view to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::Ok:
            return "ok";
        case SessionStatus::Aborted:
            return "aborted";
        case SessionStatus::TooShort:
            return "too_short";
    }
    return "?";
}

std::string key_digest(std::span<const std::uint8_t> key) {
    const std::string message = "bits:" + std::to_string(key.size()) + ":" + bits_to_hex(key);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(message.data(), message.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return out.str();
}

std::string key_file_contents(std::span<const std::uint8_t> key) {
    return "bits " + std::to_string(key.size()) + "\n" + bits_to_hex(key) + "\n";
}

ExperimentResult run_experiment_detailed(const SessionConfig &config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    const auto hook = make_hook(config.adversary);
    SessionOptions options;
    options.forced = config.forced;
    options.threads = config.threads;
    Transcript transcript = run_session(config.n_rounds, config.seed, *hook, options);

    ExperimentResult result;
    SessionReport &report = result.report;
    report.adversary = transcript.meta().adversary;
    fill_case_counts(report, transcript);

    DistillConfig dc;
    dc.case1_threshold = config.case1_threshold;
    dc.disclosure_tolerance = config.disclosure_tolerance;
    dc.pa_out_len = config.pa_out_len;

    Json header;
    header["case1_threshold"] = config.case1_threshold;
    header["disclosure_tolerance"] = config.disclosure_tolerance;
    header["forced_alice_op"] = op_or_null(config.forced.alice);
    header["forced_bob_op"] = op_or_null(config.forced.bob);

    try {
        DistillResult d = distill(transcript, config.seed, dc);
        report.errors = d.errors;
        report.efficiency = d.efficiency;
        report.status = d.errors.aborted ? SessionStatus::Aborted : SessionStatus::Ok;
        report.key_bits = d.alice_key.size();
        report.key_digest = key_digest(d.alice_key);
        report.keys_agree = d.alice_key == d.bob_key;

        std::vector<std::uint64_t> disclosed_ids;
        for (std::size_t idx : d.key.check_indices) {
            disclosed_ids.push_back(d.key.key_round_ids[idx]);
        }
        transcript = with_disclosures(transcript, disclosed_ids);
        header["pa_out_len"] = d.out_len;
        header["pa_seed_bits"] = d.hash_seed.size();
        header["pa_seed"] = bits_to_hex(d.hash_seed);
        result.distilled = std::move(d);
    } catch (const SessionTooShortError &) {
        report.errors = check_case1(transcript, config.case1_threshold);
        report.efficiency = EfficiencyStat{0, transcript.size(), 0.0};
        report.status = report.errors.aborted ? SessionStatus::Aborted : SessionStatus::TooShort;
        report.key_digest = key_digest({});
        header["pa_out_len"] = 0;
        header["pa_seed_bits"] = 0;
        header["pa_seed"] = "";
    }
    result.transcript = std::move(transcript);

    if (config.transcript_path) {
        std::ostringstream out;
        write_transcript(out, result.transcript, header, {error_report_to_json(report.errors), report_to_json(report)});
        write_file(*config.transcript_path, out.str());
    }
    if (config.key_path) {
        write_file(*config.key_path,
                   key_file_contents(result.distilled ? std::span<const std::uint8_t>(result.distilled->alice_key)
                                                      : std::span<const std::uint8_t>()));
    }
    if (config.csv_path) {
        write_file(*config.csv_path, report_csv(report));
    }
    if (config.report_path) {
        write_file(*config.report_path, report_to_json(report).dump(2) + "\n");
    }

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

SessionReport run_experiment(const SessionConfig &config) { return run_experiment_detailed(config).report; }

Json report_to_json(const SessionReport &r) {
    Json j;
    j["type"] = "summary";
    j["adversary"] = r.adversary;
    j["status"] = to_string(r.status);
    j["n_rounds"] = r.n_rounds;
    j["check_count"] = r.check_count;
    j["key_count"] = r.key_count;
    j["discard_count"] = r.discard_count;
    j["check_freq"] = r.check_freq;
    j["key_freq"] = r.key_freq;
    j["discard_freq"] = r.discard_freq;
    j["case1_error_rate"] = r.errors.case1_error_rate;
    j["disclosed_count"] = r.errors.disclosed_count;
    j["disclosed_mismatches"] = r.errors.disclosed_mismatches;
    j["disclosed_mismatch_rate"] = r.errors.disclosed_mismatch_rate();
    j["aborted"] = r.errors.aborted;
    j["abort_reason"] =
        r.errors.abort_reason ? Json(std::string(to_string(*r.errors.abort_reason))) : Json(nullptr);
    j["efficiency_n"] = r.efficiency.n;
    j["efficiency_m"] = r.efficiency.m;
    j["efficiency_q"] = r.efficiency.q;
    j["key_bits"] = r.key_bits;
    j["key_digest"] = r.key_digest;
    j["keys_agree"] = r.keys_agree;
    return j;
}

std::string report_csv(const SessionReport &r) {
    const Json j = report_to_json(r);
    std::string header;
    std::string row;
    bool first = true;
    for (const auto &[k, v] : j.items()) {
        if (k == "type") {
            continue;
        }
        header += (first ? "" : ",") + k;
        std::string cell;
        if (v.is_string()) {
            cell = csv_quote(v.get<std::string>());
        } else if (v.is_null()) {
            cell = "";
        } else {
            cell = v.dump();
        }
        row += (first ? "" : ",") + cell;
        first = false;
    }
    return header + "\n" + row + "\n";
}

std::string format_report(const SessionReport &r) {
    std::ostringstream out;
    auto line = [&](const std::string &label, const std::string &value) {
        out << std::left << std::setw(22) << label << value << "\n";
    };
    line("adversary", r.adversary);
    line("rounds", std::to_string(r.n_rounds));
    line("check rounds", std::to_string(r.check_count) + " (" + fixed(r.check_freq, 4) + ")");
    line("key rounds", std::to_string(r.key_count) + " (" + fixed(r.key_freq, 4) + ")");
    line("discard rounds", std::to_string(r.discard_count) + " (" + fixed(r.discard_freq, 4) + ")");
    line("case-1 error rate", fixed(r.errors.case1_error_rate, 6) + " (" + std::to_string(r.errors.check_errors) +
                                  "/" + std::to_string(r.errors.check_rounds) + ")");
    line("disclosed mismatches", std::to_string(r.errors.disclosed_mismatches) + "/" +
                                     std::to_string(r.errors.disclosed_count) + " (" +
                                     fixed(r.errors.disclosed_mismatch_rate(), 6) + ")");
    std::string status(to_string(r.status));
    if (r.errors.abort_reason) {
        status += " (" + std::string(to_string(*r.errors.abort_reason)) + ")";
    }
    line("status", status);
    line("qubit efficiency", fixed(r.efficiency.q, 4) + " (n=" + std::to_string(r.efficiency.n) +
                                 ", m=" + std::to_string(r.efficiency.m) + "; theory 2/9)");
    line("final key", std::to_string(r.key_bits) + " bits, sha256 " + r.key_digest.substr(0, 16) +
                          (r.keys_agree ? "" : " (Alice/Bob keys differ)"));
    return out.str();
}

ComparisonReport comparison_report(std::uint64_t n_rounds, std::uint64_t seed) {
    SessionConfig config;
    config.n_rounds = n_rounds;
    config.seed = seed;
    const SessionReport session = run_experiment(config);

    ComparisonReport report;
    report.measured = session.efficiency.q;
    report.within_tolerance = std::abs(report.measured - kTheoreticalEfficiency) <= kEfficiencyTolerance;
    report.rows.push_back({"Hwang et al.", "Bell measurement; prepare Bell states", "unitary operation; reflect",
                           "Bell states", "1/9", 1.0 / 9.0});
    report.rows.push_back({"Yang et al.", "X-basis measurement; prepare X-basis single photons",
                           "prepare, measure, reflect / unitary operation, reflect", "single photons", "1/12",
                           1.0 / 12.0});
    report.rows.push_back({"proposed", "X-basis measurement; prepare X-basis single photons",
                           "unitary operation; reflect", "single photons",
                           fixed(kTheoreticalEfficiency, 3) + " (theory 2/9), measured " + fixed(report.measured, 4) +
                               " over " + std::to_string(n_rounds) + " rounds",
                           report.measured});
    return report;
}

std::string format_comparison(const ComparisonReport &report) {
    std::ostringstream out;
    out << "Qubit efficiency of three-party QKD protocols\n\n";
    for (const auto &row : report.rows) {
        out << row.protocol << ": " << row.efficiency_label << "\n";
    }
    out << "\n";
    for (const auto &row : report.rows) {
        out << std::left << std::setw(14) << row.protocol << "TP: " << row.tp_capabilities << "\n"
            << std::setw(14) << "" << "participants: " << row.participant_capabilities << "\n"
            << std::setw(14) << "" << "resource: " << row.qubit_resource << "\n";
    }
    out << "\n";
    if (report.within_tolerance) {
        out << "measured efficiency within " << kEfficiencyTolerance << " of 2/9\n";
    } else {
        out << "WARNING: measured efficiency " << fixed(report.measured, 4) << " deviates from 2/9 by more than "
            << kEfficiencyTolerance << "\n";
    }
    return out.str();
}

std::vector<SweepRow> sweep_attacks(const std::vector<GridPoint> &grid, std::uint64_t n_rounds, std::uint64_t seed,
                                    unsigned threads) {
    if (grid.empty()) {
        throw ConfigError("sweep grid is empty");
    }
    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) {
                return;
            }
            SweepRow &row = rows[i];
            row.index = i;
            row.name = grid[i].name;
            if (const auto *err = std::get_if<std::string>(&grid[i].strategy)) {
                row.error = *err;
                continue;
            }
            try {
                row.report = attack_report(std::get<AttackStrategy>(grid[i].strategy), n_rounds, seed);
            } catch (const std::exception &e) {
                row.error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) {
            pool.emplace_back(worker);
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow> &rows) {
    std::ostringstream out;
    out << "index,name,strategy,status,residual,exact_detection,exact_mismatch,leakage_bits,"
           "empirical_detection,empirical_mismatch,check_rounds,disclosed_count\n";
    for (const auto &row : rows) {
        out << row.index << "," << csv_quote(row.name) << ",";
        if (row.error) {
            out << "," << csv_quote("invalid: " + *row.error) << ",,,,,,,,\n";
            continue;
        }
        const auto &r = row.report;
        out << csv_quote(r.strategy) << ",ok," << (r.residual ? real_field(*r.residual) : "") << ","
            << real_field(r.exact.detection_prob_case1) << "," << real_field(r.exact.disclosed_mismatch_prob) << ","
            << real_field(r.exact.leakage_bits) << "," << real_field(r.empirical.detection_prob_case1) << ","
            << real_field(r.empirical.disclosed_mismatch_prob) << "," << r.check_rounds << "," << r.disclosed_count
            << "\n";
    }
    return out.str();
}

AuditResult audit_transcript(std::istream &in) {
    AuditResult audit;
    const ParsedTranscript parsed = read_transcript(in);
    const Transcript &t = parsed.transcript;
    const Json &h = parsed.header;
    auto problem = [&](std::string msg) {
        audit.consistent = false;
        audit.problems.push_back(std::move(msg));
    };

    SessionReport &r = audit.rederived;
    r.adversary = t.meta().adversary;
    if (t.size() != t.meta().n_rounds) {
        problem("header announces " + std::to_string(t.meta().n_rounds) + " rounds, file holds " +
                std::to_string(t.size()));
    }
    if (t.size() == 0) {
        problem("transcript holds no rounds");
        return audit;
    }
    fill_case_counts(r, t);

    const double threshold = h.value("case1_threshold", 0.0);
    const std::uint64_t tolerance = h.value("disclosure_tolerance", std::uint64_t{0});

    Bits remaining;
    for (const auto &rec : t.records()) {
        const std::string id = "round " + std::to_string(rec.round_id);
        if (classify_case(rec.alice_op, rec.bob_op) != rec.case_label) {
            problem(id + ": case label does not match the operations");
        }
        if (rec.case_label == CaseLabel::Check) {
            ++r.errors.check_rounds;
            if (rec.tp_outcome != Outcome::Plus) {
                ++r.errors.check_errors;
            }
        }
        if (rec.case_label != CaseLabel::Key) {
            if (rec.alice_bit || rec.bob_bit || rec.disclosed) {
                problem(id + ": non-key round carries key data");
            }
            continue;
        }
        if (!rec.alice_bit || !rec.bob_bit) {
            problem(id + ": key round without bits");
            continue;
        }
        if (*rec.alice_bit != derive_alice_bit(rec.alice_op) ||
            *rec.bob_bit != derive_bob_bit(rec.bob_op, rec.tp_outcome)) {
            problem(id + ": key bits do not follow from the operations and outcome");
        }
        if (rec.disclosed) {
            ++r.errors.disclosed_count;
            if (*rec.alice_bit != *rec.bob_bit) {
                ++r.errors.disclosed_mismatches;
            }
        } else {
            remaining.push_back(*rec.alice_bit);
        }
    }
    r.errors.case1_error_rate = static_cast<double>(r.errors.check_errors) /
                                static_cast<double>(std::max<std::uint64_t>(r.errors.check_rounds, 1));
    if (r.errors.case1_error_rate > threshold) {
        r.errors.aborted = true;
        r.errors.abort_reason = AbortReason::Case1Threshold;
    } else if (r.errors.disclosed_mismatches > tolerance) {
        r.errors.aborted = true;
        r.errors.abort_reason = AbortReason::DisclosureMismatch;
    }

    Bits key;
    if (r.key_count < 2) {
        r.status = r.errors.aborted ? SessionStatus::Aborted : SessionStatus::TooShort;
        r.efficiency = EfficiencyStat{0, r.n_rounds, 0.0};
    } else if (r.errors.aborted) {
        r.status = SessionStatus::Aborted;
        r.efficiency = EfficiencyStat{0, r.n_rounds, 0.0};
    } else {
        r.status = SessionStatus::Ok;
        if (r.errors.disclosed_count != r.key_count / 2) {
            problem("disclosed " + std::to_string(r.errors.disclosed_count) + " of " + std::to_string(r.key_count) +
                    " key bits, expected half");
        }
        r.efficiency.n = remaining.size();
        r.efficiency.m = r.n_rounds;
        r.efficiency.q = static_cast<double>(r.efficiency.n) / static_cast<double>(r.efficiency.m);
        const std::size_t out_len = h.value("pa_out_len", std::size_t{0});
        const std::size_t seed_bits = h.value("pa_seed_bits", std::size_t{0});
        try {
            const Bits seed = bits_from_hex(h.value("pa_seed", std::string()), seed_bits);
            key = privacy_amplify(remaining, seed, out_len);
        } catch (const std::exception &e) {
            problem(std::string("cannot recompute the amplified key: ") + e.what());
        }
    }
    r.key_bits = key.size();
    r.key_digest = key_digest(key);

    const Json derived = report_to_json(r);
    const Json *stored = nullptr;
    for (const auto &line : parsed.trailer) {
        if (line.value("type", "") == "summary") {
            stored = &line;
        }
    }
    if (!stored) {
        problem("transcript has no summary line");
        return audit;
    }
    for (const auto &[k, v] : derived.items()) {
        if (k == "keys_agree") {
            // Bob's copy is not part of the published record.
            r.keys_agree = stored->value("keys_agree", true);
            continue;
        }
        if (!stored->contains(k)) {
            problem("summary lacks '" + k + "'");
        } else if (stored->at(k) != v) {
            problem("summary '" + k + "' is " + stored->at(k).dump() + ", transcript gives " + v.dump());
        }
    }
    return audit;
}

}  // namespace mqkd
