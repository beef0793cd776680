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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mqkd {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

class TempDir {
   public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("mqkd_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string &name) const { return path_ / name; }

   private:
    fs::path path_;
};

SessionConfig persisted(const TempDir &dir, const std::string &tag) {
    SessionConfig c;
    c.transcript_path = (dir / (tag + ".jsonl")).string();
    c.key_path = (dir / (tag + ".key")).string();
    c.csv_path = (dir / (tag + ".csv")).string();
    c.report_path = (dir / (tag + ".json")).string();
    return c;
}

std::vector<GridPoint> grid_from(const std::string &text) {
    std::istringstream in(text);
    return parse_sweep_grid(in);
}

TEST(SessionConfig, Validation) {
    SessionConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n_rounds = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SessionConfig{};
    c.case1_threshold = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c.case1_threshold = -0.1;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(RunExperiment, HonestDefaultSession) {
    const auto r = run_experiment(SessionConfig{});
    EXPECT_EQ(r.status, SessionStatus::Ok);
    EXPECT_FALSE(r.errors.aborted);
    EXPECT_NEAR(r.efficiency.q, kTheoreticalEfficiency, kEfficiencyTolerance);
    EXPECT_NEAR(r.check_freq + r.key_freq + r.discard_freq, 1.0, 1e-12);
    EXPECT_EQ(r.check_count + r.key_count + r.discard_count, r.n_rounds);
    EXPECT_TRUE(r.keys_agree);
    EXPECT_GT(r.key_bits, 0u);
    EXPECT_EQ(r.key_digest.size(), 64u);
}

TEST(RunExperiment, InterceptResendAborts) {
    SessionConfig c;
    c.adversary = InterceptResend{Basis::X, Segment::AliceToBob};
    const auto r = run_experiment(c);
    EXPECT_EQ(r.status, SessionStatus::Aborted);
    EXPECT_TRUE(r.errors.aborted);
    EXPECT_EQ(r.errors.abort_reason, AbortReason::Case1Threshold);
    EXPECT_EQ(r.key_bits, 0u);
    EXPECT_EQ(r.efficiency.q, 0.0);
    EXPECT_EQ(r.adversary, "intercept:X:AliceToBob");
}

TEST(RunExperiment, SingleRound) {
    SessionConfig c;
    c.n_rounds = 1;
    const auto r = run_experiment(c);
    EXPECT_EQ((r.check_count > 0) + (r.key_count > 0) + (r.discard_count > 0), 1);
    EXPECT_EQ(r.check_count + r.key_count + r.discard_count, 1u);
    EXPECT_EQ(r.status, SessionStatus::TooShort);
}

TEST(RunExperiment, PersistsAndReadsBack) {
    TempDir dir;
    auto c = persisted(dir, "run");
    c.n_rounds = 3000;
    c.seed = 9;
    const auto res = run_experiment_detailed(c);
    std::ifstream in(*c.transcript_path);
    const auto parsed = read_transcript(in);
    EXPECT_EQ(parsed.transcript, res.transcript);
    EXPECT_EQ(parsed.header.at("type"), "session");
    EXPECT_EQ(parsed.header.at("seed"), 9);
    ASSERT_EQ(parsed.trailer.size(), 2u);
    EXPECT_EQ(parsed.trailer[0].at("type"), "error_report");
    EXPECT_EQ(parsed.trailer[1], report_to_json(res.report));

    std::size_t disclosed = 0;
    for (const auto &r : parsed.transcript.records()) disclosed += r.disclosed;
    EXPECT_EQ(disclosed, res.report.errors.disclosed_count);

    EXPECT_EQ(slurp(*c.key_path), key_file_contents(res.distilled->alice_key));
    EXPECT_EQ(slurp(*c.report_path), report_to_json(res.report).dump(2) + "\n");
    EXPECT_EQ(slurp(*c.csv_path), report_csv(res.report));
    EXPECT_EQ(slurp(*c.report_path).find("wall"), std::string::npos);
}

TEST(RunExperiment, ByteIdenticalOutputs) {
    TempDir dir;
    auto a = persisted(dir, "a");
    auto b = persisted(dir, "b");
    a.n_rounds = b.n_rounds = 5000;
    b.threads = 3;
    run_experiment(a);
    run_experiment(b);
    for (const char *ext : {".jsonl", ".key", ".csv", ".json"}) {
        EXPECT_EQ(slurp(dir / (std::string("a") + ext)), slurp(dir / (std::string("b") + ext))) << ext;
    }
}

TEST(RunExperiment, UnwritablePathFails) {
    SessionConfig c;
    c.n_rounds = 100;
    c.key_path = "/nonexistent-dir/key.txt";
    EXPECT_THROW(run_experiment(c), std::runtime_error);
}

TEST(TranscriptJson, RoundTripProperty) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const AttackStrategy strategies[] = {NoAttack{}, InterceptResend{Basis::Z, Segment::BobToTP}};
        const auto hook = make_hook(strategies[seed % 2]);
        auto t = run_session(50 + seed * 7, seed, *hook);
        std::vector<std::uint64_t> ids;
        for (const auto &r : t.records())
            if (r.round_id % 3 == 0 && r.case_label == CaseLabel::Key) ids.push_back(r.round_id);
        t = with_disclosures(t, ids);
        std::stringstream buf;
        write_transcript(buf, t);
        const auto back = read_transcript(buf);
        EXPECT_EQ(back.transcript, t);
    }
}

TEST(TranscriptJson, RejectsMalformedLines) {
    std::istringstream bad_json("{\"type\":\"session\",\"seed\":1,\"n_rounds\":1,\"adversary\":\"null\"}\n{oops\n");
    EXPECT_ANY_THROW(read_transcript(bad_json));
    std::istringstream bad_op(
        "{\"type\":\"session\",\"seed\":1,\"n_rounds\":1,\"adversary\":\"null\"}\n"
        "{\"type\":\"round\",\"round_id\":0,\"alice_op\":\"Q\",\"bob_op\":\"I\",\"tp_outcome\":\"+\",\"case\":\"key\","
        "\"alice_bit\":0,\"bob_bit\":0,\"disclosed\":false}\n");
    EXPECT_ANY_THROW(read_transcript(bad_op));
}

TEST(KeyDigest, KnownValues) {
    EXPECT_EQ(key_digest({}), "1774338dd08c0cf9b4cd11711412aaaa493c64d65647c073149185abb16ec4e7");
    const Bits b{1, 0, 1, 0, 1};
    EXPECT_EQ(key_digest(b), "aded1923cdbb9ed2bbf1e39368697467746610e3713ed5bfd621cb0b2b64379e");
    EXPECT_EQ(key_file_contents(b), "bits 5\na8\n");
}

TEST(Audit, HonestTranscriptIsConsistent) {
    TempDir dir;
    auto c = persisted(dir, "audit");
    c.n_rounds = 4000;
    const auto res = run_experiment_detailed(c);
    std::ifstream in(*c.transcript_path);
    const auto audit = audit_transcript(in);
    for (const auto &p : audit.problems) ADD_FAILURE() << p;
    EXPECT_TRUE(audit.consistent);
    EXPECT_EQ(report_to_json(audit.rederived), report_to_json(res.report));
}

TEST(Audit, AbortedAndTooShortTranscripts) {
    TempDir dir;
    for (int k = 0; k < 2; ++k) {
        auto c = persisted(dir, "s" + std::to_string(k));
        if (k == 0) {
            c.adversary = InterceptResend{Basis::Z, Segment::AliceToBob};
            c.n_rounds = 2000;
        } else {
            c.n_rounds = 2;
            c.forced.alice = UnitaryOp::Hadamard;
        }
        run_experiment(c);
        std::ifstream in(*c.transcript_path);
        const auto audit = audit_transcript(in);
        for (const auto &p : audit.problems) ADD_FAILURE() << p;
        EXPECT_TRUE(audit.consistent);
        EXPECT_EQ(audit.rederived.status, k == 0 ? SessionStatus::Aborted : SessionStatus::TooShort);
    }
}

TEST(Audit, DetectsTampering) {
    TempDir dir;
    auto c = persisted(dir, "tamper");
    c.n_rounds = 2000;
    run_experiment(c);
    const std::string original = slurp(*c.transcript_path);

    // Flip Bob's bit in the first key round.
    std::string edited = original;
    const auto pos = edited.find("\"bob_bit\":0");
    ASSERT_NE(pos, std::string::npos);
    edited.replace(pos, 11, "\"bob_bit\":1");
    std::istringstream in(edited);
    const auto audit = audit_transcript(in);
    EXPECT_FALSE(audit.consistent);
    EXPECT_FALSE(audit.problems.empty());

    // Change the stored digest only.
    std::string digest_edit = original;
    const auto d = digest_edit.find("\"key_digest\":\"");
    ASSERT_NE(d, std::string::npos);
    digest_edit[d + 14] = digest_edit[d + 14] == '0' ? '1' : '0';
    std::istringstream in2(digest_edit);
    EXPECT_FALSE(audit_transcript(in2).consistent);
}

TEST(Report, FormatMentionsKeyFacts) {
    SessionConfig c;
    c.n_rounds = 900;
    const auto r = run_experiment(c);
    const auto text = format_report(r);
    EXPECT_NE(text.find("status"), std::string::npos);
    EXPECT_NE(text.find("qubit efficiency"), std::string::npos);
    const auto csv = report_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find(',')), "adversary");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Comparison, RowsAndMeasurement) {
    const auto rep = comparison_report();
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_EQ(rep.rows[0].efficiency, 1.0 / 9.0);
    EXPECT_EQ(rep.rows[1].efficiency, 1.0 / 12.0);
    EXPECT_TRUE(rep.within_tolerance);
    const auto text = format_comparison(rep);
    EXPECT_NE(text.find("Hwang et al.: 1/9"), std::string::npos);
    EXPECT_NE(text.find("Yang et al.: 1/12"), std::string::npos);
    EXPECT_NE(text.find("proposed: 0.222 (theory 2/9)"), std::string::npos);
    EXPECT_EQ(text.find("WARNING"), std::string::npos);
}

TEST(Comparison, FlagsDeviation) {
    ComparisonReport rep = comparison_report(90, 1);
    rep.measured = 0.3;
    rep.within_tolerance = false;
    EXPECT_NE(format_comparison(rep).find("WARNING"), std::string::npos);
}

TEST(Sweep, PassThroughRowIsZero) {
    const auto rows = sweep_attacks(grid_from("name = pt\n"), 3000, 1);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_FALSE(rows[0].error);
    const auto &r = rows[0].report;
    EXPECT_EQ(r.exact.detection_prob_case1, 0.0);
    EXPECT_EQ(r.exact.disclosed_mismatch_prob, 0.0);
    EXPECT_EQ(r.exact.leakage_bits, 0.0);
    EXPECT_EQ(r.empirical.detection_prob_case1, 0.0);
    EXPECT_EQ(r.empirical.disclosed_mismatch_prob, 0.0);
}

TEST(Sweep, DetectionMonotoneInSourceFlip) {
    std::ifstream in(std::string(MQKD_TEST_DATA_DIR) + "/a2_sweep.grid");
    const auto grid = parse_sweep_grid(in);
    const auto rows = sweep_attacks(grid, 2000, 5, 2);
    ASSERT_EQ(rows.size(), 8u);
    double prev = -1;
    for (std::size_t i = 0; i < 6; ++i) {
        ASSERT_FALSE(rows[i].error) << *rows[i].error;
        const double d = rows[i].report.exact.detection_prob_case1;
        const double a2 = 0.1 * static_cast<double>(i);
        EXPECT_NEAR(d, a2 * a2, 1e-9);
        EXPECT_GE(d, prev);
        prev = d;
    }
    // Duplicate points give identical rows.
    EXPECT_EQ(rows[6].report.empirical.detection_prob_case1, rows[7].report.empirical.detection_prob_case1);
    EXPECT_EQ(rows[6].report.disclosed_count, rows[7].report.disclosed_count);
    const auto csv = sweep_csv(rows);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
}

TEST(Sweep, InvalidPointsDoNotStopTheSweep) {
    const auto rows = sweep_attacks(grid_from("name = bad\na2 = 0.9\n---\nname = ok\n"), 500, 1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].error.has_value());
    EXPECT_FALSE(rows[1].error.has_value());
    EXPECT_NE(sweep_csv(rows).find("invalid"), std::string::npos);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    const auto grid = grid_from("name = g\na2 = 0:0.3:0.1\na1 = auto\n");
    EXPECT_EQ(sweep_csv(sweep_attacks(grid, 1000, 3, 1)), sweep_csv(sweep_attacks(grid, 1000, 3, 4)));
}

}  // namespace
}  // namespace mqkd
