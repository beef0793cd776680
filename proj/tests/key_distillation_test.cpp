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

#include "mqkd/key_distillation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mqkd/adversary_lab.hpp"
#include "oracle/branch_oracle.hpp"

namespace mqkd {
namespace {

Transcript synthetic(const std::vector<std::pair<UnitaryOp, UnitaryOp>> &ops, std::uint64_t seed = 1) {
    Transcript t(SessionMeta{seed, ops.size(), "null"});
    std::uint64_t id = 0;
    for (auto [a, b] : ops) {
        RoundRecord r;
        r.round_id = id++;
        r.alice_op = a;
        r.bob_op = b;
        r.case_label = classify_case(a, b);
        r.tp_outcome = r.case_label == CaseLabel::Discard ? Outcome::Plus : expected_outcome(a, b);
        if (r.case_label == CaseLabel::Key) {
            r.alice_bit = derive_alice_bit(a);
            r.bob_bit = derive_bob_bit(b, r.tp_outcome);
        }
        t.append(r);
    }
    return t;
}

Transcript attacked_session(std::uint64_t n, Basis basis, std::uint64_t seed) {
    const auto hook = make_hook(InterceptResend{basis, Segment::AliceToBob});
    return run_session(n, seed, *hook);
}

// Explicit Toeplitz matrix: T[i][j] = seed[i - j + n - 1].
Bits toeplitz_reference(const Bits &bits, const Bits &seed, std::size_t out_len) {
    const std::size_t n = bits.size();
    Bits out(out_len, 0);
    for (std::size_t i = 0; i < out_len; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out[i] ^= seed[i + n - 1 - j] & bits[j];
        }
    }
    return out;
}

Bits random_bits(std::size_t n, Rng &rng) {
    Bits b(n);
    for (auto &x : b) x = static_cast<std::uint8_t>(rng() >> 63);
    return b;
}

TEST(DeriveBits, Alice) {
    EXPECT_EQ(derive_alice_bit(UnitaryOp::Identity), 0);
    EXPECT_EQ(derive_alice_bit(UnitaryOp::PauliZ), 1);
    EXPECT_THROW(derive_alice_bit(UnitaryOp::Hadamard), std::invalid_argument);
}

TEST(DeriveBits, Bob) {
    EXPECT_EQ(derive_bob_bit(UnitaryOp::Identity, Outcome::Plus), 0);
    EXPECT_EQ(derive_bob_bit(UnitaryOp::Identity, Outcome::Minus), 1);
    EXPECT_EQ(derive_bob_bit(UnitaryOp::PauliZ, Outcome::Minus), 0);
    EXPECT_EQ(derive_bob_bit(UnitaryOp::PauliZ, Outcome::Plus), 1);
    EXPECT_THROW(derive_bob_bit(UnitaryOp::Hadamard, Outcome::Plus), std::invalid_argument);
    EXPECT_THROW(derive_bob_bit(UnitaryOp::Identity, Outcome::Zero), std::invalid_argument);
}

TEST(DeriveBits, BobRecoversAliceOnEveryKeyPair) {
    for (UnitaryOp a : {UnitaryOp::Identity, UnitaryOp::PauliZ}) {
        for (UnitaryOp b : {UnitaryOp::Identity, UnitaryOp::PauliZ}) {
            EXPECT_EQ(derive_bob_bit(b, expected_outcome(a, b)), derive_alice_bit(a));
        }
    }
}

TEST(CheckCase1, Noiseless) {
    const auto t = run_session(20000, 4, NullAdversary{});
    const auto e = check_case1(t, 0.0);
    EXPECT_GT(e.check_rounds, 0u);
    EXPECT_EQ(e.check_errors, 0u);
    EXPECT_FALSE(e.aborted);
    EXPECT_FALSE(e.abort_reason.has_value());
}

TEST(CheckCase1, InterceptResendXMatchesOracle) {
    const double want = oracle::rates_intercept_resend(Basis::X, Segment::AliceToBob).check_error;
    const auto t = attacked_session(100000, Basis::X, 12);
    const auto e = check_case1(t, 0.0);
    ASSERT_GE(e.check_rounds, 10000u);
    EXPECT_NEAR(e.case1_error_rate, want, 0.03);
    EXPECT_TRUE(e.aborted);
    EXPECT_EQ(e.abort_reason, AbortReason::Case1Threshold);
    EXPECT_FALSE(check_case1(t, 1.0).aborted);
}

TEST(CheckCase1, EmptyCheckSetAndBadThreshold) {
    const auto t = synthetic({{UnitaryOp::Identity, UnitaryOp::Identity}});
    const auto e = check_case1(t, 0.0);
    EXPECT_EQ(e.check_rounds, 0u);
    EXPECT_EQ(e.case1_error_rate, 0.0);
    EXPECT_THROW(check_case1(t, -0.1), std::invalid_argument);
    EXPECT_THROW(check_case1(t, 1.5), std::invalid_argument);
}

TEST(CheckCase1, AbortIsMonotoneInThreshold) {
    const auto t = attacked_session(3000, Basis::X, 2);
    bool aborted_before = false;
    for (int k = 100; k >= 0; --k) {
        const bool aborted = check_case1(t, k / 100.0).aborted;
        EXPECT_TRUE(aborted || !aborted_before) << "threshold " << k / 100.0;
        aborted_before = aborted;
    }
}

TEST(Disclose, ExactHalfOnNoiselessKey) {
    std::vector<std::pair<UnitaryOp, UnitaryOp>> ops;
    for (int i = 0; i < 1000; ++i) {
        ops.emplace_back(i % 3 ? UnitaryOp::Identity : UnitaryOp::PauliZ, i % 2 ? UnitaryOp::Identity : UnitaryOp::PauliZ);
    }
    Rng rng(5);
    const auto [key, rep] = disclose_and_compare(synthetic(ops), rng);
    EXPECT_EQ(key.alice_raw.size(), 1000u);
    EXPECT_EQ(key.alice_raw, key.bob_raw);
    EXPECT_EQ(rep.disclosed_count, 500u);
    EXPECT_EQ(rep.disclosed_mismatches, 0u);
    EXPECT_FALSE(rep.aborted);
    EXPECT_EQ(key.final_key.size(), 500u);
    EXPECT_TRUE(std::is_sorted(key.check_indices.begin(), key.check_indices.end()));
    // Final key consists of exactly the undisclosed positions, in order.
    Bits rebuilt;
    for (std::size_t i = 0; i < key.alice_raw.size(); ++i) {
        if (!std::binary_search(key.check_indices.begin(), key.check_indices.end(), i)) {
            rebuilt.push_back(key.alice_raw[i]);
        }
    }
    EXPECT_EQ(rebuilt, key.final_key);
}

TEST(Disclose, OddCountFloors) {
    std::vector<std::pair<UnitaryOp, UnitaryOp>> ops(7, {UnitaryOp::PauliZ, UnitaryOp::Identity});
    Rng rng(1);
    const auto [key, rep] = disclose_and_compare(synthetic(ops), rng);
    EXPECT_EQ(rep.disclosed_count, 3u);
    EXPECT_EQ(key.final_key.size(), 4u);
}

TEST(Disclose, TooShort) {
    Rng rng(1);
    EXPECT_THROW(disclose_and_compare(synthetic({{UnitaryOp::Hadamard, UnitaryOp::Hadamard}}), rng),
                 SessionTooShortError);
    EXPECT_THROW(disclose_and_compare(synthetic({{UnitaryOp::Identity, UnitaryOp::PauliZ}}), rng),
                 SessionTooShortError);
    EXPECT_NO_THROW(disclose_and_compare(
        synthetic({{UnitaryOp::Identity, UnitaryOp::PauliZ}, {UnitaryOp::Identity, UnitaryOp::Identity}}), rng));
}

TEST(Disclose, SameSeedSameIndices) {
    const auto t = run_session(3000, 8, NullAdversary{});
    Rng a(99), b(99), c(100);
    const auto ka = disclose_and_compare(t, a).first;
    const auto kb = disclose_and_compare(t, b).first;
    const auto kc = disclose_and_compare(t, c).first;
    EXPECT_EQ(ka.check_indices, kb.check_indices);
    EXPECT_NE(ka.check_indices, kc.check_indices);
}

TEST(Disclose, InterceptResendZMatchesOracle) {
    const double want = oracle::rates_intercept_resend(Basis::Z, Segment::AliceToBob).key_mismatch;
    EXPECT_NEAR(want, 0.5, 1e-12);
    const auto t = attacked_session(90000, Basis::Z, 21);
    Rng rng(3);
    const auto [key, rep] = disclose_and_compare(t, rng);
    EXPECT_NEAR(rep.disclosed_mismatch_rate(), want, 0.03);
    EXPECT_TRUE(rep.aborted);
    EXPECT_EQ(rep.abort_reason, AbortReason::DisclosureMismatch);
    Rng again(3);
    EXPECT_FALSE(disclose_and_compare(t, again, rep.disclosed_mismatches).second.aborted);
}

TEST(PrivacyAmplify, Trivial) {
    Rng rng(1);
    const Bits bits = random_bits(20, rng);
    EXPECT_TRUE(privacy_amplify(bits, {}, 0).empty());
    const Bits zeros(20 + 6 - 1, 0);
    EXPECT_EQ(privacy_amplify(bits, zeros, 6), Bits(6, 0));
}

TEST(PrivacyAmplify, MatchesExplicitMatrix) {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        const std::size_t m = rng.below(n + 1);
        const Bits bits = random_bits(n, rng);
        const Bits seed = random_bits(m == 0 ? 0 : n + m - 1, rng);
        EXPECT_EQ(privacy_amplify(bits, seed, m), toeplitz_reference(bits, seed, m));
    }
}

TEST(PrivacyAmplify, HandExample) {
    // n = 3, out = 2, seed s0..s3 = 1,0,1,1:
    //   row 0 = (s2, s1, s0) = (1, 0, 1)
    //   row 1 = (s3, s2, s1) = (1, 1, 0)
    EXPECT_EQ(privacy_amplify(Bits{1, 1, 0}, Bits{1, 0, 1, 1}, 2), (Bits{1, 0}));
    EXPECT_EQ(privacy_amplify(Bits{0, 0, 1}, Bits{1, 0, 1, 1}, 2), (Bits{1, 0}));
}

TEST(PrivacyAmplify, Linear) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Bits x = random_bits(64, rng), y = random_bits(64, rng);
        const Bits seed = random_bits(64 + 16 - 1, rng);
        Bits xy(64);
        for (int i = 0; i < 64; ++i) xy[i] = x[i] ^ y[i];
        const Bits px = privacy_amplify(x, seed, 16), py = privacy_amplify(y, seed, 16);
        Bits pxy(16);
        for (int i = 0; i < 16; ++i) pxy[i] = px[i] ^ py[i];
        EXPECT_EQ(privacy_amplify(xy, seed, 16), pxy);
    }
}

TEST(PrivacyAmplify, Errors) {
    const Bits bits(4, 1);
    EXPECT_THROW(privacy_amplify(bits, Bits(4 + 5 - 1, 0), 5), std::invalid_argument);
    EXPECT_THROW(privacy_amplify(bits, Bits(3, 0), 2), std::invalid_argument);
}

TEST(PrivacyAmplify, CollisionRateIsTwoUniversal) {
    Rng rng(31337);
    constexpr int trials = 100000;
    constexpr std::size_t n = 32, m = 8;
    int collisions = 0;
    for (int t = 0; t < trials; ++t) {
        const Bits seed = random_bits(n + m - 1, rng);
        const Bits x = random_bits(n, rng);
        Bits y = random_bits(n, rng);
        if (x == y) y[0] ^= 1;
        collisions += privacy_amplify(x, seed, m) == privacy_amplify(y, seed, m);
    }
    const double p = 1.0 / 256;
    const double sigma = std::sqrt(p * (1 - p) / trials);
    EXPECT_NEAR(collisions / double(trials), p, 3 * sigma);
}

TEST(DefaultOutputLength, Rule) {
    EXPECT_EQ(default_output_length(100, 0.0), 100u);
    EXPECT_EQ(default_output_length(100, 0.1), 80u);
    EXPECT_EQ(default_output_length(101, 0.25), 50u);
    EXPECT_EQ(default_output_length(100, 0.5), 0u);
    EXPECT_EQ(default_output_length(100, 0.9), 0u);
}

TEST(QubitEfficiency, SyntheticExtremes) {
    std::vector<std::pair<UnitaryOp, UnitaryOp>> discard(30, {UnitaryOp::Hadamard, UnitaryOp::PauliZ});
    discard.emplace_back(UnitaryOp::Identity, UnitaryOp::Identity);
    discard.emplace_back(UnitaryOp::PauliZ, UnitaryOp::Identity);
    // Two key rounds are needed to disclose; with them removed the rest is discard.
    Rng rng(1);
    const auto t = synthetic(discard);
    const auto key = disclose_and_compare(t, rng).first;
    const auto e = qubit_efficiency(t, key);
    EXPECT_EQ(e.m, 32u);
    EXPECT_EQ(e.n, 1u);

    KeyMaterial none;
    const auto all_discard = synthetic(std::vector<std::pair<UnitaryOp, UnitaryOp>>(10, {UnitaryOp::Hadamard, UnitaryOp::Identity}));
    EXPECT_EQ(qubit_efficiency(all_discard, none).q, 0.0);

    SessionOptions opts;
    opts.forced = {UnitaryOp::Identity, UnitaryOp::PauliZ};
    const auto all_key = run_session(1000, 3, NullAdversary{}, opts);
    Rng r2(1);
    EXPECT_EQ(qubit_efficiency(all_key, disclose_and_compare(all_key, r2).first).q, 0.5);
}

TEST(Distill, HonestSession) {
    const auto t = run_session(90000, 1, NullAdversary{});
    const auto d = distill(t, 1, {});
    EXPECT_FALSE(d.errors.aborted);
    EXPECT_EQ(d.alice_key, d.bob_key);
    EXPECT_EQ(d.out_len, d.key.final_key.size());
    EXPECT_EQ(d.hash_seed.size(), 2 * d.out_len - 1);
    EXPECT_NEAR(d.efficiency.q, 2.0 / 9.0, 0.01);
    const auto again = distill(t, 1, {});
    EXPECT_EQ(again.alice_key, d.alice_key);
    EXPECT_EQ(again.key.check_indices, d.key.check_indices);
}

TEST(Distill, AbortedSessionHasNoKey) {
    const auto t = attacked_session(5000, Basis::X, 3);
    const auto d = distill(t, 3, {});
    EXPECT_TRUE(d.errors.aborted);
    EXPECT_EQ(d.errors.abort_reason, AbortReason::Case1Threshold);
    EXPECT_TRUE(d.alice_key.empty());
    EXPECT_EQ(d.efficiency.n, 0u);
    EXPECT_EQ(d.efficiency.q, 0.0);
}

TEST(Distill, OutputLengthOverride) {
    const auto t = run_session(900, 5, NullAdversary{});
    DistillConfig c;
    c.pa_out_len = 16;
    EXPECT_EQ(distill(t, 5, c).alice_key.size(), 16u);
    c.pa_out_len = 100000;
    EXPECT_THROW(distill(t, 5, c), std::invalid_argument);
}

TEST(Distill, ErrorRatesShrinkTheKey) {
    // Z intercept-resend leaves check rounds clean and corrupts half the key.
    const auto t = attacked_session(9000, Basis::Z, 4);
    DistillConfig c;
    c.disclosure_tolerance = 1u << 30;
    const auto d = distill(t, 4, c);
    EXPECT_FALSE(d.errors.aborted);
    EXPECT_EQ(d.out_len, default_output_length(d.key.final_key.size(), d.errors.disclosed_mismatch_rate()));
    EXPECT_LT(d.out_len, d.key.final_key.size() / 10);
}

TEST(Hex, RoundTrip) {
    Rng rng(6);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 63u, 64u}) {
        const Bits b = random_bits(n, rng);
        EXPECT_EQ(bits_from_hex(bits_to_hex(b), n), b);
    }
    EXPECT_EQ(bits_to_hex(Bits{1, 0, 1, 0, 1}), "a8");
    EXPECT_THROW(bits_from_hex("a8", 3), std::invalid_argument);
    EXPECT_THROW(bits_from_hex("zz", 8), std::invalid_argument);
}

}  // namespace
}  // namespace mqkd
