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

#ifndef MQKD_KEY_DISTILLATION_HPP
#define MQKD_KEY_DISTILLATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mqkd/protocol_engine.hpp"
#include "mqkd/rng.hpp"

namespace mqkd {

/// One bit per element, each 0 or 1.
using Bits = std::vector<std::uint8_t>;

/// Raised when a transcript holds too few key rounds to disclose half of them.
class SessionTooShortError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class AbortReason : std::uint8_t { Case1Threshold, DisclosureMismatch };

std::string_view to_string(AbortReason reason);

struct ErrorReport {
    std::uint64_t check_rounds = 0;
    std::uint64_t check_errors = 0;
    double case1_error_rate = 0;
    std::uint64_t disclosed_count = 0;
    std::uint64_t disclosed_mismatches = 0;
    bool aborted = false;
    std::optional<AbortReason> abort_reason;

    double disclosed_mismatch_rate() const;
};

struct KeyMaterial {
    Bits alice_raw;
    Bits bob_raw;
    /// Round id of each raw key position.
    std::vector<std::uint64_t> key_round_ids;
    /// Disclosed raw positions, ascending.
    std::vector<std::size_t> check_indices;
    /// Alice's undisclosed bits, in raw order. This is the key before
    /// privacy amplification.
    Bits final_key;
    /// Bob's copy of the same positions.
    Bits bob_final_key;
};

struct EfficiencyStat {
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    double q = 0;
};

/// I -> 0, Z -> 1. Throws std::invalid_argument for H.
std::uint8_t derive_alice_bit(UnitaryOp op);

/// Bob infers Alice's operation from his own and TP's published outcome.
/// Throws std::invalid_argument for H or a Z-basis outcome.
std::uint8_t derive_bob_bit(UnitaryOp op, Outcome outcome);

/// Counts check rounds whose outcome is not Plus; aborts when the error rate
/// exceeds `threshold`. Only the check_* and abort fields are filled.
ErrorReport check_case1(const Transcript &transcript, double threshold);

/// Collects the raw key, discloses floor(k/2) randomly chosen positions and
/// compares them. Aborts when mismatches exceed `tolerance`.
/// Throws SessionTooShortError with fewer than 2 key rounds.
std::pair<KeyMaterial, ErrorReport> disclose_and_compare(const Transcript &transcript, Rng &rng,
                                                         std::uint64_t tolerance = 0);

/// Toeplitz hash: out[i] = XOR_j seed[i - j + n - 1] & bits[j], n = |bits|.
/// Requires out_len <= |bits| and |hash_seed| = |bits| + out_len - 1 (or 0
/// when out_len is 0).
Bits privacy_amplify(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> hash_seed,
                     std::size_t out_len);

/// floor((1 - 2 * error_rate) * key_len), clamped to [0, key_len].
std::size_t default_output_length(std::size_t key_len, double error_rate);

EfficiencyStat qubit_efficiency(const Transcript &transcript, const KeyMaterial &key);

struct DistillConfig {
    double case1_threshold = 0.0;
    std::uint64_t disclosure_tolerance = 0;
    std::optional<std::size_t> pa_out_len;
};

struct DistillResult {
    ErrorReport errors;
    KeyMaterial key;
    Bits hash_seed;
    std::size_t out_len = 0;
    Bits alice_key;
    Bits bob_key;
    EfficiencyStat efficiency;
};

/// Full classical post-processing of a transcript: Case-1 check, disclosure,
/// privacy amplification. All randomness derives from `seed`. An aborted
/// session yields empty keys and n = 0.
DistillResult distill(const Transcript &transcript, std::uint64_t seed, const DistillConfig &config);

/// Lowercase hex, most significant bit first, last nibble zero-padded.
std::string bits_to_hex(std::span<const std::uint8_t> bits);
Bits bits_from_hex(std::string_view hex, std::size_t bit_count);

}  // namespace mqkd

#endif
