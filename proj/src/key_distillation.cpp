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

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mqkd {

std::string_view to_string(AbortReason reason) {
    return reason == AbortReason::Case1Threshold ? "case1_threshold" : "disclosure_mismatch";
}

double ErrorReport::disclosed_mismatch_rate() const {
    return static_cast<double>(disclosed_mismatches) / static_cast<double>(std::max<std::uint64_t>(disclosed_count, 1));
}

std::uint8_t derive_alice_bit(UnitaryOp op) {
    switch (op) {
        case UnitaryOp::Identity:
            return 0;
        case UnitaryOp::PauliZ:
            return 1;
        case UnitaryOp::Hadamard:
            break;
    }
    throw std::invalid_argument("a Hadamard round carries no key bit");
}

std::uint8_t derive_bob_bit(UnitaryOp op, Outcome outcome) {
    if (op == UnitaryOp::Hadamard) {
        throw std::invalid_argument("a Hadamard round carries no key bit");
    }
    if (basis_of(outcome) != Basis::X) {
        throw std::invalid_argument("key bits derive from X-basis outcomes only");
    }
    // Plus means Alice did what Bob did; Minus means the other operation.
    const bool same = outcome == Outcome::Plus;
    const UnitaryOp inferred = same ? op : (op == UnitaryOp::Identity ? UnitaryOp::PauliZ : UnitaryOp::Identity);
    return derive_alice_bit(inferred);
}

ErrorReport check_case1(const Transcript &transcript, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("case-1 threshold must lie in [0, 1]");
    }
    ErrorReport report;
    for (const auto &r : transcript.records()) {
        if (r.case_label != CaseLabel::Check) {
            continue;
        }
        ++report.check_rounds;
        if (r.tp_outcome != Outcome::Plus) {
            ++report.check_errors;
        }
    }
    report.case1_error_rate =
        static_cast<double>(report.check_errors) / static_cast<double>(std::max<std::uint64_t>(report.check_rounds, 1));
    if (report.case1_error_rate > threshold) {
        report.aborted = true;
        report.abort_reason = AbortReason::Case1Threshold;
    }
    return report;
}

std::pair<KeyMaterial, ErrorReport> disclose_and_compare(const Transcript &transcript, Rng &rng,
                                                         std::uint64_t tolerance) {
    KeyMaterial key;
    for (const auto &r : transcript.records()) {
        if (r.case_label != CaseLabel::Key) {
            continue;
        }
        if (!r.alice_bit || !r.bob_bit) {
            throw std::invalid_argument("key round " + std::to_string(r.round_id) + " is missing its bits");
        }
        key.alice_raw.push_back(*r.alice_bit);
        key.bob_raw.push_back(*r.bob_bit);
        key.key_round_ids.push_back(r.round_id);
    }
    const std::size_t k = key.alice_raw.size();
    if (k < 2) {
        throw SessionTooShortError("session produced " + std::to_string(k) + " key rounds; at least 2 are needed");
    }

    // Partial Fisher-Yates: the first floor(k/2) slots become the disclosed set.
    const std::size_t half = k / 2;
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(k - i));
        std::swap(order[i], order[j]);
    }
    key.check_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    std::sort(key.check_indices.begin(), key.check_indices.end());

    ErrorReport report;
    report.disclosed_count = half;
    std::vector<bool> disclosed(k, false);
    for (std::size_t idx : key.check_indices) {
        disclosed[idx] = true;
        if (key.alice_raw[idx] != key.bob_raw[idx]) {
            ++report.disclosed_mismatches;
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!disclosed[i]) {
            key.final_key.push_back(key.alice_raw[i]);
            key.bob_final_key.push_back(key.bob_raw[i]);
        }
    }
    if (report.disclosed_mismatches > tolerance) {
        report.aborted = true;
        report.abort_reason = AbortReason::DisclosureMismatch;
    }
    return {std::move(key), report};
}

Bits privacy_amplify(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> hash_seed,
                     std::size_t out_len) {
    const std::size_t n = bits.size();
    if (out_len > n) {
        throw std::invalid_argument("privacy amplification output longer than its input");
    }
    if (out_len == 0) {
        return {};
    }
    if (hash_seed.size() != n + out_len - 1) {
        throw std::invalid_argument("Toeplitz seed must have |bits| + out_len - 1 bits");
    }
    Bits out(out_len, 0);
    for (std::size_t i = 0; i < out_len; ++i) {
        std::uint8_t acc = 0;
        for (std::size_t j = 0; j < n; ++j) {
            acc ^= hash_seed[i + n - 1 - j] & bits[j];
        }
        out[i] = acc & 1;
    }
    return out;
}

std::size_t default_output_length(std::size_t key_len, double error_rate) {
    const double scaled = std::floor((1.0 - 2.0 * error_rate) * static_cast<double>(key_len));
    if (!(scaled > 0)) {
        return 0;
    }
    return std::min(key_len, static_cast<std::size_t>(scaled));
}

EfficiencyStat qubit_efficiency(const Transcript &transcript, const KeyMaterial &key) {
    EfficiencyStat stat;
    stat.n = key.final_key.size();
    stat.m = transcript.size();
    stat.q = stat.m == 0 ? 0.0 : static_cast<double>(stat.n) / static_cast<double>(stat.m);
    return stat;
}

DistillResult distill(const Transcript &transcript, std::uint64_t seed, const DistillConfig &config) {
    DistillResult result;
    result.errors = check_case1(transcript, config.case1_threshold);

    Rng disclosure_rng(derive_seed(seed, Stream::Disclosure, 0));
    auto [key, disclosure] = disclose_and_compare(transcript, disclosure_rng, config.disclosure_tolerance);
    result.key = std::move(key);
    result.errors.disclosed_count = disclosure.disclosed_count;
    result.errors.disclosed_mismatches = disclosure.disclosed_mismatches;
    if (!result.errors.aborted && disclosure.aborted) {
        result.errors.aborted = true;
        result.errors.abort_reason = disclosure.abort_reason;
    }

    if (result.errors.aborted) {
        result.efficiency = EfficiencyStat{0, transcript.size(), 0.0};
        return result;
    }

    const std::size_t key_len = result.key.final_key.size();
    const double observed = std::max(result.errors.case1_error_rate, result.errors.disclosed_mismatch_rate());
    result.out_len = config.pa_out_len ? *config.pa_out_len : default_output_length(key_len, observed);
    if (result.out_len > key_len) {
        throw std::invalid_argument("requested key length " + std::to_string(result.out_len) + " exceeds the " +
                                    std::to_string(key_len) + " undisclosed bits");
    }
    if (result.out_len > 0) {
        Rng seed_rng(derive_seed(seed, Stream::HashSeed, 0));
        result.hash_seed.resize(key_len + result.out_len - 1);
        for (auto &b : result.hash_seed) {
            b = static_cast<std::uint8_t>(seed_rng() >> 63);
        }
    }
    result.alice_key = privacy_amplify(result.key.final_key, result.hash_seed, result.out_len);
    result.bob_key = privacy_amplify(result.key.bob_final_key, result.hash_seed, result.out_len);
    result.efficiency = qubit_efficiency(transcript, result.key);
    return result;
}

std::string bits_to_hex(std::span<const std::uint8_t> bits) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned nibble = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            nibble <<= 1;
            if (i + j < bits.size()) {
                nibble |= bits[i + j] & 1u;
            }
        }
        out.push_back(kDigits[nibble]);
    }
    return out;
}

Bits bits_from_hex(std::string_view hex, std::size_t bit_count) {
    if (hex.size() != (bit_count + 3) / 4) {
        throw std::invalid_argument("hex length does not match the bit count");
    }
    Bits out;
    out.reserve(bit_count);
    for (char c : hex) {
        unsigned v;
        if (c >= '0' && c <= '9') {
            v = static_cast<unsigned>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v = static_cast<unsigned>(c - 'a' + 10);
        } else {
            throw std::invalid_argument("invalid hex digit");
        }
        for (int j = 3; j >= 0 && out.size() < bit_count; --j) {
            out.push_back(static_cast<std::uint8_t>((v >> j) & 1u));
        }
    }
    return out;
}

}  // namespace mqkd
