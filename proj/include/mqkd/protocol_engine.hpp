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

#ifndef MQKD_PROTOCOL_ENGINE_HPP
#define MQKD_PROTOCOL_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mqkd/qubit_core.hpp"
#include "mqkd/rng.hpp"

namespace mqkd {

enum class Party : std::uint8_t { TP, Alice, Bob };

/// Legs of the circular route, in the order every round traverses them.
enum class Segment : std::uint8_t { TPtoAlice, AliceToBob, BobToTP };

inline constexpr Segment kSegmentOrder[] = {Segment::TPtoAlice, Segment::AliceToBob, Segment::BobToTP};

enum class CaseLabel : std::uint8_t { Check, Key, Discard };

std::string_view to_string(Party party);
std::string_view to_string(Segment segment);
std::string_view to_string(CaseLabel label);

struct RoundRecord {
    std::uint64_t round_id = 0;
    UnitaryOp alice_op = UnitaryOp::Identity;
    UnitaryOp bob_op = UnitaryOp::Identity;
    Outcome tp_outcome = Outcome::Plus;
    CaseLabel case_label = CaseLabel::Key;
    std::optional<std::uint8_t> alice_bit;
    std::optional<std::uint8_t> bob_bit;
    bool disclosed = false;

    bool operator==(const RoundRecord &) const = default;
};

struct SessionMeta {
    std::uint64_t seed = 0;
    std::uint64_t n_rounds = 0;
    std::string adversary = "null";

    bool operator==(const SessionMeta &) const = default;
};

/// Ordered, append-only log of published round results.
class Transcript {
   public:
    Transcript() = default;
    explicit Transcript(SessionMeta meta) : meta_(std::move(meta)) {}

    /// Throws std::invalid_argument unless round ids strictly increase.
    void append(RoundRecord record);

    const SessionMeta &meta() const { return meta_; }
    std::span<const RoundRecord> records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    bool operator==(const Transcript &) const = default;

   private:
    SessionMeta meta_;
    std::vector<RoundRecord> records_;
};

/// Copy of `transcript` with the disclosed flag set on the listed rounds.
Transcript with_disclosures(const Transcript &transcript, std::span<const std::uint64_t> round_ids);

/// Intercepts the photon on each segment. Ancilla registers an adversary
/// attaches are appended after qubit 0 and stay in the joint state for the
/// rest of the round. Implementations must be safe to call concurrently.
class AdversaryHook {
   public:
    virtual ~AdversaryHook() = default;
    virtual void intercept(Segment segment, StateVector &in_flight, Rng &rng) const = 0;
    virtual std::string describe() const = 0;
};

class NullAdversary final : public AdversaryHook {
   public:
    void intercept(Segment, StateVector &, Rng &) const override {}
    std::string describe() const override { return "null"; }
};

/// The only handle Alice or Bob get on the photon: one operation, or reflect.
class ParticipantPort {
   public:
    explicit ParticipantPort(StateVector &photon) : photon_(&photon) {}
    void apply(UnitaryOp op);
    void reflect() {}

   private:
    StateVector *photon_;
};

/// The only handle TP gets: emit |+> and measure in the X basis.
class SourcePort {
   public:
    StateVector prepare_plus() const;
    Outcome measure_x(const StateVector &photon, double rand) const;
};

/// Uniform choice over {I, Z, H}.
UnitaryOp choose_op(Rng &rng);

CaseLabel classify_case(UnitaryOp alice_op, UnitaryOp bob_op);

/// Outcome TP must publish for a non-discarded round in a clean channel.
/// Throws std::invalid_argument for a Discard combination.
Outcome expected_outcome(UnitaryOp alice_op, UnitaryOp bob_op);

/// Pins either participant's operation instead of drawing it.
struct ForcedOps {
    std::optional<UnitaryOp> alice;
    std::optional<UnitaryOp> bob;
};

RoundRecord run_round(std::uint64_t round_id, Rng &rng, const AdversaryHook &adversary, const ForcedOps &forced = {});

struct SessionOptions {
    ForcedOps forced;
    unsigned threads = 1;
};

/// Runs n_rounds rounds. Round i draws from its own substream
/// derive_seed(seed, Stream::Round, i), so the transcript does not depend on
/// the thread count.
Transcript run_session(std::uint64_t n_rounds, std::uint64_t seed, const AdversaryHook &adversary,
                       const SessionOptions &options = {});

}  // namespace mqkd

#endif
