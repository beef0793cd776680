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

#include "mqkd/protocol_engine.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <thread>

#include "mqkd/key_distillation.hpp"

namespace mqkd {

std::string_view to_string(Party party) {
    switch (party) {
        case Party::TP:
            return "TP";
        case Party::Alice:
            return "Alice";
        case Party::Bob:
            return "Bob";
    }
    return "?";
}

std::string_view to_string(Segment segment) {
    switch (segment) {
        case Segment::TPtoAlice:
            return "TPtoAlice";
        case Segment::AliceToBob:
            return "AliceToBob";
        case Segment::BobToTP:
            return "BobToTP";
    }
    return "?";
}

std::string_view to_string(CaseLabel label) {
    switch (label) {
        case CaseLabel::Check:
            return "check";
        case CaseLabel::Key:
            return "key";
        case CaseLabel::Discard:
            return "discard";
    }
    return "?";
}

void Transcript::append(RoundRecord record) {
    if (!records_.empty() && record.round_id <= records_.back().round_id) {
        throw std::invalid_argument("transcript round ids must strictly increase");
    }
    records_.push_back(std::move(record));
}

Transcript with_disclosures(const Transcript &transcript, std::span<const std::uint64_t> round_ids) {
    std::vector<std::uint64_t> sorted(round_ids.begin(), round_ids.end());
    std::sort(sorted.begin(), sorted.end());
    Transcript out(transcript.meta());
    for (RoundRecord r : transcript.records()) {
        if (std::binary_search(sorted.begin(), sorted.end(), r.round_id)) {
            r.disclosed = true;
        }
        out.append(std::move(r));
    }
    return out;
}

void ParticipantPort::apply(UnitaryOp op) { *photon_ = apply_op(*photon_, op, 0); }

StateVector SourcePort::prepare_plus() const { return mqkd::prepare_plus(); }

Outcome SourcePort::measure_x(const StateVector &photon, double rand) const {
    return measure(photon, 0, Basis::X, rand).outcome;
}

UnitaryOp choose_op(Rng &rng) {
    switch (rng.below(3)) {
        case 0:
            return UnitaryOp::Identity;
        case 1:
            return UnitaryOp::PauliZ;
        default:
            return UnitaryOp::Hadamard;
    }
}

CaseLabel classify_case(UnitaryOp alice_op, UnitaryOp bob_op) {
    const bool alice_h = alice_op == UnitaryOp::Hadamard;
    const bool bob_h = bob_op == UnitaryOp::Hadamard;
    if (alice_h && bob_h) {
        return CaseLabel::Check;
    }
    if (!alice_h && !bob_h) {
        return CaseLabel::Key;
    }
    return CaseLabel::Discard;
}

Outcome expected_outcome(UnitaryOp alice_op, UnitaryOp bob_op) {
    switch (classify_case(alice_op, bob_op)) {
        case CaseLabel::Check:
            return Outcome::Plus;
        case CaseLabel::Key:
            return alice_op == bob_op ? Outcome::Plus : Outcome::Minus;
        case CaseLabel::Discard:
            break;
    }
    throw std::invalid_argument("no expected outcome for a discarded combination");
}

namespace {

// A participant receives the photon, applies its chosen operation, and
// reflects it onward.
void participant_turn(ParticipantPort &port, UnitaryOp op) {
    port.apply(op);
    port.reflect();
}

}  // namespace

RoundRecord run_round(std::uint64_t round_id, Rng &rng, const AdversaryHook &adversary, const ForcedOps &forced) {
    const UnitaryOp alice_op = forced.alice ? *forced.alice : choose_op(rng);
    const UnitaryOp bob_op = forced.bob ? *forced.bob : choose_op(rng);

    const SourcePort tp;
    StateVector photon = tp.prepare_plus();

    adversary.intercept(Segment::TPtoAlice, photon, rng);
    {
        ParticipantPort alice(photon);
        participant_turn(alice, alice_op);
    }
    adversary.intercept(Segment::AliceToBob, photon, rng);
    {
        ParticipantPort bob(photon);
        participant_turn(bob, bob_op);
    }
    adversary.intercept(Segment::BobToTP, photon, rng);

    RoundRecord record;
    record.round_id = round_id;
    record.alice_op = alice_op;
    record.bob_op = bob_op;
    record.tp_outcome = tp.measure_x(photon, rng.uniform01());
    record.case_label = classify_case(alice_op, bob_op);
    if (record.case_label == CaseLabel::Key) {
        record.alice_bit = derive_alice_bit(alice_op);
        record.bob_bit = derive_bob_bit(bob_op, record.tp_outcome);
    }
    return record;
}

Transcript run_session(std::uint64_t n_rounds, std::uint64_t seed, const AdversaryHook &adversary,
                       const SessionOptions &options) {
    if (n_rounds == 0) {
        throw std::invalid_argument("a session needs at least one round");
    }
    std::vector<RoundRecord> records(n_rounds);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            Rng rng(derive_seed(seed, Stream::Round, i));
            records[i] = run_round(i, rng, adversary, options.forced);
        }
    };

    const std::uint64_t threads = std::clamp<std::uint64_t>(options.threads, 1, n_rounds);
    if (threads == 1) {
        work(0, n_rounds);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            const std::uint64_t chunk = (n_rounds + threads - 1) / threads;
            for (std::uint64_t t = 0; t < threads; ++t) {
                const std::uint64_t begin = t * chunk;
                const std::uint64_t end = std::min(n_rounds, begin + chunk);
                if (begin < end) {
                    pool.emplace_back([&, t, begin, end] {
                        try {
                            work(begin, end);
                        } catch (...) {
                            errors[t] = std::current_exception();
                        }
                    });
                }
            }
        }
        for (const auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    Transcript transcript(SessionMeta{seed, n_rounds, adversary.describe()});
    for (auto &r : records) {
        transcript.append(std::move(r));
    }
    return transcript;
}

}  // namespace mqkd
