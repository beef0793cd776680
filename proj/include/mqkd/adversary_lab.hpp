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

#ifndef MQKD_ADVERSARY_LAB_HPP
#define MQKD_ADVERSARY_LAB_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mqkd/protocol_engine.hpp"
#include "mqkd/qubit_core.hpp"
#include "mqkd/rng.hpp"

namespace mqkd {

/// Amplitudes of a state of one ancilla register.
using Ket = std::vector<Complex>;

/// Raised for attack parameters that violate a normalization invariant or
/// admit no unitary completion.
class InvalidAttackError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Action of one attack unitary on the photon plus a fresh ancilla register:
///
///   U |+>|0..0> = plus_plus  |+> |mark_plus_plus>  + plus_minus  |-> |mark_plus_minus>
///   U |->|0..0> = minus_plus |+> |mark_minus_plus> + minus_minus |-> |mark_minus_minus>
///
/// Marks are unit vectors in the 2^ancilla_qubits register. When
/// minus_specified is false only the first line constrains U.
struct LegCoupling {
    std::size_t ancilla_qubits = 2;
    bool minus_specified = true;
    Complex plus_plus{1};
    Complex plus_minus{0};
    Complex minus_plus{0};
    Complex minus_minus{1};
    Ket mark_plus_plus;
    Ket mark_plus_minus;
    Ket mark_minus_plus;
    Ket mark_minus_minus;

    bool operator==(const LegCoupling &) const = default;
};

/// The three-stage collective attack run by a dishonest TP.
///
/// Coefficient names in parameter files map as follows:
///   source    (TP -> Alice): a1 = plus_plus, a2 = plus_minus, marks e1, e2
///   alice_leg (Alice -> Bob): A1, A2, B1, B2 with marks F1, F2, G1, G2
///   bob_leg   (Bob -> TP):    C1, C2, D1, D2 with marks H1, H2, K1, K2
struct AttackParams {
    LegCoupling source;
    LegCoupling alice_leg;
    LegCoupling bob_leg;

    /// Coefficients of an honest channel with marks that record nothing
    /// (F1 = G2, H1 = K2), so every leg acts as identity on the photon.
    static AttackParams pass_through();

    /// Same coefficients, but every mark in a leg is a distinct computational
    /// basis state, i.e. TP can tell all of them apart.
    static AttackParams pass_through_distinct_marks();

    /// Throws InvalidAttackError if a normalization invariant fails.
    void validate() const;

    bool operator==(const AttackParams &) const = default;
};

struct AttackUnitaries {
    Unitary source;
    Unitary alice_leg;
    Unitary bob_leg;
};

/// Unitary on photon (most significant) plus ancilla register reproducing the
/// coupling on its constrained inputs; the remaining columns are filled by
/// Gram-Schmidt over the computational basis in index order.
Unitary build_leg_unitary(const LegCoupling &leg);
AttackUnitaries build_attack_unitaries(const AttackParams &params);

/// Sum-of-squares norm of the terms that must vanish for the attack to leave
/// every check and key statistic untouched: a2, A2, B1, C2, D1 and
/// A1|F1> - B2|G2>.
double no_detection_residual(const AttackParams &params);

struct NoAttack {
    bool operator==(const NoAttack &) const = default;
};
struct InterceptResend {
    Basis basis = Basis::X;
    Segment segment = Segment::AliceToBob;
    bool operator==(const InterceptResend &) const = default;
};
struct Collective {
    AttackParams params;
    bool operator==(const Collective &) const = default;
};
using AttackStrategy = std::variant<NoAttack, InterceptResend, Collective>;

std::string describe(const AttackStrategy &strategy);

/// Hook that executes the strategy inside run_round.
std::unique_ptr<AdversaryHook> make_hook(const AttackStrategy &strategy);

/// Measures the photon in `basis` and resends the collapsed state.
StateVector intercept_resend(const StateVector &state, Basis basis, Rng &rng);

/// Coherent description of a strategy: at most one coupling per segment.
/// Intercept-resend is represented by copying the measured basis into a
/// one-qubit ancilla, which yields the same photon statistics.
using AttackPlan = std::array<std::optional<LegCoupling>, 3>;

AttackPlan plan_for(const AttackStrategy &strategy);

/// Exact end-of-round quantities for fixed participant operations.
struct RoundDistribution {
    double p_plus = 0;
    double p_minus = 0;
    std::size_t ancilla_qubits = 0;
    /// Unnormalized ancilla amplitudes conditioned on TP's outcome; their
    /// squared norms are p_plus and p_minus.
    std::vector<Complex> ancilla_given_plus;
    std::vector<Complex> ancilla_given_minus;
};

RoundDistribution evaluate_round(const AttackPlan &plan, UnitaryOp alice_op, UnitaryOp bob_op);
RoundDistribution run_collective_round(const AttackParams &params, UnitaryOp alice_op, UnitaryOp bob_op);

struct AttackOutcomeStats {
    double detection_prob_case1 = 0;
    double disclosed_mismatch_prob = 0;
    double leakage_bits = 0;
};

/// Holevo information (bits) between the key-round key bit and TP's ancillas,
/// conditioned on the published outcome. The four key-round operation pairs
/// are equally likely.
double eve_leakage(const AttackPlan &plan);
double eve_leakage(const AttackParams &params);

/// Born-rule detection and mismatch probabilities plus leakage.
AttackOutcomeStats exact_stats(const AttackPlan &plan);

struct AttackReport {
    std::string strategy;
    std::optional<double> residual;
    /// Empirical rates from a simulated session; leakage_bits is exact.
    AttackOutcomeStats empirical;
    AttackOutcomeStats exact;
    std::uint64_t check_rounds = 0;
    std::uint64_t disclosed_count = 0;
    std::uint64_t key_rounds = 0;
    std::uint64_t key_mismatches = 0;
};

AttackReport attack_report(const AttackStrategy &strategy, std::uint64_t n_rounds, std::uint64_t seed,
                           unsigned threads = 1);

/// Uniformly random unit vector of the given dimension.
Ket random_ket(std::size_t dim, Rng &rng);

/// Random valid parameters; every leg uses a random orthonormal mark family.
AttackParams sample_attack_params(Rng &rng);

/// Random parameters with no_detection_residual == 0. The unused marks are
/// chosen orthogonal to the used ones so perturb_params keeps them valid.
AttackParams sample_undetectable_params(Rng &rng);

/// Moves weight of total norm `magnitude` onto the flip coefficients (a2, A2,
/// B1, C2, D1) in a random direction and renormalizes each pair.
AttackParams perturb_params(const AttackParams &params, double magnitude, Rng &rng);

}  // namespace mqkd

#endif
