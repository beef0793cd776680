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

// Reference computations for the test suites. Nothing here touches the state
// vector code: collective attacks are expanded term by term in the |+>/|->
// basis with ancilla marks kept symbolic, and intercept-resend is enumerated
// branch by branch on a bare photon.

#ifndef MQKD_TESTS_BRANCH_ORACLE_HPP
#define MQKD_TESTS_BRANCH_ORACLE_HPP

#include <complex>

#include "mqkd/adversary_lab.hpp"

namespace oracle {

using C = std::complex<double>;

struct Probs {
    double plus = 0;
    double minus = 0;
};

/// Born-rule outcome probabilities of one round under a collective attack.
Probs collective(const mqkd::AttackParams &params, mqkd::UnitaryOp alice, mqkd::UnitaryOp bob);

/// Holevo leakage of the key bit, conditioned on TP's outcome.
double collective_leakage(const mqkd::AttackParams &params);

/// Outcome probabilities with a measure-and-resend attacker on one segment.
Probs intercept_resend(mqkd::Basis basis, mqkd::Segment segment, mqkd::UnitaryOp alice, mqkd::UnitaryOp bob);

/// P(-) for (H, H) and the mean wrong-outcome probability over key pairs.
struct Rates {
    double check_error = 0;
    double key_mismatch = 0;
};
Rates rates_collective(const mqkd::AttackParams &params);
Rates rates_intercept_resend(mqkd::Basis basis, mqkd::Segment segment);

/// Closed forms for attacks whose marks within each leg coincide, so the
/// legs act on the photon alone.
double travel_only_check_plus(const mqkd::AttackParams &params);
double travel_only_key_plus(const mqkd::AttackParams &params, mqkd::UnitaryOp alice, mqkd::UnitaryOp bob);

}  // namespace oracle

#endif
