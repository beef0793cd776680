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

#ifndef MQKD_ATTACK_CONFIG_HPP
#define MQKD_ATTACK_CONFIG_HPP

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mqkd/adversary_lab.hpp"

namespace mqkd {

/// Raised for malformed configuration text.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Parses "re,im" or "re".
Complex parse_complex(std::string_view text);

/// Parses a plain-text attack parameter file.
///
///   # comment
///   a1 = 0.8,0.0        complex values are "re,im" (or just "re")
///   a2 = auto           auto fills in sqrt(1 - |partner|^2)
///   F1 = 1,0; 0,0; 0,0; 0,0
///
/// Coefficient keys: a1 a2 A1 A2 B1 B2 C1 C2 D1 D2. Mark keys: e1 e2 F1 F2
/// G1 G2 H1 H2 K1 K2, written as ';'-separated complex entries. Keys not given
/// keep their AttackParams::pass_through() value. Throws ConfigError for
/// syntax problems and InvalidAttackError for invalid parameters.
AttackParams parse_attack_params(std::istream &in);
AttackParams load_attack_params(const std::string &path);

/// Writes every key, in the order listed above, with round-trip precision.
void write_attack_params(std::ostream &out, const AttackParams &params);

/// "null", "intercept:<X|Z>:<segment>", "collective:pass-through" or
/// "collective:<param file>".
AttackStrategy parse_strategy(std::string_view spec);

/// One expanded point of a sweep grid. Invalid points carry their error
/// message instead of a strategy.
struct GridPoint {
    std::string name;
    std::variant<AttackStrategy, std::string> strategy;
};

/// Sweep grid file: blocks separated by lines of "---". Each block holds
/// "name = ...", "strategy = null|intercept|collective" (default collective),
/// "basis" and "segment" for intercept, and parameter keys for collective.
/// A value "lo:hi:step" expands into an inclusive range; several ranges in a
/// block form a Cartesian product in order of appearance.
std::vector<GridPoint> parse_sweep_grid(std::istream &in);

}  // namespace mqkd

#endif
