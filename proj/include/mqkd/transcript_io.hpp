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

#ifndef MQKD_TRANSCRIPT_IO_HPP
#define MQKD_TRANSCRIPT_IO_HPP

#include <istream>
#include <ostream>
#include <vector>

#include "json.hpp"
#include "mqkd/key_distillation.hpp"
#include "mqkd/protocol_engine.hpp"

namespace mqkd {

using Json = nlohmann::ordered_json;

/// JSON-lines transcript layout:
///
///   {"type":"session","seed":..,"n_rounds":..,"adversary":"..", <extra header>}
///   {"type":"round","round_id":0,"alice_op":"I","bob_op":"Z","tp_outcome":"-",
///    "case":"key","alice_bit":0,"bob_bit":0,"disclosed":false}
///   ...
///   <trailer lines, each an object with a "type">
///
/// Field order is fixed. Bits are null outside key rounds.
Json round_to_json(const RoundRecord &record);
RoundRecord round_from_json(const Json &line);

Json error_report_to_json(const ErrorReport &report);

void write_transcript(std::ostream &out, const Transcript &transcript, const Json &header_extra = Json::object(),
                      const std::vector<Json> &trailer = {});

struct ParsedTranscript {
    Transcript transcript;
    Json header;
    std::vector<Json> trailer;
};

/// Throws std::runtime_error on malformed input.
ParsedTranscript read_transcript(std::istream &in);

UnitaryOp op_from_string(std::string_view s);
Outcome outcome_from_string(std::string_view s);
CaseLabel case_from_string(std::string_view s);

}  // namespace mqkd

#endif
