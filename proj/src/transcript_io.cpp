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

#include "mqkd/transcript_io.hpp"

#include <stdexcept>
#include <string>

namespace mqkd {

UnitaryOp op_from_string(std::string_view s) {
    for (UnitaryOp op : {UnitaryOp::Identity, UnitaryOp::PauliZ, UnitaryOp::Hadamard}) {
        if (s == to_string(op)) return op;
    }
    throw std::runtime_error("unknown operation '" + std::string(s) + "'");
}

Outcome outcome_from_string(std::string_view s) {
    for (Outcome o : {Outcome::Plus, Outcome::Minus, Outcome::Zero, Outcome::One}) {
        if (s == to_string(o)) return o;
    }
    throw std::runtime_error("unknown outcome '" + std::string(s) + "'");
}

CaseLabel case_from_string(std::string_view s) {
    for (CaseLabel c : {CaseLabel::Check, CaseLabel::Key, CaseLabel::Discard}) {
        if (s == to_string(c)) return c;
    }
    throw std::runtime_error("unknown case label '" + std::string(s) + "'");
}

Json round_to_json(const RoundRecord &r) {
    Json j;
    j["type"] = "round";
    j["round_id"] = r.round_id;
    j["alice_op"] = to_string(r.alice_op);
    j["bob_op"] = to_string(r.bob_op);
    j["tp_outcome"] = to_string(r.tp_outcome);
    j["case"] = to_string(r.case_label);
    j["alice_bit"] = r.alice_bit ? Json(*r.alice_bit) : Json(nullptr);
    j["bob_bit"] = r.bob_bit ? Json(*r.bob_bit) : Json(nullptr);
    j["disclosed"] = r.disclosed;
    return j;
}

RoundRecord round_from_json(const Json &j) {
    try {
        RoundRecord r;
        r.round_id = j.at("round_id").get<std::uint64_t>();
        r.alice_op = op_from_string(j.at("alice_op").get<std::string>());
        r.bob_op = op_from_string(j.at("bob_op").get<std::string>());
        r.tp_outcome = outcome_from_string(j.at("tp_outcome").get<std::string>());
        r.case_label = case_from_string(j.at("case").get<std::string>());
        if (!j.at("alice_bit").is_null()) {
            r.alice_bit = j.at("alice_bit").get<std::uint8_t>();
        }
        if (!j.at("bob_bit").is_null()) {
            r.bob_bit = j.at("bob_bit").get<std::uint8_t>();
        }
        r.disclosed = j.at("disclosed").get<bool>();
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw std::runtime_error(std::string("malformed round record: ") + e.what());
    }
}

Json error_report_to_json(const ErrorReport &e) {
    Json j;
    j["type"] = "error_report";
    j["check_rounds"] = e.check_rounds;
    j["check_errors"] = e.check_errors;
    j["case1_error_rate"] = e.case1_error_rate;
    j["disclosed_count"] = e.disclosed_count;
    j["disclosed_mismatches"] = e.disclosed_mismatches;
    j["aborted"] = e.aborted;
    j["abort_reason"] = e.abort_reason ? Json(std::string(to_string(*e.abort_reason))) : Json(nullptr);
    return j;
}

void write_transcript(std::ostream &out, const Transcript &transcript, const Json &header_extra,
                      const std::vector<Json> &trailer) {
    Json header;
    header["type"] = "session";
    header["seed"] = transcript.meta().seed;
    header["n_rounds"] = transcript.meta().n_rounds;
    header["adversary"] = transcript.meta().adversary;
    for (const auto &[k, v] : header_extra.items()) {
        header[k] = v;
    }
    out << header.dump() << "\n";
    for (const auto &r : transcript.records()) {
        out << round_to_json(r).dump() << "\n";
    }
    for (const auto &t : trailer) {
        out << t.dump() << "\n";
    }
}

ParsedTranscript read_transcript(std::istream &in) {
    ParsedTranscript parsed;
    std::string line;
    std::size_t n = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception &e) {
            throw std::runtime_error("line " + std::to_string(n) + ": " + e.what());
        }
        const std::string type = j.value("type", "");
        if (type == "session") {
            if (have_header) {
                throw std::runtime_error("line " + std::to_string(n) + ": second session header");
            }
            have_header = true;
            parsed.header = j;
            SessionMeta meta;
            meta.seed = j.at("seed").get<std::uint64_t>();
            meta.n_rounds = j.at("n_rounds").get<std::uint64_t>();
            meta.adversary = j.at("adversary").get<std::string>();
            parsed.transcript = Transcript(meta);
        } else if (type == "round") {
            if (!have_header) {
                throw std::runtime_error("line " + std::to_string(n) + ": round before session header");
            }
            parsed.transcript.append(round_from_json(j));
        } else {
            parsed.trailer.push_back(std::move(j));
        }
    }
    if (!have_header) {
        throw std::runtime_error("transcript has no session header");
    }
    return parsed;
}

}  // namespace mqkd
