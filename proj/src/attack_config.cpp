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

#include "mqkd/attack_config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace mqkd {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text) {
    text = trim(text);
    std::string owned(text);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(owned, &used);
    } catch (const std::exception &) {
        throw ConfigError("not a number: '" + owned + "'");
    }
    if (used != owned.size() || !std::isfinite(v)) {
        throw ConfigError("not a number: '" + owned + "'");
    }
    return v;
}

struct Entry {
    std::string key;
    std::string value;
};

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

Entry parse_entry(std::string_view line, std::size_t line_no) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))};
    if (e.key.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    return e;
}

// Strips comments and blank lines; returns content lines with line numbers.
std::vector<std::pair<std::size_t, std::string>> content_lines(std::istream &in) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string_view v(line);
        if (const auto hash = v.find('#'); hash != std::string_view::npos) {
            v = v.substr(0, hash);
        }
        v = trim(v);
        if (!v.empty()) {
            out.emplace_back(n, std::string(v));
        }
    }
    return out;
}

Complex *coefficient_slot(AttackParams &p, std::string_view key) {
    if (key == "a1") return &p.source.plus_plus;
    if (key == "a2") return &p.source.plus_minus;
    if (key == "A1") return &p.alice_leg.plus_plus;
    if (key == "A2") return &p.alice_leg.plus_minus;
    if (key == "B1") return &p.alice_leg.minus_plus;
    if (key == "B2") return &p.alice_leg.minus_minus;
    if (key == "C1") return &p.bob_leg.plus_plus;
    if (key == "C2") return &p.bob_leg.plus_minus;
    if (key == "D1") return &p.bob_leg.minus_plus;
    if (key == "D2") return &p.bob_leg.minus_minus;
    return nullptr;
}

Ket *mark_slot(AttackParams &p, std::string_view key) {
    if (key == "e1") return &p.source.mark_plus_plus;
    if (key == "e2") return &p.source.mark_plus_minus;
    if (key == "F1") return &p.alice_leg.mark_plus_plus;
    if (key == "F2") return &p.alice_leg.mark_plus_minus;
    if (key == "G1") return &p.alice_leg.mark_minus_plus;
    if (key == "G2") return &p.alice_leg.mark_minus_minus;
    if (key == "H1") return &p.bob_leg.mark_plus_plus;
    if (key == "H2") return &p.bob_leg.mark_plus_minus;
    if (key == "K1") return &p.bob_leg.mark_minus_plus;
    if (key == "K2") return &p.bob_leg.mark_minus_minus;
    return nullptr;
}

std::string_view partner_of(std::string_view key) {
    static constexpr std::pair<std::string_view, std::string_view> kPartners[] = {
        {"a1", "a2"}, {"A1", "A2"}, {"B1", "B2"}, {"C1", "C2"}, {"D1", "D2"}};
    for (auto [x, y] : kPartners) {
        if (key == x) return y;
        if (key == y) return x;
    }
    return {};
}

constexpr std::string_view kCoefficientKeys[] = {"a1", "a2", "A1", "A2", "B1", "B2", "C1", "C2", "D1", "D2"};
constexpr std::string_view kMarkKeys[] = {"e1", "e2", "F1", "F2", "G1", "G2", "H1", "H2", "K1", "K2"};

AttackParams params_from_entries(const std::vector<Entry> &entries) {
    AttackParams p = AttackParams::pass_through();
    std::vector<std::string> autos;
    for (const auto &e : entries) {
        if (Complex *slot = coefficient_slot(p, e.key)) {
            if (e.value == "auto") {
                autos.push_back(e.key);
            } else {
                *slot = parse_complex(e.value);
            }
        } else if (Ket *mark = mark_slot(p, e.key)) {
            Ket k;
            for (auto part : split(e.value, ';')) {
                k.push_back(parse_complex(part));
            }
            *mark = std::move(k);
        } else {
            throw ConfigError("unknown attack parameter '" + e.key + "'");
        }
    }
    for (const auto &key : autos) {
        const auto partner = partner_of(key);
        for (const auto &other : autos) {
            if (other == partner) {
                throw ConfigError("'" + key + "' and '" + other + "' cannot both be auto");
            }
        }
        const double rest = 1.0 - std::norm(*coefficient_slot(p, partner));
        if (rest < -kStateTolerance) {
            throw InvalidAttackError("'" + key + "' = auto: |" + std::string(partner) + "| exceeds 1");
        }
        *coefficient_slot(p, key) = std::sqrt(std::max(rest, 0.0));
    }
    p.validate();
    return p;
}

std::string format_real(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string format_complex(Complex z) { return format_real(z.real()) + "," + format_real(z.imag()); }

Basis parse_basis(std::string_view s) {
    if (s == "X" || s == "x") return Basis::X;
    if (s == "Z" || s == "z") return Basis::Z;
    throw ConfigError("unknown basis '" + std::string(s) + "'");
}

Segment parse_segment(std::string_view s) {
    for (Segment seg : kSegmentOrder) {
        if (s == to_string(seg)) return seg;
    }
    throw ConfigError("unknown segment '" + std::string(s) + "'");
}

AttackStrategy strategy_from_entries(const std::vector<Entry> &entries) {
    std::string kind = "collective";
    std::vector<Entry> params;
    Basis basis = Basis::X;
    Segment segment = Segment::AliceToBob;
    for (const auto &e : entries) {
        if (e.key == "name") {
            continue;
        } else if (e.key == "strategy") {
            kind = e.value;
        } else if (e.key == "basis") {
            basis = parse_basis(e.value);
        } else if (e.key == "segment") {
            segment = parse_segment(e.value);
        } else {
            params.push_back(e);
        }
    }
    if (kind == "null") {
        return NoAttack{};
    }
    if (kind == "intercept") {
        return InterceptResend{basis, segment};
    }
    if (kind == "collective") {
        return Collective{params_from_entries(params)};
    }
    throw ConfigError("unknown strategy '" + kind + "'");
}

struct Range {
    std::size_t entry;
    std::vector<double> values;
};

std::optional<std::vector<double>> parse_range(std::string_view value) {
    const auto parts = split(value, ':');
    if (parts.size() != 3) {
        return std::nullopt;
    }
    const double lo = parse_real(parts[0]);
    const double hi = parse_real(parts[1]);
    const double step = parse_real(parts[2]);
    if (!(step > 0) || hi < lo) {
        throw ConfigError("range '" + std::string(value) + "' needs lo <= hi and step > 0");
    }
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        if (v > hi + step * 1e-9) {
            break;
        }
        out.push_back(v);
    }
    return out;
}

// Odometer step over the range cursors; the first range varies slowest.
bool advance(std::vector<std::size_t> &cursor, const std::vector<Range> &ranges) {
    for (std::size_t r = ranges.size(); r > 0; --r) {
        if (++cursor[r - 1] < ranges[r - 1].values.size()) {
            return true;
        }
        cursor[r - 1] = 0;
    }
    return false;
}

}  // namespace

Complex parse_complex(std::string_view text) {
    const auto parts = split(trim(text), ',');
    if (parts.size() == 1) {
        return {parse_real(parts[0]), 0.0};
    }
    if (parts.size() == 2) {
        return {parse_real(parts[0]), parse_real(parts[1])};
    }
    throw ConfigError("expected 're,im' but got '" + std::string(text) + "'");
}

AttackParams parse_attack_params(std::istream &in) {
    std::vector<Entry> entries;
    for (const auto &[n, line] : content_lines(in)) {
        entries.push_back(parse_entry(line, n));
    }
    return params_from_entries(entries);
}

AttackParams load_attack_params(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open attack parameter file '" + path + "'");
    }
    return parse_attack_params(in);
}

void write_attack_params(std::ostream &out, const AttackParams &params) {
    AttackParams p = params;
    for (auto key : kCoefficientKeys) {
        out << key << " = " << format_complex(*coefficient_slot(p, key)) << "\n";
    }
    for (auto key : kMarkKeys) {
        const Ket &k = *mark_slot(p, key);
        out << key << " =";
        for (std::size_t i = 0; i < k.size(); ++i) {
            out << (i ? "; " : " ") << format_complex(k[i]);
        }
        out << "\n";
    }
}

AttackStrategy parse_strategy(std::string_view spec) {
    spec = trim(spec);
    if (spec == "null" || spec == "none") {
        return NoAttack{};
    }
    const auto parts = split(spec, ':');
    if (parts[0] == "intercept") {
        if (parts.size() != 3) {
            throw ConfigError("expected intercept:<X|Z>:<segment>");
        }
        return InterceptResend{parse_basis(parts[1]), parse_segment(parts[2])};
    }
    if (parts[0] == "collective") {
        const auto colon = spec.find(':');
        if (colon == std::string_view::npos) {
            throw ConfigError("expected collective:pass-through or collective:<param file>");
        }
        const std::string_view source = spec.substr(colon + 1);
        if (source == "pass-through") {
            return Collective{AttackParams::pass_through()};
        }
        return Collective{load_attack_params(std::string(source))};
    }
    throw ConfigError("unknown adversary '" + std::string(spec) + "'");
}

std::vector<GridPoint> parse_sweep_grid(std::istream &in) {
    std::vector<std::vector<Entry>> blocks(1);
    for (const auto &[n, line] : content_lines(in)) {
        if (line == "---") {
            blocks.emplace_back();
            continue;
        }
        blocks.back().push_back(parse_entry(line, n));
    }

    std::vector<GridPoint> points;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto &block = blocks[b];
        if (block.empty()) {
            continue;
        }
        std::string base = "point" + std::to_string(b);
        std::vector<Range> ranges;
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (block[i].key == "name") {
                base = block[i].value;
            } else if (auto values = parse_range(block[i].value)) {
                ranges.push_back(Range{i, std::move(*values)});
            }
        }

        std::vector<std::size_t> cursor(ranges.size(), 0);
        while (true) {
            std::vector<Entry> entries = block;
            std::string name = base;
            if (!ranges.empty()) {
                name += "[";
                for (std::size_t r = 0; r < ranges.size(); ++r) {
                    const double v = ranges[r].values[cursor[r]];
                    entries[ranges[r].entry].value = format_real(v);
                    name += (r ? "," : "") + entries[ranges[r].entry].key + "=" + format_real(v);
                }
                name += "]";
            }
            try {
                points.push_back(GridPoint{name, strategy_from_entries(entries)});
            } catch (const std::exception &e) {
                points.push_back(GridPoint{name, std::string(e.what())});
            }

            if (!advance(cursor, ranges)) {
                break;
            }
        }
    }
    if (points.empty()) {
        throw ConfigError("sweep grid is empty");
    }
    return points;
}

}  // namespace mqkd
