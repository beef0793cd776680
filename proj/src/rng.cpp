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

#include "mqkd/rng.hpp"

#include <stdexcept>

namespace mqkd {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
    std::uint64_t z = mix64(seed + kGolden * (static_cast<std::uint64_t>(stream) + 1));
    z = mix64(z ^ (index * kGolden + 0x632BE59BD9B4E019ULL));
    return z;
}

Rng::result_type Rng::operator()() {
    state_ += kGolden;
    return mix64(state_);
}

double Rng::uniform01() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::below requires n > 0");
    }
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
        const std::uint64_t r = (*this)();
        if (r >= threshold) {
            return r % n;
        }
    }
}

}  // namespace mqkd
