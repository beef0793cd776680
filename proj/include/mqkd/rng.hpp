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

#ifndef MQKD_RNG_HPP
#define MQKD_RNG_HPP

#include <cstdint>
#include <limits>

namespace mqkd {

/// Independent stream identifiers mixed into derive_seed().
enum class Stream : std::uint64_t {
    Round = 1,
    Disclosure = 2,
    HashSeed = 3,
    Sampling = 4,
};

/// Mixes (seed, stream, index) into a well-separated 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index);

/// SplitMix64 generator with a few explicit, portable derived draws.
///
/// The standard distributions are implementation-defined, so every draw that
/// affects a transcript goes through the helpers here instead.
class Rng {
   public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform01();

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

   private:
    std::uint64_t state_;
};

}  // namespace mqkd

#endif
