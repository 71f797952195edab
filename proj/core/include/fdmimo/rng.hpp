// SPDX-License-Identifier: Apache-2.0
//
// fdmimo: 3D spatial correlation and elevation beamforming toolkit
// Copyright (C) 2026 The fdmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>

#include "fdmimo/types.hpp"

namespace fdmimo {

// Counter-based generator. Output i of a stream is mix(key + (i+1)*gamma), so a
// stream is fully described by (key, counter) and is identical on every platform.
//
// Stream splitting: substream(id) derives a new key as mix(key ^ mix(id + gamma)).
// Independent quantities (users, drops, trials, sample blocks) each take their own
// substream id, which keeps results invariant to evaluation order and threading.
class Rng {
public:
    explicit Rng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    static std::uint64_t mix(std::uint64_t z);

    std::uint64_t next_u64();

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal by Box-Muller, the second variate is cached.
    double normal();

    // Circularly symmetric complex normal with E|x|^2 = variance.
    cplx complex_normal(double variance = 1.0);

    Rng substream(std::uint64_t id) const;

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fdmimo
