/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_RNG_HPP
#define SDWBAN_RNG_HPP

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace sdwban {

// Deterministic random stream. Every entity (sensor, link, ...) owns its own
// stream derived from (master seed, entity tag) so editing one part of a
// scenario never perturbs the draws of an unrelated part. Gaussian and
// uniform draws are hand-rolled on top of the raw engine output; the
// distributions in <random> are not bit-stable across standard libraries.
class Rng {
public:
    Rng() : engine_(0) {}
    explicit Rng(uint64_t seed) : engine_(seed) {}

    static uint64_t derive_seed(uint64_t master, std::string_view tag);

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive integer range.
    int64_t uniform_int(int64_t lo, int64_t hi);

    // Standard Box-Muller; one draw per call (the spare is discarded so the
    // draw count per event stays fixed).
    double gaussian(double mean, double stddev);

private:
    std::mt19937_64 engine_;
};

} // namespace sdwban

#endif // SDWBAN_RNG_HPP
