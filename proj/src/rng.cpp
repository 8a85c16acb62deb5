/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/rng.hpp"

#include <cmath>

namespace sdwban {

namespace {

// splitmix64 finalizer; good avalanche, cheap, stable.
uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

uint64_t Rng::derive_seed(uint64_t master, std::string_view tag) {
    uint64_t h = mix64(master);
    for (char c : tag) {
        h = mix64(h ^ static_cast<uint64_t>(static_cast<unsigned char>(c)));
    }
    return h;
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(engine_() % span);
}

double Rng::gaussian(double mean, double stddev) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) {
        u1 = uniform01();
    }
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
}

} // namespace sdwban
