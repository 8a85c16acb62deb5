/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/sensor.hpp"

#include <algorithm>

namespace sdwban {

Battery::SpendResult Battery::apply_level(double next) {
    SpendResult result;
    result.spent = true;
    double before = remaining_j_;
    remaining_j_ = std::max(0.0, next);
    if (!low_latched_ && remaining_j_ < low_fraction_ * initial_j_) {
        low_latched_ = true;
        result.low_battery_now = true;
    }
    if (before > 0.0 && remaining_j_ <= 0.0) {
        result.died_now = true;
    }
    return result;
}

Battery::SpendResult Battery::spend(EnergySpend kind) {
    if (dead()) {
        return SpendResult{}; // spent == false
    }
    double cost = kind == EnergySpend::Transmit ? tx_cost_j_ : sample_cost_j_;
    return apply_level(remaining_j_ - cost);
}

Battery::SpendResult Battery::set_remaining(double joules) {
    if (dead()) {
        return SpendResult{};
    }
    return apply_level(joules);
}

SensorRuntime::SensorRuntime(SensorModel model, uint64_t master_seed)
    : model_(std::move(model)),
      rng_(Rng::derive_seed(master_seed, "sensor/" + to_string(model_.id))),
      battery_(model_.battery_j, model_.tx_cost_j, model_.sample_cost_j,
               model_.low_battery_fraction) {}

PhysiologicalReading SensorRuntime::next_reading(SimTime now) {
    double jittered = rng_.gaussian(model_.baseline, model_.jitter_stddev);
    double value = jittered;
    for (const auto& episode : model_.anomalies) {
        if (now >= episode.start_s && now < episode.end_s) {
            value = episode.value;
            break;
        }
    }
    value = std::clamp(value, model_.clamp_low, model_.clamp_high);
    return PhysiologicalReading{model_.app, value, now};
}

} // namespace sdwban
