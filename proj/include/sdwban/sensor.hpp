/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_SENSOR_HPP
#define SDWBAN_SENSOR_HPP

#include "sdwban/core.hpp"
#include "sdwban/rng.hpp"

namespace sdwban {

struct AnomalyEpisode {
    double start_s{0.0};
    double end_s{0.0}; // half-open [start_s, end_s)
    double value{0.0};

    bool operator==(const AnomalyEpisode&) const = default;
};

// Static description of one body sensor (from the scenario).
struct SensorModel {
    NodeId id;
    NodeId parent_switch;
    AppKind app{AppKind::HeartRate};
    double period_s{1.0};
    double phase_s{0.0};
    double baseline{0.0};
    double jitter_stddev{0.0};
    double clamp_low{0.0};
    double clamp_high{0.0};
    std::vector<AnomalyEpisode> anomalies;
    double battery_j{1000.0};
    double tx_cost_j{0.001};
    double sample_cost_j{0.0001};
    double low_battery_fraction{0.1};
};

enum class EnergySpend {
    Transmit,
    Sample,
};

// Battery with a one-shot low-battery latch; switches and relays use the
// same model as sensors.
class Battery {
public:
    Battery() = default;
    Battery(double initial_j, double tx_cost_j, double sample_cost_j, double low_fraction)
        : initial_j_(initial_j),
          remaining_j_(initial_j),
          tx_cost_j_(tx_cost_j),
          sample_cost_j_(sample_cost_j),
          low_fraction_(low_fraction) {}

    struct SpendResult {
        bool spent{false};          // false: already dead, the send is suppressed
        bool low_battery_now{false}; // first crossing below the low-battery mark
        bool died_now{false};        // first arrival at zero
    };

    SpendResult spend(EnergySpend kind);

    // Scripted battery drop (fault plans). Fires the same latches.
    SpendResult set_remaining(double joules);

    bool dead() const { return remaining_j_ <= 0.0; }
    double remaining_j() const { return remaining_j_; }
    double consumed_j() const { return initial_j_ - remaining_j_; }
    double initial_j() const { return initial_j_; }

private:
    SpendResult apply_level(double next);

    double initial_j_{1000.0};
    double remaining_j_{1000.0};
    double tx_cost_j_{0.001};
    double sample_cost_j_{0.0001};
    double low_fraction_{0.1};
    bool low_latched_{false};
};

// Runtime state of one sensor: its battery plus a private random stream.
class SensorRuntime {
public:
    SensorRuntime() = default;
    SensorRuntime(SensorModel model, uint64_t master_seed);

    const SensorModel& model() const { return model_; }
    Battery& battery() { return battery_; }
    const Battery& battery() const { return battery_; }

    // Scheduled sample instants are phase + k*period for k = 0,1,...
    double sample_time(uint64_t k) const { return model_.phase_s + double(k) * model_.period_s; }

    // Scripted anomaly value inside an episode, otherwise baseline plus
    // gaussian jitter from this sensor's own stream, clamped to plausible
    // bounds. One gaussian draw per call, episode or not, so scenario edits
    // to episodes never shift the stream.
    PhysiologicalReading next_reading(SimTime now);

private:
    SensorModel model_;
    Rng rng_;
    Battery battery_;
};

} // namespace sdwban

#endif // SDWBAN_SENSOR_HPP
