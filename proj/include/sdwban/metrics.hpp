/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_METRICS_HPP
#define SDWBAN_METRICS_HPP

#include "sdwban/core.hpp"
#include "sdwban/trace.hpp"

#include <iosfwd>

namespace sdwban {

// Latency statistics over delivered packets of one class. Percentiles use the
// nearest-rank method on the sorted sample (p50 of n samples is element
// ceil(0.50 * n), 1-based).
struct LatencyStats {
    uint64_t count{0};
    double mean_s{0.0};
    double p50_s{0.0};
    double p95_s{0.0};
    double max_s{0.0};
};

struct ClassMetrics {
    uint64_t generated{0};
    uint64_t delivered{0};
    // absent when generated == 0 (0/0 is reported as missing, not 0 or 1)
    std::optional<double> delivery_ratio;
    LatencyStats latency;
};

struct MetricsReport {
    std::string scenario;
    uint64_t seed{0};
    double duration_s{0.0};

    ClassMetrics normal;
    ClassMetrics emergency;

    uint64_t packet_ins{0};
    uint64_t flow_mods{0};
    uint64_t broadcasts{0};
    uint64_t heartbeats{0};
    uint64_t control_bytes{0};

    std::map<std::string, double> energy_consumed_j; // per node
    double energy_total_j{0.0};
    uint64_t nodes_dead{0};

    uint64_t handovers{0};
    uint64_t failovers{0};

    uint64_t drops_queue_overflow{0};
    uint64_t drops_miss_buffer_overflow{0};
    uint64_t drops_no_route{0};
    uint64_t drops_packet_in_timeout{0};
    uint64_t suppressed_dead_battery{0}; // generated packets killed by a dead sender
    uint64_t drops_node_crash{0};
    uint64_t lost_on_link{0};
    uint64_t suppressed_sends{0};
    uint64_t residual_end{0};
    uint64_t protocol_errors{0};
};

// Derives the report from trace records. Pure: identical traces give
// identical reports. Verifies the per-run conservation identity and the
// engine's own run_summary record against the trace-derived tallies; a
// mismatch or a truncated trace (no run_end) throws TraceError.
MetricsReport summarize(const std::vector<TraceRecord>& trace);

// Stable flat CSV with one header row; column order is part of the format.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);

// Human-readable rendering.
std::string render_report(const MetricsReport& report);

LatencyStats latency_stats(std::vector<double> samples);

} // namespace sdwban

#endif // SDWBAN_METRICS_HPP
