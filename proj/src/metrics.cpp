/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sdwban {

using nlohmann::json;

LatencyStats latency_stats(std::vector<double> samples) {
    LatencyStats stats;
    stats.count = samples.size();
    if (samples.empty()) {
        return stats;
    }
    std::sort(samples.begin(), samples.end());
    stats.mean_s =
        std::accumulate(samples.begin(), samples.end(), 0.0) / double(samples.size());
    auto nearest_rank = [&](double q) {
        size_t rank = static_cast<size_t>(std::ceil(q * double(samples.size())));
        rank = std::max<size_t>(1, std::min(rank, samples.size()));
        return samples[rank - 1];
    };
    stats.p50_s = nearest_rank(0.50);
    stats.p95_s = nearest_rank(0.95);
    stats.max_s = samples.back();
    return stats;
}

MetricsReport summarize(const std::vector<TraceRecord>& trace) {
    MetricsReport report;
    std::vector<double> latency_normal;
    std::vector<double> latency_emergency;
    bool saw_meta = false;
    bool saw_end = false;
    std::optional<json> run_summary;
    const TraceRecord* last = nullptr;

    // Per-packet tally for the conservation identity.
    struct PacketState {
        bool emergency{false};
        int terminals{0};
    };
    std::map<uint64_t, PacketState> packets;
    auto packet_state = [&](const json& f) -> PacketState& {
        uint64_t id = f.at("packet_id").get<uint64_t>();
        auto it = packets.find(id);
        if (it == packets.end()) {
            throw TraceError("trace references packet " + std::to_string(id) +
                             " before its sample_emitted record");
        }
        return it->second;
    };

    for (const auto& record : trace) {
        last = &record;
        const json& f = record.fields;
        if (record.event == "run_meta") {
            saw_meta = true;
            report.scenario = f.value("scenario", std::string{});
            report.seed = f.value("seed", uint64_t{0});
            report.duration_s = f.value("duration_s", 0.0);
        } else if (record.event == "sample_emitted") {
            bool emergency = f.at("class").get<std::string>() == "emergency";
            packets[f.at("packet_id").get<uint64_t>()] = PacketState{emergency, 0};
            (emergency ? report.emergency : report.normal).generated += 1;
        } else if (record.event == "cloud_arrival") {
            bool emergency = f.at("class").get<std::string>() == "emergency";
            (emergency ? report.emergency : report.normal).delivered += 1;
            (emergency ? latency_emergency : latency_normal)
                .push_back(f.at("latency_s").get<double>());
            packet_state(f).terminals += 1;
        } else if (record.event == "drop") {
            std::string reason = f.at("reason").get<std::string>();
            if (reason == "queue_overflow") {
                report.drops_queue_overflow += 1;
            } else if (reason == "miss_buffer_overflow") {
                report.drops_miss_buffer_overflow += 1;
            } else if (reason == "packet_in_timeout") {
                report.drops_packet_in_timeout += 1;
            } else if (reason == "dead_battery") {
                report.suppressed_dead_battery += 1;
            } else if (reason == "node_crash") {
                report.drops_node_crash += 1;
            } else {
                report.drops_no_route += 1; // no_route, routing_loop
            }
            packet_state(f).terminals += 1;
        } else if (record.event == "frame_loss") {
            if (f.at("kind").get<std::string>() == "data") {
                report.lost_on_link += 1;
                packet_state(f).terminals += 1;
            }
        } else if (record.event == "send_suppressed") {
            report.suppressed_sends += 1;
        } else if (record.event == "packet_in_sent") {
            report.packet_ins += 1;
        } else if (record.event == "flow_mod_sent") {
            report.flow_mods += 1;
        } else if (record.event == "emergency_broadcast") {
            report.broadcasts += 1;
        } else if (record.event == "heartbeat_sent") {
            report.heartbeats += 1;
        } else if (record.event == "handover_notice") {
            report.handovers += 1;
        } else if (record.event == "association_changed") {
            if (f.at("cause").get<std::string>() == "failover" && !f.at("to").is_null()) {
                report.failovers += 1;
            }
        } else if (record.event == "protocol_error") {
            report.protocol_errors += 1;
        } else if (record.event == "energy_final") {
            double consumed = f.at("consumed_j").get<double>();
            report.energy_consumed_j[record.node] = consumed;
            report.energy_total_j += consumed;
            if (f.at("dead").get<bool>()) {
                report.nodes_dead += 1;
            }
        } else if (record.event == "run_summary") {
            run_summary = f;
        } else if (record.event == "run_end") {
            saw_end = true;
        }
        // Control bytes: every control send event carries its size.
        if (f.is_object() && f.contains("bits") &&
            (record.event == "packet_in_sent" || record.event == "flow_mod_sent" ||
             record.event == "emergency_broadcast" || record.event == "heartbeat_sent" ||
             record.event == "handover_notice" || record.event == "hello_sent" ||
             record.event == "associate_sent" || record.event == "associate_ack_sent" ||
             record.event == "low_battery_sent")) {
            report.control_bytes += f.at("bits").get<uint64_t>() / 8;
        }
    }

    if (!saw_meta) {
        throw TraceError("trace has no run_meta record");
    }
    if (!saw_end) {
        std::string where = last == nullptr
                                ? "empty trace"
                                : "last valid record: t=" + std::to_string(last->t) + " seq=" +
                                      std::to_string(last->seq) + " event=" + last->event;
        throw TraceError("trace is truncated, no run_end record (" + where + ")");
    }

    // Residual packets are the generated ones with no terminal event; any
    // packet with two terminal events is an accounting bug.
    for (const auto& [id, state] : packets) {
        if (state.terminals > 1) {
            throw TraceError("packet " + std::to_string(id) + " has " +
                             std::to_string(state.terminals) + " terminal events");
        }
        if (state.terminals == 0) {
            report.residual_end += 1;
        }
    }

    if (report.normal.generated > 0) {
        report.normal.delivery_ratio =
            double(report.normal.delivered) / double(report.normal.generated);
    }
    if (report.emergency.generated > 0) {
        report.emergency.delivery_ratio =
            double(report.emergency.delivered) / double(report.emergency.generated);
    }
    report.normal.latency = latency_stats(std::move(latency_normal));
    report.emergency.latency = latency_stats(std::move(latency_emergency));

    // Conservation identity, recomputed from the trace alone.
    uint64_t generated = report.normal.generated + report.emergency.generated;
    uint64_t accounted = report.normal.delivered + report.emergency.delivered +
                         report.lost_on_link + report.drops_queue_overflow +
                         report.drops_miss_buffer_overflow + report.drops_no_route +
                         report.drops_packet_in_timeout + report.suppressed_dead_battery +
                         report.drops_node_crash + report.residual_end;
    if (generated != accounted) {
        throw TraceError("conservation violated in trace: generated " +
                         std::to_string(generated) + " != accounted " +
                         std::to_string(accounted));
    }

    // Cross-check against the engine's own tally.
    if (run_summary) {
        const json& s = *run_summary;
        auto expect = [&](const char* field, uint64_t have) {
            uint64_t want = s.at(field).get<uint64_t>();
            if (want != have) {
                throw TraceError(std::string("run_summary disagrees with trace on ") + field +
                                 ": " + std::to_string(want) + " vs " + std::to_string(have));
            }
        };
        expect("generated_normal", report.normal.generated);
        expect("generated_emergency", report.emergency.generated);
        expect("delivered_normal", report.normal.delivered);
        expect("delivered_emergency", report.emergency.delivered);
        expect("lost_on_link", report.lost_on_link);
        expect("packet_ins", report.packet_ins);
        expect("flow_mods", report.flow_mods);
        expect("broadcasts", report.broadcasts);
        expect("heartbeats", report.heartbeats);
        expect("handovers", report.handovers);
        expect("failovers", report.failovers);
        expect("residual_end", report.residual_end);
        expect("control_bytes", report.control_bytes);
    } else {
        throw TraceError("trace has no run_summary record");
    }

    return report;
}

namespace {

std::string fmt(double value) {
    std::ostringstream oss;
    oss.precision(9);
    oss << value;
    return oss.str();
}

void append_class_cells(std::ostringstream& row, const ClassMetrics& cls) {
    row << ',' << cls.generated << ',' << cls.delivered << ',';
    if (cls.delivery_ratio) {
        row << fmt(*cls.delivery_ratio);
    }
    row << ',';
    if (cls.latency.count > 0) {
        row << fmt(cls.latency.mean_s) << ',' << fmt(cls.latency.p50_s) << ','
            << fmt(cls.latency.p95_s) << ',' << fmt(cls.latency.max_s);
    } else {
        row << ",,,";
    }
}

} // namespace

std::string metrics_csv_header() {
    return "scenario,seed,duration_s"
           ",normal_generated,normal_delivered,normal_delivery_ratio"
           ",normal_latency_mean_s,normal_latency_p50_s,normal_latency_p95_s,normal_latency_max_s"
           ",emergency_generated,emergency_delivered,emergency_delivery_ratio"
           ",emergency_latency_mean_s,emergency_latency_p50_s,emergency_latency_p95_s,"
           "emergency_latency_max_s"
           ",packet_ins,flow_mods,broadcasts,heartbeats,control_bytes"
           ",energy_total_j,nodes_dead,handovers,failovers"
           ",drops_queue_overflow,drops_miss_buffer_overflow,drops_no_route,"
           "drops_packet_in_timeout,suppressed_dead_battery,drops_node_crash"
           ",lost_on_link,suppressed_sends,residual_end,protocol_errors";
}

std::string metrics_csv_row(const MetricsReport& report) {
    std::ostringstream row;
    row << report.scenario << ',' << report.seed << ',' << fmt(report.duration_s);
    append_class_cells(row, report.normal);
    append_class_cells(row, report.emergency);
    row << ',' << report.packet_ins << ',' << report.flow_mods << ',' << report.broadcasts << ','
        << report.heartbeats << ',' << report.control_bytes;
    row << ',' << fmt(report.energy_total_j) << ',' << report.nodes_dead << ','
        << report.handovers << ',' << report.failovers;
    row << ',' << report.drops_queue_overflow << ',' << report.drops_miss_buffer_overflow << ','
        << report.drops_no_route << ',' << report.drops_packet_in_timeout << ','
        << report.suppressed_dead_battery << ',' << report.drops_node_crash;
    row << ',' << report.lost_on_link << ',' << report.suppressed_sends << ','
        << report.residual_end << ',' << report.protocol_errors;
    return row.str();
}

namespace {

void render_class(std::ostringstream& out, const char* name, const ClassMetrics& cls) {
    if (cls.generated == 0) {
        return; // zero generated: the section is absent, not zeroed
    }
    out << name << " traffic:\n";
    out << "  generated:       " << cls.generated << "\n";
    out << "  delivered:       " << cls.delivered << "\n";
    out << "  delivery ratio:  " << fmt(*cls.delivery_ratio) << "\n";
    if (cls.latency.count > 0) {
        out << "  latency mean:    " << fmt(cls.latency.mean_s) << " s\n";
        out << "  latency p50:     " << fmt(cls.latency.p50_s) << " s\n";
        out << "  latency p95:     " << fmt(cls.latency.p95_s) << " s\n";
        out << "  latency max:     " << fmt(cls.latency.max_s) << " s\n";
    }
    out << "\n";
}

} // namespace

std::string render_report(const MetricsReport& report) {
    std::ostringstream out;
    out << "scenario " << report.scenario << " (seed " << report.seed << ", "
        << fmt(report.duration_s) << " s)\n\n";
    render_class(out, "normal", report.normal);
    render_class(out, "emergency", report.emergency);
    out << "control plane:\n";
    out << "  packet-ins:      " << report.packet_ins << "\n";
    out << "  flow-mods:       " << report.flow_mods << "\n";
    out << "  broadcasts:      " << report.broadcasts << "\n";
    out << "  heartbeats:      " << report.heartbeats << "\n";
    out << "  control bytes:   " << report.control_bytes << "\n\n";
    out << "energy:\n";
    out << "  total consumed:  " << fmt(report.energy_total_j) << " J\n";
    out << "  nodes dead:      " << report.nodes_dead << "\n";
    for (const auto& [node, joules] : report.energy_consumed_j) {
        out << "    " << node << ": " << fmt(joules) << " J\n";
    }
    out << "\n";
    out << "events:\n";
    out << "  handovers:       " << report.handovers << "\n";
    out << "  failovers:       " << report.failovers << "\n";
    out << "  drops: queue_overflow=" << report.drops_queue_overflow
        << " miss_buffer_overflow=" << report.drops_miss_buffer_overflow
        << " no_route=" << report.drops_no_route
        << " packet_in_timeout=" << report.drops_packet_in_timeout
        << " dead_battery=" << report.suppressed_dead_battery
        << " node_crash=" << report.drops_node_crash << "\n";
    out << "  lost on link:    " << report.lost_on_link << "\n";
    out << "  suppressed sends:" << report.suppressed_sends << "\n";
    out << "  residual at end: " << report.residual_end << "\n";
    out << "  protocol errors: " << report.protocol_errors << "\n";
    return out.str();
}

} // namespace sdwban
