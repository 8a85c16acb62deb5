/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/cli.hpp"

#include "sdwban/engine.hpp"
#include "sdwban/log.hpp"
#include "sdwban/metrics.hpp"
#include "sdwban/scenario.hpp"
#include "sdwban/trace.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace sdwban {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::in | std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read '" + path + "'");
    }
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::out | std::ios::trunc | std::ios::binary);
        if (!out) {
            throw ConfigError("cannot write '" + tmp.string() + "'");
        }
        out << content;
    }
    fs::rename(tmp, path);
}

json load_scenario_doc(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError("'" + path + "' is not valid JSON");
    }
    for (const auto& assignment : overrides) {
        apply_override(doc, assignment);
    }
    return doc;
}

// Runs one scenario into out_dir/{trace.jsonl, metrics.csv, report.txt}.
MetricsReport run_one(const json& doc, const fs::path& out_dir) {
    Scenario sc = parse_scenario_json(doc);
    LOG_INFO("running " << sc.name << " (seed " << sc.seed << ") into " << out_dir.string());
    fs::create_directories(out_dir);
    fs::path trace_path = out_dir / "trace.jsonl";
    fs::path trace_tmp = trace_path;
    trace_tmp += ".tmp";

    TraceWriter writer;
    writer.open_file(trace_tmp.string());
    writer.keep_in_memory(true);
    Engine engine(sc, &writer);
    engine.run();
    writer.close();
    fs::rename(trace_tmp, trace_path);

    MetricsReport report = summarize(writer.records());
    write_file_atomic(out_dir / "metrics.csv",
                      metrics_csv_header() + "\n" + metrics_csv_row(report) + "\n");
    write_file_atomic(out_dir / "report.txt", render_report(report));
    return report;
}

std::vector<uint64_t> parse_seed_range(const std::string& spec) {
    std::vector<uint64_t> seeds;
    auto dots = spec.find("..");
    try {
        if (dots == std::string::npos) {
            seeds.push_back(std::stoull(spec));
        } else {
            uint64_t lo = std::stoull(spec.substr(0, dots));
            uint64_t hi = std::stoull(spec.substr(dots + 2));
            if (hi < lo) {
                throw ConfigError("--seeds range '" + spec + "' is reversed");
            }
            for (uint64_t s = lo; s <= hi; ++s) {
                seeds.push_back(s);
            }
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("--seeds '" + spec + "' must be N or A..B");
    } catch (const std::out_of_range&) {
        throw ConfigError("--seeds '" + spec + "' is out of range");
    }
    return seeds;
}

int cmd_run(const std::string& scenario_path, std::optional<int64_t> seed,
            const std::string& out_dir, const std::vector<std::string>& overrides) {
    json doc = load_scenario_doc(scenario_path, overrides);
    if (seed) {
        doc["seed"] = *seed;
    }
    MetricsReport report = run_one(doc, out_dir);
    std::cout << render_report(report);
    std::cout << "wrote " << (fs::path(out_dir) / "trace.jsonl").string() << ", metrics.csv, report.txt\n";
    return 0;
}

int cmd_validate(const std::string& scenario_path, const std::vector<std::string>& overrides) {
    json doc = load_scenario_doc(scenario_path, overrides);
    Scenario sc = parse_scenario_json(doc);
    std::cout << "ok: " << sc.name << " (" << sc.n_patients() << " patients, "
              << sc.j_controllers() << " local controllers, " << sc.relays.size()
              << " relays, duration " << sc.duration_s << " s)\n";
    return 0;
}

int cmd_summarize(const std::string& trace_path, const std::string& out_dir) {
    auto records = read_trace_file(trace_path);
    MetricsReport report = summarize(records);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file_atomic(fs::path(out_dir) / "metrics.csv",
                          metrics_csv_header() + "\n" + metrics_csv_row(report) + "\n");
        write_file_atomic(fs::path(out_dir) / "report.txt", render_report(report));
    }
    std::cout << render_report(report);
    return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& seeds_spec,
              const std::string& out_dir, const std::vector<std::string>& overrides,
              unsigned jobs) {
    json base = load_scenario_doc(scenario_path, overrides);
    std::vector<uint64_t> seeds = parse_seed_range(seeds_spec);
    fs::create_directories(out_dir);

    std::vector<std::string> rows(seeds.size());
    std::vector<std::string> errors(seeds.size());
    std::mutex next_mutex;
    size_t next = 0;

    auto worker = [&]() {
        while (true) {
            size_t i;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= seeds.size()) return;
                i = next++;
            }
            try {
                json doc = base;
                doc["seed"] = seeds[i];
                fs::path run_dir = fs::path(out_dir) / ("seed_" + std::to_string(seeds[i]));
                MetricsReport report = run_one(doc, run_dir);
                rows[i] = metrics_csv_row(report);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };

    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    for (size_t i = 0; i < seeds.size(); ++i) {
        if (!errors[i].empty()) {
            std::cerr << "seed " << seeds[i] << " failed: " << errors[i] << "\n";
            return 1;
        }
    }
    std::ostringstream combined;
    combined << metrics_csv_header() << "\n";
    for (const auto& row : rows) {
        combined << row << "\n";
    }
    write_file_atomic(fs::path(out_dir) / "sweep.csv", combined.str());
    std::cout << "wrote " << (fs::path(out_dir) / "sweep.csv").string() << " (" << seeds.size()
              << " runs)\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"SDWBAN discrete-event simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string trace_path;
    std::string out_dir = "out";
    std::string seeds_spec = "1";
    std::vector<std::string> overrides;
    std::optional<int64_t> seed;
    unsigned jobs = 1;

    auto* run = app.add_subcommand("run", "execute a scenario and write outputs");
    run->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_option("--override", overrides, "dotted-path override, e.g. links.data.loss_prob=0.1");

    auto* validate = app.add_subcommand("validate", "parse and validate a scenario");
    validate->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    validate->add_option("--override", overrides, "dotted-path override");

    auto* summarize_cmd = app.add_subcommand("summarize", "recompute metrics from a trace");
    summarize_cmd->add_option("--trace", trace_path, "trace.jsonl produced by run")->required();
    std::string summarize_out;
    summarize_cmd->add_option("--out", summarize_out, "also write metrics.csv and report.txt here");

    auto* sweep = app.add_subcommand("sweep", "run a scenario across a seed range");
    sweep->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    sweep->add_option("--seeds", seeds_spec, "seed or range, e.g. 7 or 1..30")->required();
    sweep->add_option("--out", out_dir, "output directory (default: out)");
    sweep->add_option("--override", overrides, "dotted-path override applied to every run");
    sweep->add_option("--jobs", jobs, "parallel runs (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            return cmd_run(scenario_path, seed, out_dir, overrides);
        }
        if (validate->parsed()) {
            return cmd_validate(scenario_path, overrides);
        }
        if (summarize_cmd->parsed()) {
            return cmd_summarize(trace_path, summarize_out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(scenario_path, seeds_spec, out_dir, overrides, jobs);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace sdwban
