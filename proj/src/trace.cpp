/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "sdwban/trace.hpp"

namespace sdwban {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string TraceRecord::to_line() const {
    ordered_json j;
    j["t"] = t;
    j["seq"] = seq;
    j["node"] = node;
    j["event"] = event;
    j["fields"] = fields;
    return j.dump();
}

TraceRecord TraceRecord::from_line(const std::string& line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw TraceError("trace line " + std::to_string(line_no) + " is not a JSON object");
    }
    TraceRecord record;
    try {
        record.t = j.at("t").get<double>();
        record.seq = j.at("seq").get<uint64_t>();
        record.node = j.at("node").get<std::string>();
        record.event = j.at("event").get<std::string>();
        record.fields = j.at("fields");
    } catch (const json::exception& e) {
        throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    return record;
}

void TraceWriter::open_file(const std::string& path) {
    file_.open(path, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!file_) {
        throw ConfigError("cannot open trace file '" + path + "' for writing");
    }
    file_open_ = true;
}

void TraceWriter::write(const TraceRecord& record) {
    if (file_open_) {
        file_ << record.to_line() << '\n';
    }
    if (keep_in_memory_) {
        records_.push_back(record);
    }
}

void TraceWriter::close() {
    if (file_open_) {
        file_.close();
        file_open_ = false;
    }
}

void for_each_trace_line(std::istream& in,
                         const std::function<void(const TraceRecord&)>& fn) {
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        fn(TraceRecord::from_line(line, line_no));
    }
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::in | std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open trace file '" + path + "'");
    }
    std::vector<TraceRecord> records;
    for_each_trace_line(in, [&](const TraceRecord& r) { records.push_back(r); });
    return records;
}

} // namespace sdwban
