/*
 * Copyright (c) 2026 sdwban-sim contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef SDWBAN_TRACE_HPP
#define SDWBAN_TRACE_HPP

#include "sdwban/core.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>

namespace sdwban {

// One simulation trace record. Serialized as one JSON object per line with a
// fixed field order {t, seq, node, event, fields} so byte-level comparison of
// trace files is a meaningful determinism check.
struct TraceRecord {
    SimTime t{0.0};
    uint64_t seq{0};
    std::string node;
    std::string event;
    nlohmann::json fields = nlohmann::json::object();

    std::string to_line() const;
    static TraceRecord from_line(const std::string& line, size_t line_no);
};

// Sink for records: in-memory (tests, sweeps) and/or a .jsonl file.
class TraceWriter {
public:
    TraceWriter() = default;

    void open_file(const std::string& path);
    void keep_in_memory(bool keep) { keep_in_memory_ = keep; }

    void write(const TraceRecord& record);
    void close();

    const std::vector<TraceRecord>& records() const { return records_; }

private:
    std::ofstream file_;
    bool file_open_{false};
    bool keep_in_memory_{false};
    std::vector<TraceRecord> records_;
};

// Streams records out of a trace file; throws TraceError on malformed lines.
std::vector<TraceRecord> read_trace_file(const std::string& path);
void for_each_trace_line(std::istream& in,
                         const std::function<void(const TraceRecord&)>& fn);

} // namespace sdwban

#endif // SDWBAN_TRACE_HPP
