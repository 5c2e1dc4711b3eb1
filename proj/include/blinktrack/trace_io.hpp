#pragma once

#include "blinktrack/scenario.hpp"

#include <iosfwd>
#include <string>

namespace blinktrack {

// Line-delimited JSON. The first line is a header record carrying the
// format tag, version, intrinsics, camera height, tick rate, seed and the
// record count; each following line is one frame (trace) or one
// ground-truth tick (truth). Doubles are written in shortest round-trip
// form, so write/read is lossless.
inline constexpr int kTraceVersion = 1;

void write_trace(std::ostream& out, const Trace& trace);
Trace read_trace(std::istream& in);

void write_truth(std::ostream& out, const Truth& truth);
Truth read_truth(std::istream& in);

void write_trace_file(const std::string& path, const Trace& trace);
Trace read_trace_file(const std::string& path);
void write_truth_file(const std::string& path, const Truth& truth);
Truth read_truth_file(const std::string& path);

}  // namespace blinktrack
