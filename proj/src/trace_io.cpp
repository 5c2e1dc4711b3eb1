#include "blinktrack/trace_io.hpp"

#include "blinktrack/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>

namespace blinktrack {

namespace {

using nlohmann::json;

constexpr const char* kTraceFormat = "blinktrack-trace";
constexpr const char* kTruthFormat = "blinktrack-truth";

json header_to_json(const TraceHeader& h, const char* format) {
  return json{{"format", format},
              {"version", h.version},
              {"scenario", h.scenario},
              {"seed", h.seed},
              {"tick_rate", h.tick_rate},
              {"duration", h.duration},
              {"camera_height", h.camera_height},
              {"intrinsics",
               {{"fx", h.intr.fx},
                {"fy", h.intr.fy},
                {"cx", h.intr.cx},
                {"cy", h.intr.cy},
                {"width", h.intr.width},
                {"height", h.intr.height}}},
              {"records", h.frame_count}};
}

const json& field(const json& obj, const char* name, std::size_t line, const std::string& context) {
  if (!obj.is_object()) throw ParseError(line, context + ": expected an object");
  const auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(line, context + ": missing field '" + name + "'");
  return *it;
}

template <typename T>
T get(const json& obj, const char* name, std::size_t line, const std::string& context) {
  const auto& v = field(obj, name, line, context);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ParseError(line, context + ": field '" + name + "' has the wrong type");
  }
}

json parse_line(std::istream& in, std::size_t line, bool& eof) {
  std::string text;
  if (!std::getline(in, text)) {
    eof = true;
    return {};
  }
  eof = false;
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed record: ") + e.what());
  }
}

TraceHeader read_header(std::istream& in, const char* format) {
  bool eof = false;
  const json h = parse_line(in, 1, eof);
  if (eof) throw ParseError(1, "empty file");
  const std::string ctx = "header";
  if (get<std::string>(h, "format", 1, ctx) != format) {
    throw ParseError(1, std::string("header: expected format '") + format + "'");
  }
  TraceHeader header;
  header.version = get<int>(h, "version", 1, ctx);
  if (header.version != kTraceVersion) {
    throw VersionMismatch("file version " + std::to_string(header.version) + ", expected " +
                          std::to_string(kTraceVersion));
  }
  header.scenario = get<std::string>(h, "scenario", 1, ctx);
  header.seed = get<std::uint64_t>(h, "seed", 1, ctx);
  header.tick_rate = get<double>(h, "tick_rate", 1, ctx);
  header.duration = get<double>(h, "duration", 1, ctx);
  header.camera_height = get<double>(h, "camera_height", 1, ctx);
  const auto& intr = field(h, "intrinsics", 1, ctx);
  const std::string ictx = "header.intrinsics";
  header.intr.fx = get<double>(intr, "fx", 1, ictx);
  header.intr.fy = get<double>(intr, "fy", 1, ictx);
  header.intr.cx = get<double>(intr, "cx", 1, ictx);
  header.intr.cy = get<double>(intr, "cy", 1, ictx);
  header.intr.width = get<int>(intr, "width", 1, ictx);
  header.intr.height = get<int>(intr, "height", 1, ictx);
  header.frame_count = get<std::size_t>(h, "records", 1, ctx);
  return header;
}

template <typename Fn>
void read_records(std::istream& in, std::size_t count, Fn&& on_record) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t line = i + 2;
    bool eof = false;
    const json rec = parse_line(in, line, eof);
    if (eof) {
      throw ParseError(line, "truncated: expected " + std::to_string(count) + " records, found " +
                                 std::to_string(i));
    }
    on_record(rec, line);
  }
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  TraceHeader header = trace.header;
  header.frame_count = trace.frames.size();
  out << header_to_json(header, kTraceFormat).dump() << '\n';
  for (const auto& f : trace.frames) {
    json dets = json::array();
    for (const auto& d : f.detections) {
      dets.push_back(json::array({d.x, d.y, d.w, d.h, std::string(to_string(d.cls)), d.score}));
    }
    out << json{{"t", f.t}, {"pitch", f.pose.pitch}, {"yaw", f.pose.yaw}, {"detections", std::move(dets)}}.dump()
        << '\n';
  }
}

Trace read_trace(std::istream& in) {
  Trace trace;
  trace.header = read_header(in, kTraceFormat);
  trace.frames.reserve(trace.header.frame_count);
  read_records(in, trace.header.frame_count, [&](const json& rec, std::size_t line) {
    const std::string ctx = "frame";
    Frame f;
    f.t = get<double>(rec, "t", line, ctx);
    f.pose.pitch = get<double>(rec, "pitch", line, ctx);
    f.pose.yaw = get<double>(rec, "yaw", line, ctx);
    for (const auto& d : field(rec, "detections", line, ctx)) {
      if (!d.is_array() || d.size() != 6) throw ParseError(line, "frame: detection must be [x,y,w,h,class,score]");
      try {
        f.detections.push_back({d[0].get<double>(), d[1].get<double>(), d[2].get<double>(), d[3].get<double>(),
                                object_class_from_string(d[4].get<std::string>()), d[5].get<double>()});
      } catch (const json::exception&) {
        throw ParseError(line, "frame: detection has the wrong field types");
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, std::string("frame: ") + e.what());
      }
    }
    if (!trace.frames.empty() && !(f.t > trace.frames.back().t)) {
      throw ParseError(line, "frame: timestamps must be strictly increasing");
    }
    trace.frames.push_back(std::move(f));
  });
  return trace;
}

void write_truth(std::ostream& out, const Truth& truth) {
  TraceHeader header = truth.header;
  header.frame_count = truth.ticks.size();
  out << header_to_json(header, kTruthFormat).dump() << '\n';
  for (const auto& tick : truth.ticks) {
    json objs = json::array();
    for (const auto& o : tick.objects) {
      objs.push_back(json::array({o.id, std::string(to_string(o.cls)), o.x, o.z, o.vx, o.vz, o.height}));
    }
    out << json{{"t", tick.t}, {"pitch", tick.true_pose.pitch}, {"yaw", tick.true_pose.yaw}, {"objects", std::move(objs)}}
               .dump()
        << '\n';
  }
}

Truth read_truth(std::istream& in) {
  Truth truth;
  truth.header = read_header(in, kTruthFormat);
  truth.ticks.reserve(truth.header.frame_count);
  read_records(in, truth.header.frame_count, [&](const json& rec, std::size_t line) {
    const std::string ctx = "truth";
    GroundTruthTick tick;
    tick.t = get<double>(rec, "t", line, ctx);
    tick.true_pose.pitch = get<double>(rec, "pitch", line, ctx);
    tick.true_pose.yaw = get<double>(rec, "yaw", line, ctx);
    for (const auto& o : field(rec, "objects", line, ctx)) {
      if (!o.is_array() || o.size() != 7) throw ParseError(line, "truth: object must be [id,class,x,z,vx,vz,height]");
      try {
        tick.objects.push_back({o[0].get<int>(), object_class_from_string(o[1].get<std::string>()), o[2].get<double>(),
                                o[3].get<double>(), o[4].get<double>(), o[5].get<double>(), o[6].get<double>()});
      } catch (const json::exception&) {
        throw ParseError(line, "truth: object has the wrong field types");
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, std::string("truth: ") + e.what());
      }
    }
    truth.ticks.push_back(std::move(tick));
  });
  return truth;
}

void write_trace_file(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_trace(out, trace);
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read_trace(in);
}

void write_truth_file(const std::string& path, const Truth& truth) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_truth(out, truth);
}

Truth read_truth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read_truth(in);
}

}  // namespace blinktrack
