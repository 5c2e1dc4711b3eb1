#include "blinktrack/errors.hpp"
#include "blinktrack/trace_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace blinktrack;

namespace {

GeneratedScenario sample() {
  auto sc = standard_suite(7, 1, 40.0).front();
  return generate(sc);
}

std::string trace_text(const Trace& t) {
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

void expect_equal(const Frame& a, const Frame& b) {
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.pose.pitch, b.pose.pitch);
  EXPECT_EQ(a.pose.yaw, b.pose.yaw);
  EXPECT_EQ(a.detections, b.detections);
}

}  // namespace

TEST(TraceIo, RoundTripIsLossless) {
  const auto g = sample();
  std::stringstream ts(trace_text(g.trace));
  const auto trace = read_trace(ts);
  EXPECT_EQ(trace.header, g.trace.header);
  ASSERT_EQ(trace.frames.size(), g.trace.frames.size());
  for (std::size_t i = 0; i < trace.frames.size(); ++i) expect_equal(trace.frames[i], g.trace.frames[i]);

  std::stringstream us;
  write_truth(us, g.truth);
  const auto truth = read_truth(us);
  EXPECT_EQ(truth.header, g.truth.header);
  ASSERT_EQ(truth.ticks.size(), g.truth.ticks.size());
  for (std::size_t i = 0; i < truth.ticks.size(); ++i) {
    const auto& a = truth.ticks[i];
    const auto& b = g.truth.ticks[i];
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.true_pose.pitch, b.true_pose.pitch);
    EXPECT_EQ(a.true_pose.yaw, b.true_pose.yaw);
    ASSERT_EQ(a.objects.size(), b.objects.size());
    for (std::size_t j = 0; j < a.objects.size(); ++j) {
      EXPECT_EQ(a.objects[j].id, b.objects[j].id);
      EXPECT_EQ(a.objects[j].cls, b.objects[j].cls);
      EXPECT_EQ(a.objects[j].x, b.objects[j].x);
      EXPECT_EQ(a.objects[j].z, b.objects[j].z);
      EXPECT_EQ(a.objects[j].vx, b.objects[j].vx);
      EXPECT_EQ(a.objects[j].vz, b.objects[j].vz);
      EXPECT_EQ(a.objects[j].height, b.objects[j].height);
    }
  }
  EXPECT_EQ(trace_text(trace), trace_text(g.trace));
}

TEST(TraceIo, TruncatedFileReportsFailingLine) {
  const auto text = trace_text(sample().trace);
  // Keep the header and the first four frames.
  std::size_t pos = 0;
  for (int i = 0; i < 5; ++i) pos = text.find('\n', pos) + 1;
  std::stringstream in(text.substr(0, pos));
  try {
    read_trace(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }

  // A line cut in the middle is malformed JSON on that line.
  std::stringstream cut(text.substr(0, pos + 10));
  try {
    read_trace(cut);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
}

TEST(TraceIo, MissingIntrinsicsFieldIsNamed) {
  auto text = trace_text(sample().trace);
  const auto at = text.find("\"fy\":");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 4, "\"gy\"");
  std::stringstream in(text);
  try {
    read_trace(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("fy"), std::string::npos) << e.what();
  }

  auto no_intr = trace_text(sample().trace);
  const auto key = no_intr.find("\"intrinsics\"");
  no_intr.replace(key, 12, "\"intrinsicz\"");
  std::stringstream in2(no_intr);
  try {
    read_trace(in2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("intrinsics"), std::string::npos) << e.what();
  }
}

TEST(TraceIo, VersionMismatch) {
  auto text = trace_text(sample().trace);
  const auto at = text.find("\"version\":1");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 11, "\"version\":2");
  std::stringstream in(text);
  EXPECT_THROW(read_trace(in), VersionMismatch);
}

TEST(TraceIo, WrongFormatTagAndMissingFile) {
  std::stringstream truth;
  write_truth(truth, sample().truth);
  EXPECT_THROW(read_trace(truth), ParseError);
  EXPECT_THROW(read_trace_file("/nonexistent/x.trace.jsonl"), IoError);
  std::stringstream empty;
  EXPECT_THROW(read_trace(empty), ParseError);
}
