#pragma once

// Scenario files (JSON) and trace files (CSV).

#include "resnav/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace resnav::io
{

/// Malformed scenario or trace file. The message starts with the key path
/// (or the line number for syntax and trace errors).
class ConfigError : public Error
{
  public:
    using Error::Error;
};

/// Parses and validates a scenario document. Unknown keys at any level are
/// rejected. Angles are given in degrees (keys ending in `_deg`).
sim::Scenario parse_scenario(std::string_view json_text, std::string name = "scenario");

sim::Scenario load_scenario(const std::filesystem::path &path);

inline constexpr std::string_view kTraceHeader = "t,true_x,true_y,true_yaw,est_x,est_y,est_yaw,z1_x,z1_y,z2_x,z2_y,"
                                                 "delta1,delta2,gate,status,mode,steer,d_w,path_offset";

void write_trace_csv(std::ostream &os, const std::vector<sim::TraceRecord> &trace);
std::string trace_to_csv(const std::vector<sim::TraceRecord> &trace);
std::vector<sim::TraceRecord> read_trace_csv(std::istream &is);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

} // namespace resnav::io
