#pragma once

// Command implementations behind the `resnav` executable. Each returns the
// process exit code; stdout carries only the machine-readable result.

#include "resnav/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace resnav::cli
{

struct RunSummary
{
    std::string scenario;
    bool completed = false;
    bool off_track = false;
    double time_in_emergency_s = 0.0;
    std::optional<double> max_delta_m;              // no measurement distances recorded
    std::optional<double> min_obstacle_clearance_m; // no obstacles
    double max_abs_lateral_offset_m = 0.0;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

/// Recomputes the summary from a trace. Obstacle clearance is measured from
/// the vehicle body (center distance minus radius minus vehicle half-width).
RunSummary summarize(const sim::Scenario &sc, const sim::Track &track, const sim::ScenarioResult &res);

int cmd_run(const std::filesystem::path &scenario, const std::filesystem::path &out,
            std::optional<std::uint64_t> seed, std::ostream &out_stream, std::ostream &err_stream);

int cmd_validate(const std::filesystem::path &scenario, std::ostream &out_stream, std::ostream &err_stream);

int cmd_acceptance(std::ostream &out_stream);

} // namespace resnav::cli
