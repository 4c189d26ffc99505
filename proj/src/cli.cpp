#include "resnav/cli.hpp"

#include "resnav/acceptance.hpp"
#include "resnav/scenario_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace resnav::cli
{

std::string RunSummary::to_json() const
{
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["completed"] = completed;
    j["off_track"] = off_track;
    j["time_in_emergency_s"] = time_in_emergency_s;
    j["max_delta_m"] = max_delta_m ? nlohmann::ordered_json(*max_delta_m) : nlohmann::ordered_json(nullptr);
    j["min_obstacle_clearance_m"] =
        min_obstacle_clearance_m ? nlohmann::ordered_json(*min_obstacle_clearance_m) : nlohmann::ordered_json(nullptr);
    j["max_abs_lateral_offset_m"] = max_abs_lateral_offset_m;
    j["seed"] = seed;
    return j.dump();
}

RunSummary summarize(const sim::Scenario &sc, const sim::Track &track, const sim::ScenarioResult &res)
{
    RunSummary s;
    s.scenario = sc.name;
    s.seed = sc.seed;
    s.off_track = res.off_track;
    const auto ticks = static_cast<std::size_t>(std::llround(sc.duration * sc.rates.tick_hz));
    s.completed = !res.off_track && res.trace.size() == ticks;
    const double dt = 1.0 / sc.rates.tick_hz;
    for (const auto &rec : res.trace)
    {
        if (rec.status == fusion::NavLevel::Emergency)
            s.time_in_emergency_s += dt;
        for (const auto &d : rec.delta)
            if (d)
                s.max_delta_m = std::max(s.max_delta_m.value_or(0.0), *d);
        for (const auto &o : sc.obstacles)
        {
            const double c = std::hypot(rec.truth.x - o.x, rec.truth.y - o.y) - o.radius - sc.vehicle.half_width;
            s.min_obstacle_clearance_m = std::min(s.min_obstacle_clearance_m.value_or(c), c);
        }
        s.max_abs_lateral_offset_m =
            std::max(s.max_abs_lateral_offset_m, std::abs(track.locate(rec.truth.x, rec.truth.y).n));
    }
    return s;
}

int cmd_run(const std::filesystem::path &scenario, const std::filesystem::path &out,
            std::optional<std::uint64_t> seed, std::ostream &out_stream, std::ostream &err_stream)
{
    sim::Scenario sc;
    sim::World world;
    try
    {
        sc = io::load_scenario(scenario);
        if (seed)
            sc.seed = *seed;
        world = sim::build_world(sc);
    }
    catch (const Error &e)
    {
        err_stream << "error: " << scenario.string() << ": " << e.what() << '\n';
        return 1;
    }

    sim::ScenarioResult res;
    try
    {
        res = sim::run_scenario(sc, world);
    }
    catch (const Error &e)
    {
        err_stream << "error: simulation failed: " << e.what() << '\n';
        return 1;
    }

    std::ofstream f(out, std::ios::binary);
    if (!f)
    {
        err_stream << "error: cannot write " << out.string() << '\n';
        return 1;
    }
    io::write_trace_csv(f, res.trace);
    f.close();
    err_stream << "wrote " << res.trace.size() << " records to " << out.string() << '\n';

    out_stream << summarize(sc, world.track, res).to_json() << '\n';
    if (res.off_track)
    {
        err_stream << "vehicle left the track corridor at t = " << res.trace.back().t << " s\n";
        return 2;
    }
    return 0;
}

int cmd_validate(const std::filesystem::path &scenario, std::ostream &out_stream, std::ostream &err_stream)
{
    try
    {
        const auto sc = io::load_scenario(scenario);
        sim::build_world(sc);
        out_stream << "ok: " << sc.name << '\n';
        return 0;
    }
    catch (const Error &e)
    {
        err_stream << "error: " << scenario.string() << ": " << e.what() << '\n';
        return 1;
    }
}

int cmd_acceptance(std::ostream &out_stream)
{
    const auto results = acceptance::run_all(out_stream);
    const auto passed = std::count_if(results.begin(), results.end(), [](const auto &r) { return r.passed; });
    out_stream << passed << "/" << results.size() << " criteria passed\n";
    return passed == static_cast<long>(results.size()) ? 0 : 1;
}

} // namespace resnav::cli
