#include "resnav/scenario_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace resnav::io
{

namespace
{

using nlohmann::json;

// Reads one JSON object, tracking which keys were consumed so that leftovers
// can be reported as unknown.
class ObjectReader
{
  public:
    ObjectReader(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail_at(path_.empty() ? "<root>" : path_, "expected an object");
    }

    ~ObjectReader() = default;

    std::string key_path(std::string_view key) const
    {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    const json *raw(std::string_view key)
    {
        seen_.insert(std::string(key));
        auto it = j_.find(std::string(key));
        return it == j_.end() ? nullptr : &*it;
    }

    void number(std::string_view key, double &out)
    {
        if (const json *v = raw(key))
        {
            if (!v->is_number())
                fail_at(key_path(key), "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out))
                fail_at(key_path(key), "expected a finite number");
        }
    }

    void angle_deg(std::string_view key, double &out_rad)
    {
        if (has(key))
        {
            double deg = 0.0;
            number(key, deg);
            out_rad = deg2rad(deg);
        }
        else
        {
            seen_.insert(std::string(key));
        }
    }

    template <typename Int> void integer(std::string_view key, Int &out)
    {
        if (const json *v = raw(key))
        {
            if (!v->is_number_integer())
                fail_at(key_path(key), "expected an integer");
            const auto value = v->get<long long>();
            if constexpr (std::is_unsigned_v<Int>)
                if (value < 0)
                    fail_at(key_path(key), "expected a non-negative integer");
            out = static_cast<Int>(value);
        }
    }

    void boolean(std::string_view key, bool &out)
    {
        if (const json *v = raw(key))
        {
            if (!v->is_boolean())
                fail_at(key_path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(std::string_view key, std::string &out)
    {
        if (const json *v = raw(key))
        {
            if (!v->is_string())
                fail_at(key_path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    std::vector<double> numbers(std::string_view key, std::vector<double> fallback)
    {
        const json *v = raw(key);
        if (v == nullptr)
            return fallback;
        if (!v->is_array())
            fail_at(key_path(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i)
        {
            if (!(*v)[i].is_number())
                fail_at(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back((*v)[i].get<double>());
        }
        return out;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.contains(it.key()))
                fail_at(key_path(it.key()), "unknown key");
    }

    [[noreturn]] static void fail_at(const std::string &path, const std::string &msg)
    {
        throw ConfigError(path + ": " + msg);
    }

  private:
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <std::size_t N>
void fixed_array(ObjectReader &r, std::string_view key, std::array<double, N> &out)
{
    if (!r.has(key))
    {
        r.raw(key);
        return;
    }
    const auto v = r.numbers(key, {});
    if (v.size() != N)
        ObjectReader::fail_at(r.key_path(key), "expected " + std::to_string(N) + " numbers");
    std::copy(v.begin(), v.end(), out.begin());
}

template <typename Fn> void section(ObjectReader &root, std::string_view key, Fn &&fn)
{
    const json *v = root.raw(key);
    if (v == nullptr)
        return;
    ObjectReader r(*v, root.key_path(key));
    fn(r);
    r.finish();
}

sim::FaultEpisode parse_episode(const json &j, const std::string &path, std::size_t &source)
{
    ObjectReader r(j, path);
    sim::FaultEpisode e;
    long long src = -1;
    r.integer("source", src);
    if (src < 0)
        ObjectReader::fail_at(r.key_path("source"), "required non-negative source index");
    source = static_cast<std::size_t>(src);
    if (!r.has("t_start") || !r.has("t_end"))
        ObjectReader::fail_at(path, "t_start and t_end are required");
    r.number("t_start", e.t_start);
    r.number("t_end", e.t_end);
    std::string mode;
    r.string("mode", mode);
    if (mode == "bias")
    {
        const auto off = r.numbers("offset", {});
        if (off.size() != 2)
            ObjectReader::fail_at(r.key_path("offset"), "bias needs a two-element offset [x, y]");
        e.mode = sim::FaultMode::Bias;
        e.bias = {off[0], off[1]};
    }
    else if (mode == "noise_inflation")
    {
        e.mode = sim::FaultMode::NoiseInflation;
        if (!r.has("factor"))
            ObjectReader::fail_at(r.key_path("factor"), "required for noise_inflation");
        r.number("factor", e.factor);
    }
    else if (mode == "dropout")
    {
        e.mode = sim::FaultMode::Dropout;
    }
    else if (mode == "random_walk")
    {
        e.mode = sim::FaultMode::RandomWalk;
        if (!r.has("sigma"))
            ObjectReader::fail_at(r.key_path("sigma"), "required for random_walk");
        r.number("sigma", e.sigma);
    }
    else
    {
        ObjectReader::fail_at(r.key_path("mode"), "expected one of bias, noise_inflation, dropout, random_walk");
    }
    r.finish();
    return e;
}

void append(std::string &out, double v) { out += format_double(v); }

void append_opt(std::string &out, const std::optional<double> &v)
{
    if (v && std::isfinite(*v))
        append(out, *v);
}

std::optional<double> parse_opt(std::string_view field, std::size_t lineno, std::string_view name)
{
    if (field.empty())
        return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ConfigError("trace line " + std::to_string(lineno) + ": bad number in column " + std::string(name));
    return v;
}

double parse_req(std::string_view field, std::size_t lineno, std::string_view name)
{
    auto v = parse_opt(field, lineno, name);
    if (!v)
        throw ConfigError("trace line " + std::to_string(lineno) + ": column " + std::string(name) +
                              " is required");
    return *v;
}

} // namespace

sim::Scenario parse_scenario(std::string_view text, std::string name)
{
    json doc;
    try
    {
        doc = json::parse(text.begin(), text.end());
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("syntax error: ") + e.what());
    }

    sim::Scenario sc;
    sc.name = std::move(name);
    ObjectReader root(doc, "");

    section(root, "track", [&](ObjectReader &r) {
        r.number("straight_length", sc.track.straight_length);
        r.number("turn_radius", sc.track.turn_radius);
        r.number("half_width", sc.track.half_width);
        r.angle_deg("bank_deg", sc.track.bank);
        r.string("racing_line", sc.track.racing_line_file);
    });

    section(root, "vehicle", [&](ObjectReader &r) {
        r.number("wheelbase", sc.vehicle.wheelbase);
        r.number("half_width", sc.vehicle.half_width);
        r.angle_deg("steer_max_deg", sc.vehicle.steer_max);
        r.number("speed_setpoint", sc.vehicle.speed_setpoint);
        r.number("speed_gain", sc.vehicle.speed_gain);
        r.number("max_accel", sc.vehicle.max_accel);
        r.number("lookahead", sc.vehicle.lookahead);
        section(r, "initial", [&](ObjectReader &i) {
            i.number("s", sc.vehicle.initial.s);
            i.number("offset", sc.vehicle.initial.offset);
            i.angle_deg("heading_error_deg", sc.vehicle.initial.heading_error);
        });
    });

    section(root, "rates", [&](ObjectReader &r) {
        r.number("tick_hz", sc.rates.tick_hz);
        r.number("gps_hz", sc.rates.gps_hz);
        r.number("lidar_hz", sc.rates.lidar_hz);
    });

    section(root, "fusion", [&](ObjectReader &r) {
        r.number("epsilon", sc.fusion.gate.epsilon);
        r.number("delta", sc.fusion.gate.delta);
        r.boolean("gating", sc.fusion.gating);
        r.integer("sources", sc.fusion.sources);
        r.number("gps_sigma", sc.fusion.gps_sigma);
        fixed_array(r, "process_noise", sc.fusion.process_noise);
        fixed_array(r, "initial_sigma", sc.fusion.initial_sigma);
        r.integer("warn_threshold", sc.fusion.thresholds.warn);
        r.integer("emergency_threshold", sc.fusion.thresholds.emergency);
        r.integer("recover_threshold", sc.fusion.thresholds.recover);
    });

    section(root, "perception", [&](ObjectReader &r) {
        auto &p = sc.perception.pipeline;
        r.number("voxel_leaf", p.voxel_leaf);
        r.number("cell_size", p.cell_size);
        r.integer("min_count", p.min_count);
        r.number("cluster_tol", p.cluster_tol);
        r.integer("min_cluster_size", p.min_cluster_size);
        r.integer("order", p.order);
        std::string side = p.side == perception::WallSide::Right ? "right" : "left";
        r.string("side", side);
        if (side == "right")
            p.side = perception::WallSide::Right;
        else if (side == "left")
            p.side = perception::WallSide::Left;
        else
            ObjectReader::fail_at(r.key_path("side"), "expected left or right");
        section(r, "crop", [&](ObjectReader &c) {
            c.number("x_min", p.crop.x_min);
            c.number("x_max", p.crop.x_max);
            c.number("y_abs_max", p.crop.y_abs_max);
        });
        section(r, "lidar", [&](ObjectReader &l) {
            auto &lp = sc.perception.lidar;
            l.angle_deg("fov_deg", lp.fov);
            l.integer("ray_count", lp.ray_count);
            l.number("max_range", lp.max_range);
            l.number("range_noise", lp.range_noise);
            l.number("wall_height", lp.wall_height);
            l.integer("wall_layers", lp.wall_layers);
            l.number("ground_spacing", lp.ground_spacing);
            l.number("ground_wall_clearance", lp.ground_wall_clearance);
        });
    });

    section(root, "wallfollow", [&](ObjectReader &r) {
        auto &w = sc.wallfollow;
        r.number("d_gap", w.law.d_gap);
        r.number("d_lookahead", w.law.d_lookahead);
        r.number("w_theta", w.law.w_theta);
        r.number("w_d", w.law.w_d);
        r.angle_deg("steer_limit_deg", w.law.steer_limit);
        r.integer("hold_ticks", w.hold_ticks);
        r.number("safe_stop_decel", w.safe_stop_decel);
        r.boolean("force", w.force);
    });

    section(root, "planner", [&](ObjectReader &r) {
        auto &p = sc.planner;
        r.number("station_step", p.station_step);
        p.offsets = r.numbers("offsets", p.offsets);
        r.integer("max_jump", p.max_jump);
        r.integer("horizon", p.horizon);
        r.number("k_c", p.cost.weights.k_c);
        r.number("k_kappa", p.cost.weights.k_kappa);
        r.number("k_d", p.cost.weights.k_d);
        r.number("rho", p.cost.rho);
        r.number("xi", p.cost.xi);
        r.number("safety_margin", p.cost.safety_margin);
        r.number("sample_spacing", p.sample_spacing);
    });

    if (const json *faults = root.raw("faults"))
    {
        if (!faults->is_array())
            ObjectReader::fail_at("faults", "expected an array of episodes");
        for (std::size_t i = 0; i < faults->size(); ++i)
        {
            std::size_t src = 0;
            auto ep = parse_episode((*faults)[i], "faults[" + std::to_string(i) + "]", src);
            if (sc.faults.per_source.size() <= src)
                sc.faults.per_source.resize(src + 1);
            sc.faults.per_source[src].push_back(ep);
        }
    }

    // Obstacles may be given in world coordinates or as station/offset on
    // the track centerline; the latter are resolved after the track fields
    // are known.
    struct PendingObstacle
    {
        bool frenet;
        double a, b, radius;
        std::string path;
    };
    std::vector<PendingObstacle> pending;
    if (const json *obs = root.raw("obstacles"))
    {
        if (!obs->is_array())
            ObjectReader::fail_at("obstacles", "expected an array");
        for (std::size_t i = 0; i < obs->size(); ++i)
        {
            const std::string path = "obstacles[" + std::to_string(i) + "]";
            ObjectReader r((*obs)[i], path);
            PendingObstacle p{r.has("s"), 0.0, 0.0, 0.0, path};
            if (!r.has("radius"))
                ObjectReader::fail_at(r.key_path("radius"), "required");
            r.number("radius", p.radius);
            if (p.frenet)
            {
                r.number("s", p.a);
                r.number("offset", p.b);
            }
            else
            {
                if (!r.has("x") || !r.has("y"))
                    ObjectReader::fail_at(path, "expected x and y, or s and offset");
                r.number("x", p.a);
                r.number("y", p.b);
            }
            r.finish();
            pending.push_back(p);
        }
    }

    root.integer("seed", sc.seed);
    root.number("duration_s", sc.duration);
    root.finish();

    if (!pending.empty())
    {
        std::optional<sim::Track> track;
        for (const auto &p : pending)
        {
            if (!p.frenet)
            {
                sc.obstacles.push_back({p.a, p.b, p.radius});
                continue;
            }
            if (!track)
            {
                try
                {
                    track = sim::build_oval_track(sc.track.straight_length, sc.track.turn_radius,
                                                  sc.track.half_width, sc.track.bank);
                }
                catch (const InvalidArgument &e)
                {
                    throw ConfigError(std::string("track: ") + e.what());
                }
            }
            const Eigen::Vector2d w = track->centerline.displaced(p.a, p.b);
            sc.obstacles.push_back({w.x(), w.y(), p.radius});
        }
    }

    try
    {
        sc.validate();
    }
    catch (const InvalidArgument &e)
    {
        throw ConfigError(e.what());
    }
    return sc;
}

sim::Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path.string() + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    auto sc = parse_scenario(buf.str(), path.stem().string());
    // Racing-line paths are relative to the scenario file.
    if (!sc.track.racing_line_file.empty())
    {
        const std::filesystem::path line(sc.track.racing_line_file);
        if (line.is_relative())
            sc.track.racing_line_file = (path.parent_path() / line).string();
    }
    return sc;
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream &os, const std::vector<sim::TraceRecord> &trace) { os << trace_to_csv(trace); }

std::string trace_to_csv(const std::vector<sim::TraceRecord> &trace)
{
    std::string out(kTraceHeader);
    out += '\n';
    for (const auto &r : trace)
    {
        append(out, r.t);
        for (double v : {r.truth.x, r.truth.y, r.truth.yaw, r.estimate.x, r.estimate.y, r.estimate.yaw})
        {
            out += ',';
            append(out, v);
        }
        for (const auto &z : r.z)
        {
            out += ',';
            if (z)
                append(out, z->x());
            out += ',';
            if (z)
                append(out, z->y());
        }
        for (const auto &d : r.delta)
        {
            out += ',';
            append_opt(out, d);
        }
        out += ',';
        if (r.gate)
            out += fusion::to_string(*r.gate);
        out += ',';
        out += fusion::to_string(r.status);
        out += ',';
        out += sim::to_string(r.mode);
        out += ',';
        append(out, r.steer);
        out += ',';
        append_opt(out, r.d_w);
        out += ',';
        append_opt(out, r.path_offset);
        out += '\n';
    }
    return out;
}

std::vector<sim::TraceRecord> read_trace_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line) || line != kTraceHeader)
        throw ConfigError("trace: missing or unexpected header");
    std::vector<sim::TraceRecord> out;
    std::size_t lineno = 1;
    const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        std::string h(kTraceHeader);
        std::stringstream ss(h);
        std::string f;
        while (std::getline(ss, f, ','))
            n.push_back(f);
        return n;
    }();
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true)
        {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (f.size() != names.size())
            throw ConfigError("trace line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(names.size()) + " columns");
        sim::TraceRecord r;
        std::size_t c = 0;
        auto req = [&]() {
            const double v = parse_req(f[c], lineno, names[c]);
            ++c;
            return v;
        };
        auto opt = [&]() {
            auto v = parse_opt(f[c], lineno, names[c]);
            ++c;
            return v;
        };
        r.t = req();
        r.truth = {req(), req(), req()};
        r.estimate = {req(), req(), req()};
        for (auto &z : r.z)
        {
            const auto x = opt();
            const auto y = opt();
            if (x.has_value() != y.has_value())
                throw ConfigError("trace line " + std::to_string(lineno) + ": half-empty measurement");
            if (x)
                z = Eigen::Vector2d(*x, *y);
        }
        for (auto &d : r.delta)
            d = opt();

        const std::string &gate = f[c++];
        if (!gate.empty())
        {
            bool found = false;
            for (auto k : {fusion::GateKind::AllQualified, fusion::GateKind::WeightedFuse,
                           fusion::GateKind::SingleFeasible, fusion::GateKind::Reject})
                if (gate == fusion::to_string(k))
                {
                    r.gate = k;
                    found = true;
                }
            if (!found)
                throw ConfigError("trace line " + std::to_string(lineno) + ": unknown gate '" + gate + "'");
        }
        const std::string &status = f[c++];
        bool status_ok = false;
        for (auto l : {fusion::NavLevel::Nominal, fusion::NavLevel::Warning, fusion::NavLevel::Emergency})
            if (status == fusion::to_string(l))
            {
                r.status = l;
                status_ok = true;
            }
        if (!status_ok)
            throw ConfigError("trace line " + std::to_string(lineno) + ": unknown status '" + status + "'");
        const std::string &mode = f[c++];
        if (mode == sim::to_string(sim::DriveMode::WallFollow))
            r.mode = sim::DriveMode::WallFollow;
        else if (mode == sim::to_string(sim::DriveMode::RacingLine))
            r.mode = sim::DriveMode::RacingLine;
        else
            throw ConfigError("trace line " + std::to_string(lineno) + ": unknown mode '" + mode + "'");
        r.steer = req();
        r.d_w = opt();
        r.path_offset = opt();
        out.push_back(r);
    }
    return out;
}

} // namespace resnav::io
