#include "resnav/acceptance.hpp"
#include "resnav/cli.hpp"
#include "resnav/scenario_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace resnav;

namespace
{

perception::PointCloud to_cloud(const Eigen::Ref<const Eigen::MatrixXd> &pts)
{
    if (pts.cols() != 3)
        throw InvalidArgument("points must have shape (n, 3)");
    perception::PointCloud c;
    c.points.reserve(static_cast<std::size_t>(pts.rows()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        c.points.push_back({pts(i, 0), pts(i, 1), pts(i, 2)});
    return c;
}

perception::WallSide parse_side(const std::string &s)
{
    if (s == "left")
        return perception::WallSide::Left;
    if (s == "right")
        return perception::WallSide::Right;
    throw InvalidArgument("side must be 'left' or 'right'");
}

py::dict gate_py(const std::vector<double> &d, double epsilon, double delta)
{
    const auto g = fusion::gate(d, fusion::GateParams{epsilon, delta});
    py::dict out;
    out["kind"] = std::string(fusion::to_string(g.kind()));
    std::visit(
        [&](const auto &o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, fusion::WeightedFuse>)
                out["weights"] = o.weights;
            else if constexpr (!std::is_same_v<T, fusion::Reject>)
                out["chosen"] = o.chosen;
        },
        g.outcome);
    return out;
}

py::dict wall_dict(const perception::WallModel &w)
{
    py::dict out;
    out["coeffs"] = w.coeffs;
    out["d_w"] = w.d_w;
    out["support"] = w.support;
    out["residual_rms"] = w.residual_rms;
    return out;
}

py::dict fit_wall_py(const Eigen::Ref<const Eigen::MatrixXd> &pts, int order)
{
    const auto cloud = to_cloud(pts);
    perception::Cluster all;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        all.point_indices.push_back(i);
    return wall_dict(perception::fit_wall(all, cloud, order));
}

std::vector<std::vector<std::size_t>> cluster_py(const Eigen::Ref<const Eigen::MatrixXd> &pts, double tol,
                                                 std::size_t min_size)
{
    std::vector<std::vector<std::size_t>> out;
    for (auto &c : perception::cluster(to_cloud(pts), tol, min_size))
        out.push_back(std::move(c.point_indices));
    return out;
}

py::dict detect_wall_py(const Eigen::Ref<const Eigen::MatrixXd> &pts, const std::string &side)
{
    perception::PipelineParams p;
    p.side = parse_side(side);
    return wall_dict(perception::detect_wall(to_cloud(pts), p));
}

double wall_follow_steer(const std::vector<double> &coeffs, const std::string &side)
{
    perception::WallModel w;
    w.coeffs = coeffs;
    w.d_w = coeffs.empty() ? 0.0 : coeffs[0];
    w.support = coeffs.size();
    w.side = parse_side(side);
    return wallfollow::wall_follow_command(w, wallfollow::WallFollowParams{}).steer;
}

py::tuple run_file(const std::string &path, std::optional<std::uint64_t> seed)
{
    auto sc = io::load_scenario(path);
    if (seed)
        sc.seed = *seed;
    const auto world = sim::build_world(sc);
    const auto res = sim::run_scenario(sc, world);
    return py::make_tuple(cli::summarize(sc, world.track, res).to_json(), io::trace_to_csv(res.trace));
}

py::list acceptance_py(const std::vector<int> &only)
{
    std::ostringstream sink;
    py::list out;
    for (const auto &r : acceptance::run_all(sink, only))
    {
        py::dict d;
        d["id"] = r.id;
        d["name"] = r.name;
        d["passed"] = r.passed;
        d["detail"] = r.detail;
        d["seconds"] = r.seconds;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_resnav, m)
{
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<io::ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("normalize_angle", &normalize_angle, py::arg("a"));
    m.def("gate", &gate_py, py::arg("distances"), py::arg("epsilon") = 0.2, py::arg("delta") = 5.0);
    m.def("fit_wall", &fit_wall_py, py::arg("points"), py::arg("order") = 2);
    m.def("cluster", &cluster_py, py::arg("points"), py::arg("tol") = 1.0, py::arg("min_size") = 10);
    m.def("detect_wall", &detect_wall_py, py::arg("points"), py::arg("side") = "right");
    m.def("wall_follow_steer", &wall_follow_steer, py::arg("coeffs"), py::arg("side") = "left");
    m.def("run_scenario_file", &run_file, py::arg("path"), py::arg("seed") = py::none(),
          "Runs a scenario file; returns (summary JSON, trace CSV).");
    m.def("run_acceptance", &acceptance_py, py::arg("only") = std::vector<int>{});
}
