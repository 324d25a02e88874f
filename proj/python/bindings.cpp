#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sketchrl/commander_env.hpp"
#include "sketchrl/config.hpp"
#include "sketchrl/dataset.hpp"
#include "sketchrl/kinematics.hpp"
#include "sketchrl/stroker_env.hpp"

namespace py = pybind11;
using namespace sketchrl;

namespace {

using Pixel = std::pair<int, int>;

PixelCoord pixel(const Pixel& p) { return {p.first, p.second}; }

// Array index [y, x] with row 0 at the bottom of the canvas.
py::array_t<std::uint8_t> to_array(const Canvas& c) {
  py::array_t<std::uint8_t> a({c.height(), c.width()});
  std::copy(c.cells().begin(), c.cells().end(), a.mutable_data());
  return a;
}

Canvas from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("canvas arrays must be two-dimensional");
  Canvas c(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const auto r = a.unchecked<2>();
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) c.set({x, y}, r(y, x) != 0);
  }
  return c;
}

CanvasMapping mapping(int pixels, double centimeters) {
  CanvasMapping m{pixels, centimeters};
  m.validate();
  return m;
}

}  // namespace

PYBIND11_MODULE(_sketchrl, m) {
  m.doc() = "Hierarchical RL sketching agent core";

  m.def("rasterize_segment",
        [](py::array_t<std::uint8_t> canvas, Pixel from, Pixel to, bool pen_down) {
          return to_array(rasterized(from_array(canvas), pixel(from), pixel(to), pen_down));
        },
        py::arg("canvas"), py::arg("start"), py::arg("end"), py::arg("pen_down") = true,
        "Copy of the canvas with the segment inked.");

  m.def("physical_to_pixel",
        [](double x, double y, int pixels, double centimeters) {
          const auto p = physical_to_pixel({x, y, 0.0}, mapping(pixels, centimeters));
          return Pixel{p.x, p.y};
        },
        py::arg("x"), py::arg("y"), py::arg("pixels") = 42, py::arg("centimeters") = 21.0);

  m.def("pixel_to_physical",
        [](Pixel p, int pixels, double centimeters) {
          const auto q = pixel_to_physical(pixel(p), mapping(pixels, centimeters));
          return std::pair<double, double>{q.x, q.y};
        },
        py::arg("pixel"), py::arg("pixels") = 42, py::arg("centimeters") = 21.0);

  m.def("l2_score",
        [](py::array_t<std::uint8_t> a, py::array_t<std::uint8_t> b) {
          return l2_score(from_array(a), from_array(b));
        },
        py::arg("canvas"), py::arg("target"));

  py::class_<CommanderEnv>(m, "CommanderEnv")
      .def(py::init([](int side, int episode_length, int boundary_side) {
             CommanderEpisodeConfig cfg;
             cfg.episode_length = episode_length;
             cfg.boundary_side = boundary_side;
             return CommanderEnv(side, side, cfg);
           }),
           py::arg("side") = 42, py::arg("episode_length") = 50, py::arg("boundary_side") = 10)
      .def("rollout",
           [](const CommanderEnv& env, py::array_t<std::uint8_t> goal_array,
              const std::vector<std::array<double, 3>>& commands) {
             const Canvas goal = from_array(goal_array);
             const L2Similarity l2;
             CommanderState s = env.reset(goal);
             std::vector<double> rewards;
             std::vector<Pixel> positions;
             for (const auto& c : commands) {
               if (s.t >= env.config().episode_length) throw std::invalid_argument("more commands than episode steps");
               auto st = env.step(s, StrokeCommand::clamped(c[0], c[1], c[2]), goal, l2);
               rewards.push_back(st.reward);
               positions.emplace_back(st.next.pos.x, st.next.pos.y);
               s = std::move(st.next);
             }
             return py::make_tuple(to_array(s.canvas), rewards, positions);
           },
           py::arg("goal"), py::arg("commands"),
           "Applies (down, dx, dy) commands from reset with the L2 reward. Returns (canvas, rewards, positions).");

  m.def("forward_kinematics",
        [](const std::array<double, kJointCount>& q) {
          const auto p = forward_kinematics(default_chain(), q);
          return py::make_tuple(py::make_tuple(p.position.x, p.position.y, p.position.z), p.roll, p.pitch);
        },
        py::arg("joints"), "Pentip position (cm, canvas frame), roll and pitch for the default chain.");

  m.def("initial_poses", [] { return default_pose_schedule().initial_poses; },
        "Joint vectors of the nine default pen-on-surface start poses.");

  m.def("stroker_reward",
        [](const std::array<double, 3>& goal, const std::array<double, 3>& reached, double roll, double pitch,
           double preferred_roll, double preferred_pitch) {
          return stroker_reward({goal[0], goal[1], goal[2]}, {reached[0], reached[1], reached[2]}, roll, pitch,
                                preferred_roll, preferred_pitch);
        },
        py::arg("goal"), py::arg("reached"), py::arg("roll"), py::arg("pitch"), py::arg("preferred_roll") = 0.0,
        py::arg("preferred_pitch") = 0.0);

  m.def("generate_dataset",
        [](const std::string& shapes, int count, std::uint64_t seed, int side) {
          const auto d = generate_dataset(shapes, count, seed, side, side);
          std::vector<py::array_t<std::uint8_t>> targets;
          for (const auto& t : d.targets) targets.push_back(to_array(t));
          return py::make_tuple(targets, d.labels);
        },
        py::arg("shapes") = "all", py::arg("count") = 10, py::arg("seed") = 0, py::arg("side") = 42);

  m.def("default_run_config_json", [] { return run_config_to_json(default_run_config()).dump(); });

  m.def("validate_run_config_json", [](const std::string& text) {
    return run_config_to_json(parse_run_config_text(text)).dump();
  });

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::invalid_argument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const std::out_of_range& e) {
      PyErr_SetString(PyExc_IndexError, e.what());
    }
  });
}
