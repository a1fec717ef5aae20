// Python module _core: manifold maps, generators, the exact 1D minimizer
// and the experiment runner. Configs and summaries cross as JSON strings.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pdrssn/experiments.hpp"

namespace py = pybind11;
using namespace pdrssn;

namespace {

// (rows, cols, 3) for S², (rows, cols, 3, 3) for SPD.
py::array_t<double> to_array(const Image<Sphere2>& img) {
  py::array_t<double> a({img.rows, img.cols, 3});
  auto m = a.mutable_unchecked<3>();
  for (int i = 0; i < img.rows; ++i)
    for (int j = 0; j < img.cols; ++j)
      for (int k = 0; k < 3; ++k) m(i, j, k) = img(i, j)[k];
  return a;
}

py::array_t<double> to_array(const Image<Spd3>& img) {
  py::array_t<double> a({img.rows, img.cols, 3, 3});
  auto m = a.mutable_unchecked<4>();
  for (int i = 0; i < img.rows; ++i)
    for (int j = 0; j < img.cols; ++j)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(i, j, r, c) = img(i, j)(r, c);
  return a;
}

std::string run_config(const std::string& config_json) {
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  return run_experiment(cfg).summary_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "primal-dual semi-smooth Newton for manifold-valued TV denoising";

  // Translators run newest first, so the subclass goes last.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("sphere_exp", &Sphere2::exp, py::arg("p"), py::arg("x"));
  m.def("sphere_log", &Sphere2::log, py::arg("p"), py::arg("q"));
  m.def("sphere_dist", &Sphere2::dist, py::arg("p"), py::arg("q"));
  m.def("spd_exp", &Spd3::exp, py::arg("p"), py::arg("x"));
  m.def("spd_log", &Spd3::log, py::arg("p"), py::arg("q"));
  m.def("spd_dist", &Spd3::dist, py::arg("p"), py::arg("q"));

  m.def("lemniscate", [](int n) { return to_array(gen_lemniscate(n)); }, py::arg("n_points"));
  m.def("rotations_image", [](int n) { return to_array(gen_rotations_image(n)); }, py::arg("n"));
  m.def("spd_image", [](int n) { return to_array(gen_spd_image(n)); }, py::arg("n"));

  m.def("exact_rof_delta", &exact_rof_delta, py::arg("dist"), py::arg("ell"), py::arg("alpha"));
  m.def("q_rates", py::overload_cast<const std::vector<double>&>(&q_rate), py::arg("x_norms"),
        "Empirical q-orders of a residual sequence; None where undefined.");

  m.def("run_config", &run_config, py::arg("config_json"),
        "Runs an experiment config and returns its summary as JSON.");
}
