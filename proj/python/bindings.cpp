#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "critheat/ansatz.hpp"
#include "critheat/commands.hpp"
#include "critheat/evolve.hpp"
#include "critheat/green.hpp"
#include "critheat/nonlocal.hpp"
#include "critheat/spectral.hpp"

namespace py = pybind11;
using namespace critheat;

namespace {

DomainSpec make_spec(const std::string& kind, int resolution, const std::string& mode, double radius,
                     const std::array<double, 3>& edges) {
  DomainSpec s;
  s.kind = domain_kind_from_string(kind);
  s.mode = mode_from_string(mode);
  s.resolution = resolution;
  s.radius = radius;
  s.edges = edges;
  s.validate();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robin functions, critical spectral parameter, nonlocal kernel and blow-up dynamics";
  m.attr("alpha3") = kAlpha3;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<DiscreteDomain, std::shared_ptr<DiscreteDomain>>(m, "Domain")
      .def(py::init([](const std::string& kind, int resolution, const std::string& mode, double radius,
                       std::array<double, 3> edges) {
             return std::make_shared<DiscreteDomain>(make_spec(kind, resolution, mode, radius, edges));
           }),
           py::arg("kind") = "unit-ball", py::arg("resolution") = 32, py::arg("mode") = "full3d",
           py::arg("radius") = 1.0, py::arg("edges") = std::array<double, 3>{1, 1, 1})
      .def_property_readonly("size", &DiscreteDomain::size)
      .def_property_readonly("hash", &DiscreteDomain::hash)
      .def_property_readonly("canonical", [](const DiscreteDomain& d) { return d.spec().canonical(); })
      .def("boundary_distance", &DiscreteDomain::boundary_distance);

  py::class_<Spectrum>(m, "Spectrum")
      .def_readonly("eigenvalues", &Spectrum::eigenvalues)
      .def_readonly("residuals", &Spectrum::residuals)
      .def_readonly("fields", &Spectrum::fields)
      .def_property_readonly("lambda1", &Spectrum::lambda1);

  m.def("eigenpairs", &eigenpairs, py::arg("domain"), py::arg("K") = 8, py::arg("tol") = 1e-8,
        py::call_guard<py::gil_scoped_release>());
  m.def("robin", [](const DiscreteDomain& d, const Spectrum& sp, double g, Point q) { return robin(d, sp, g, q); },
        py::arg("domain"), py::arg("spectrum"), py::arg("gamma"), py::arg("q") = Point{0, 0, 0});
  m.def("ball_robin_center", &ball_robin_center);
  m.def("gamma_star",
        [](const DiscreteDomain& d, const Spectrum& sp, Point q, double tol) { return gamma_star(d, sp, q, tol).value; },
        py::arg("domain"), py::arg("spectrum"), py::arg("q") = Point{0, 0, 0}, py::arg("tol") = 1e-10);
  m.def(
      "admissible",
      [](const DiscreteDomain& d, const Spectrum& sp, Point q) {
        auto a = admissible(d, sp, q);
        return py::dict(py::arg("admissible") = a.admissible, py::arg("margin") = a.margin,
                        py::arg("gamma_star") = a.gamma_star, py::arg("lambda1") = a.lambda1);
      },
      py::arg("domain"), py::arg("spectrum"), py::arg("q") = Point{0, 0, 0});

  py::class_<NonlocalKernel>(m, "NonlocalKernel")
      .def(py::init([](const DiscreteDomain& d, const Spectrum& sp, double g, Point q) {
             return NonlocalKernel(d, sp, g, q);
           }),
           py::arg("domain"), py::arg("spectrum"), py::arg("gamma"), py::arg("q") = Point{0, 0, 0},
           py::keep_alive<1, 2>())
      .def("I", [](const NonlocalKernel& k, double tau) { return k.I(tau); })
      .def("I_tilde", &NonlocalKernel::I_tilde)
      .def("c_inf", &NonlocalKernel::c_inf)
      .def_property_readonly("tau_switch", &NonlocalKernel::tau_switch)
      .def_property_readonly("switch_mismatch", &NonlocalKernel::switch_mismatch)
      .def_property_readonly("leading_coefficient", &NonlocalKernel::leading_coefficient);

  m.def(
      "evolve",
      [](const DiscreteDomain& d, const Eigen::VectorXd& u0, double horizon, const std::string& scheme) {
        EvolveConfig cfg;
        cfg.horizon = horizon;
        cfg.scheme = scheme_from_string(scheme);
        Trajectory tr;
        {
          py::gil_scoped_release nogil;
          tr = evolve(d, u0, cfg);
        }
        return py::dict(py::arg("status") = to_string(tr.status), py::arg("t") = tr.t, py::arg("sup") = tr.sup,
                        py::arg("mu_hat") = tr.mu_hat, py::arg("energy") = tr.energy,
                        py::arg("energy_violations") = tr.energy_violations);
      },
      py::arg("domain"), py::arg("u0"), py::arg("horizon") = 10.0, py::arg("scheme") = "strang-split");

  m.def(
      "run",
      [](const std::string& config_json) {
        RunConfig cfg = RunConfig::from_json(Json::parse(config_json));
        CommandResult r;
        {
          py::gil_scoped_release nogil;
          r = execute(cfg);
        }
        py::dict files;
        for (const auto& [suffix, content] : r.files) files[py::str(suffix)] = content;
        return py::make_tuple(r.summary.dump(), files);
      },
      py::arg("config_json"), "Runs one command from a JSON config; returns (summary_json, {suffix: content}).");
}
