#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ioss/builtins.hpp"
#include "ioss/cli.hpp"
#include "ioss/error.hpp"
#include "ioss/serialize.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

// Reports cross the boundary as JSON text; the Python side parses them.
std::string dump(const ioss::json& j) { return j.dump(); }

ioss::Certificate make_cert(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                            const Eigen::MatrixXd& R, double kappa) {
  return ioss::Certificate::create(ioss::SymMatrix::from_dense(P), ioss::SymMatrix::from_dense(Q),
                                   ioss::SymMatrix::from_dense(R), kappa);
}

ioss::GridSpec make_grid(const ioss::SystemSpec& sys, const std::vector<std::tuple<double, double, std::uint64_t>>& axes) {
  std::vector<ioss::Axis> a;
  for (const auto& [lo, hi, n] : axes) a.push_back({lo, hi, n});
  return ioss::GridSpec(sys.dims(), std::move(a));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "gridded i-IOSS certificates and their transfer to Euler/RK2 models";
  m.attr("__version__") = ioss::version();

  // Translators run newest first, so the base class goes in first.
  auto base = py::register_exception<ioss::Error>(m, "Error");
  py::register_exception<ioss::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ioss::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ioss::TransferError>(m, "TransferError", base.ptr());

  py::class_<ioss::SystemSpec>(m, "System")
      .def_property_readonly("name", &ioss::SystemSpec::name)
      .def_property_readonly("dims", [](const ioss::SystemSpec& s) {
        const ioss::Dims& d = s.dims();
        return py::make_tuple(d.n, d.q, d.m, d.p);
      })
      .def("eval_point", [](const ioss::SystemSpec& s, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& d) {
        const ioss::PointEval pe = ioss::eval_point(s, x, u, d);
        return py::dict("f"_a = pe.f_val, "h"_a = pe.h_val, "A"_a = pe.A, "B"_a = pe.B,
                        "C"_a = pe.C, "D"_a = pe.D);
      }, "x"_a, "u"_a, "d"_a);

  m.def("parse_model", [](const std::string& text, const std::string& name) {
    return ioss::parse_model(text, name);
  }, "text"_a, "name"_a = "model");
  m.def("load_model", [](const std::string& path) { return ioss::load_model(path); });
  m.def("builtin_model", [](const std::string& name) { return ioss::builtin_model(name); });
  m.def("builtin_names", &ioss::builtin_names);

  py::class_<ioss::GridSpec>(m, "Grid")
      .def(py::init(&make_grid), "system"_a, "axes"_a)
      .def_property_readonly("size", &ioss::GridSpec::size)
      .def("point", py::overload_cast<std::uint64_t>(&ioss::GridSpec::point, py::const_));
  m.def("builtin_grid", [](const std::string& name, std::uint64_t count) {
    return ioss::builtin_grid(name, count);
  }, "name"_a, "count"_a);

  py::class_<ioss::Certificate>(m, "Certificate")
      .def(py::init(&make_cert), "P"_a, "Q"_a, "R"_a, "kappa"_a)
      .def_property_readonly("P", [](const ioss::Certificate& c) { return c.P().dense(); })
      .def_property_readonly("Q", [](const ioss::Certificate& c) { return c.Q().dense(); })
      .def_property_readonly("R", [](const ioss::Certificate& c) { return c.R().dense(); })
      .def_property_readonly("kappa", &ioss::Certificate::kappa)
      .def("to_json", [](const ioss::Certificate& c) { return dump(ioss::to_json(c)); });

  m.def("step", [](const ioss::SystemSpec& s, const std::string& scheme, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& u, const Eigen::VectorXd& d, double tau) {
    return ioss::step(s, ioss::parse_scheme(scheme), x, u, d, tau);
  }, "system"_a, "scheme"_a, "x"_a, "u"_a, "d"_a, "tau"_a);

  m.def("consistency_defect", [](const ioss::SystemSpec& s, const std::string& scheme,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& d, double tau) {
    return ioss::consistency_defect(s, ioss::parse_scheme(scheme), x, u, d, tau);
  }, "system"_a, "scheme"_a, "x"_a, "u"_a, "d"_a, "tau"_a);

  m.def("check_ct", [](const ioss::SystemSpec& s, const ioss::GridSpec& g,
                       const ioss::Certificate& c, double tol, unsigned threads) {
    py::gil_scoped_release nogil;
    return dump(ioss::to_json(ioss::check_ct_grid(s, g, c, tol, threads), s.dims()));
  }, "system"_a, "grid"_a, "cert"_a, "tol"_a = ioss::kDefaultNsdTol, "threads"_a = 0);

  m.def("tau1", [](const ioss::Certificate& c, const std::string& scheme, double lf,
                   double sigma_slope, double delta0) {
    const ioss::ConsistencyBound b =
        ioss::consistency_bound_with_slope(ioss::parse_scheme(scheme), lf, sigma_slope, delta0);
    return dump(ioss::to_json(ioss::tau1(ioss::make_transfer_input(c, b))));
  }, "cert"_a, "scheme"_a, "lipschitz_f"_a, "sigma_slope"_a = 0.0,
        "delta0"_a = ioss::kDefaultDelta0);

  m.def("transfer", [](const ioss::SystemSpec& s, const ioss::GridSpec& g,
                       const ioss::Certificate& c, const std::string& scheme, double tau,
                       std::uint64_t samples, std::uint64_t seed, unsigned threads) {
    ioss::TransferOptions o;
    o.scheme = ioss::parse_scheme(scheme);
    o.tau = tau;
    o.lyapunov_samples = samples;
    o.seed = seed;
    o.threads = threads;
    py::gil_scoped_release nogil;
    return dump(ioss::to_json(ioss::run_transfer(s, g, c, o), s.dims()));
  }, "system"_a, "grid"_a, "cert"_a, "scheme"_a, "tau"_a, "samples"_a = 10000, "seed"_a = 0,
        "threads"_a = 0);

  m.def("synthesize", [](const ioss::SystemSpec& s, const ioss::GridSpec& g,
                         std::vector<double> kappas, int max_iterations, std::uint64_t seed) {
    ioss::SynthOptions o;
    if (!kappas.empty()) o.kappas = std::move(kappas);
    o.max_iterations = max_iterations;
    o.seed = seed;
    py::gil_scoped_release nogil;
    return dump(ioss::to_json(ioss::synthesize_certificate(s, g, o)));
  }, "system"_a, "grid"_a, "kappas"_a = std::vector<double>{}, "max_iterations"_a = 400,
        "seed"_a = 0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = ioss::run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
