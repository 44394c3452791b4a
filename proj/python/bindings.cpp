#include <algorithm>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ergobound/certify.hpp"
#include "ergobound/dynamics.hpp"
#include "ergobound/sos_program.hpp"

namespace py = pybind11;
using namespace ergobound;

namespace {

py::array_t<double> States(const Trajectory& traj) {
  py::array_t<double> out({traj.num_points(), static_cast<std::size_t>(traj.dim())});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < traj.num_points(); ++i) {
    const auto x = traj.state(i);
    for (int j = 0; j < traj.dim(); ++j) a(i, j) = x[j];
  }
  return out;
}

py::dict ValidityDict(const ValidityReport& r) {
  py::dict d;
  d["valid"] = r.valid;
  d["residual_infnorm"] = r.residual_infnorm;
  d["gram_min_eigenvalue"] = r.gram_min_eigenvalue;
  d["gram_norm"] = r.gram_norm;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ergobound, m) {
  m.doc() = "Upper bounds on time averages in polynomial ODEs via sum-of-squares certificates.";

  py::class_<Polynomial>(m, "Polynomial")
      .def_static(
          "parse",
          [](const std::string& text, const std::vector<std::string>& variables,
             const std::map<std::string, double>& constants) {
            return ParsePolynomial(text, variables, constants);
          },
          py::arg("text"), py::arg("variables"), py::arg("constants") = std::map<std::string, double>{})
      .def_static("constant", &Polynomial::Constant)
      .def_property_readonly("dim", &Polynomial::dim)
      .def_property_readonly("degree", &Polynomial::degree)
      .def_property_readonly("num_terms", &Polynomial::num_terms)
      .def("__call__", [](const Polynomial& p, const std::vector<double>& x) { return p.Evaluate(x); })
      .def("to_text", &Polynomial::ToText)
      .def_static("from_text", &Polynomial::FromText)
      .def("to_string",
           [](const Polynomial& p, const std::vector<std::string>& names) { return p.ToString(names); },
           py::arg("names") = std::vector<std::string>{})
      .def("__str__", [](const Polynomial& p) { return p.ToString(); })
      .def(py::self + py::self)
      .def(py::self * py::self)
      .def(py::self == py::self);

  py::class_<LorenzParameters>(m, "LorenzParameters")
      .def(py::init<>())
      .def_readwrite("beta", &LorenzParameters::beta)
      .def_readwrite("sigma", &LorenzParameters::sigma)
      .def_readwrite("r", &LorenzParameters::r);

  py::class_<PolySystem>(m, "PolySystem")
      .def(py::init<std::vector<Polynomial>, std::vector<std::string>,
                    std::map<std::string, double>, std::string>(),
           py::arg("components"), py::arg("variables"),
           py::arg("parameters") = std::map<std::string, double>{}, py::arg("name") = "custom")
      .def_static("lorenz", &PolySystem::Lorenz, py::arg("params") = LorenzParameters{})
      .def_property_readonly("dim", &PolySystem::dim)
      .def_property_readonly("variables", &PolySystem::variable_names)
      .def("__call__", [](const PolySystem& f, const std::vector<double>& x) { return f.Evaluate(x); })
      .def("lie_derivative", [](const PolySystem& f, const Polynomial& v) { return LieDerivative(f, v); });

  // Bounds and certificates.
  py::class_<BoundCertificate>(m, "BoundCertificate")
      .def_readonly("bound", &BoundCertificate::bound)
      .def_readonly("aux_degree", &BoundCertificate::aux_degree)
      .def_readonly("valid", &BoundCertificate::valid)
      .def_readonly("v", &BoundCertificate::v)
      .def_readonly("phi", &BoundCertificate::phi)
      .def_readonly("gram", &BoundCertificate::gram)
      .def_readonly("residual_infnorm", &BoundCertificate::residual_infnorm)
      .def_readonly("gram_min_eigenvalue", &BoundCertificate::gram_min_eigenvalue)
      .def_property_readonly("solver_status", [](const BoundCertificate& c) { return c.solver.status; })
      .def_property_readonly("id", &BoundCertificate::Id)
      .def("gap", &BoundGap, "g = U - Phi - f.grad V")
      .def("to_json", &CertificateToJson)
      .def_static("from_json", &CertificateFromJson);

  m.def(
      "compute_bound",
      [](const PolySystem& system, const Polynomial& phi, int degree) {
        py::gil_scoped_release release;
        return ComputeBound(system, phi, degree).certificate;
      },
      py::arg("system"), py::arg("phi"), py::arg("degree"));
  m.def(
      "validate_certificate",
      [](const BoundCertificate& c, double tol_psd, double tol_fit) {
        return ValidityDict(ValidateCertificate(c, {tol_psd, tol_fit}));
      },
      py::arg("certificate"), py::arg("tol_psd") = 1e-8, py::arg("tol_fit") = 1e-6);

  // Dynamics.
  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("dim", &Trajectory::dim)
      .def_property_readonly("times", [](const Trajectory& t) {
        py::array_t<double> out(static_cast<py::ssize_t>(t.times().size()));
        std::copy(t.times().begin(), t.times().end(), out.mutable_data());
        return out;
      })
      .def_property_readonly("states", &States)
      .def("state_at", py::overload_cast<double>(&Trajectory::StateAt, py::const_))
      .def("to_csv", [](const Trajectory& t, const std::vector<std::string>& names) {
        return TrajectoryToCsv(t, names);
      });

  py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);
  py::register_exception<ShootingError>(m, "ShootingError", PyExc_RuntimeError);
  py::register_exception<CertificateUnavailable>(m, "CertificateUnavailable", PyExc_RuntimeError);

  m.def(
      "integrate",
      [](const PolySystem& f, const std::vector<double>& x0, double t_end, double tol) {
        py::gil_scoped_release release;
        return Integrate(f, x0, t_end, tol);
      },
      py::arg("system"), py::arg("x0"), py::arg("t_end"), py::arg("tol") = 1e-10);
  m.def("time_average", &TimeAverage, py::arg("trajectory"), py::arg("phi"),
        py::arg("spinup") = 0.0, py::arg("points") = 9);

  py::class_<SectionSpec>(m, "SectionSpec")
      .def(py::init([](std::vector<double> normal, double offset, int direction) {
             return SectionSpec{std::move(normal), offset, direction};
           }),
           py::arg("normal"), py::arg("offset"), py::arg("direction") = -1)
      .def_static("lorenz_default", &SectionSpec::LorenzDefault,
                  py::arg("params") = LorenzParameters{})
      .def_readwrite("normal", &SectionSpec::normal)
      .def_readwrite("offset", &SectionSpec::offset)
      .def_readwrite("direction", &SectionSpec::direction);

  py::class_<PeriodicOrbit>(m, "PeriodicOrbit")
      .def_readonly("anchor", &PeriodicOrbit::anchor)
      .def_readonly("period", &PeriodicOrbit::period)
      .def_readonly("symbols", &PeriodicOrbit::symbols)
      .def_readonly("residual", &PeriodicOrbit::residual)
      .def_readonly("newton_iterations", &PeriodicOrbit::newton_iterations)
      .def_readonly("trajectory", &PeriodicOrbit::trajectory)
      .def("to_json", [](const PeriodicOrbit& o, const Polynomial* phi) { return OrbitToJson(o, phi); },
           py::arg("phi") = nullptr);

  m.def(
      "find_periodic_orbit",
      [](const PolySystem& f, const SectionSpec& section, const std::string& symbols,
         double run_length, int attempts) {
        py::gil_scoped_release release;
        const auto seeds = CloseReturnSeeds(f, section, symbols, run_length);
        std::string last = "no close returns with itinerary " + symbols;
        for (int i = 0; i < attempts && i < static_cast<int>(seeds.size()); ++i) {
          try {
            return FindPeriodicOrbit(f, section, symbols, seeds[i].guess);
          } catch (const ShootingError& e) {
            last = e.what();
          }
        }
        throw ShootingError(last);
      },
      "Close-return seeding followed by Newton shooting.", py::arg("system"), py::arg("section"),
      py::arg("symbols"), py::arg("run_length") = 500.0, py::arg("attempts") = 5);

  // Certification.
  m.def("markov_bound", &MarkovBound, py::arg("epsilon"), py::arg("M"));
  m.def("occupancy_fraction", &OccupancyFraction, py::arg("trajectory"), py::arg("certificate"),
        py::arg("M"), py::arg("spinup") = 0.0);

  py::class_<RegionGrid>(m, "RegionGrid")
      .def_readonly("box", &RegionGrid::box)
      .def_readonly("resolution", &RegionGrid::resolution)
      .def_readonly("threshold", &RegionGrid::threshold)
      .def_readonly("bound", &RegionGrid::bound)
      .def_readonly("certificate_id", &RegionGrid::certificate_id)
      .def_property_readonly("values", [](const RegionGrid& g) {
        // Row-major with the last axis fastest, i.e. shape (nz, ny, nx) in 3D.
        std::vector<py::ssize_t> shape(g.resolution.rbegin(), g.resolution.rend());
        py::array_t<double> out(shape);
        std::copy(g.values.begin(), g.values.end(), out.mutable_data());
        return out;
      })
      .def("member_fraction", &RegionGrid::MemberFraction)
      .def("to_text", &RegionGridToText)
      .def_static("from_text", [](const std::string& s) { return RegionGridFromText(s); });

  m.def(
      "compute_region_grid",
      [](const BoundCertificate& c, const Box& box, const std::vector<int>& resolution, double M,
         int threads) {
        py::gil_scoped_release release;
        return ComputeRegionGrid(c, box, resolution, M, threads);
      },
      py::arg("certificate"), py::arg("box"), py::arg("resolution"), py::arg("M"),
      py::arg("threads") = 1);

  py::class_<ResidualTrace>(m, "ResidualTrace")
      .def_readonly("times", &ResidualTrace::times)
      .def_readonly("values", &ResidualTrace::values)
      .def_readonly("mean", &ResidualTrace::mean)
      .def_readonly("min", &ResidualTrace::min)
      .def_readonly("max", &ResidualTrace::max)
      .def("to_csv", &ResidualTraceToCsv);
  m.def("residual_trace", &ComputeResidualTrace, py::arg("trajectory"), py::arg("certificate"),
        py::arg("samples_per_step") = 4);

  m.def(
      "gap_report",
      [](const PeriodicOrbit& o, const BoundCertificate& c, double M) {
        return GapReportToJson(ComputeGapReport(o, c, M));
      },
      "Gap report as a JSON string.", py::arg("orbit"), py::arg("certificate"), py::arg("M"));
}
