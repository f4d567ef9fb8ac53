#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcap/conserve.hpp"
#include "qcap/invert.hpp"
#include "qcap/jost.hpp"
#include "qcap/parallel.hpp"
#include "qcap/scatter.hpp"

namespace py = pybind11;
using namespace qcap;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
  const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(T))};
  py::array_t<T> a(shape, strides);
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

WaveFunction make_wave(GridPtr g, py::array_t<cplx, py::array::c_style | py::array::forcecast> a,
                       double t) {
  if (a.ndim() != 1) throw py::value_error("values must be one-dimensional");
  return WaveFunction(std::move(g), std::vector<cplx>(a.data(), a.data() + a.size()), t);
}

}  // namespace

PYBIND11_MODULE(_qcap, m) {
  m.doc() = "Nonlocal Schrodinger evolution, scattering and inversion";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def("set_workers", &set_workers, py::arg("n"));

  py::class_<SpatialGrid, std::shared_ptr<SpatialGrid>>(m, "SpatialGrid")
      .def(py::init<double, double, std::size_t>(), py::arg("x_min"), py::arg("x_max"), py::arg("n"))
      .def_property_readonly("x_min", &SpatialGrid::x_min)
      .def_property_readonly("x_max", &SpatialGrid::x_max)
      .def_property_readonly("dx", &SpatialGrid::dx)
      .def_property_readonly("n", &SpatialGrid::size)
      .def_property_readonly("x", [](const SpatialGrid& g) {
        return to_array(std::vector<double>(g.xs().begin(), g.xs().end()));
      })
      .def_property_readonly("k", [](const SpatialGrid& g) {
        return to_array(std::vector<double>(g.ks().begin(), g.ks().end()));
      });

  py::class_<WaveFunction>(m, "WaveFunction")
      .def(py::init([](std::shared_ptr<SpatialGrid> g, py::array_t<cplx> v, double t) {
             return make_wave(std::move(g), std::move(v), t);
           }),
           py::arg("grid"), py::arg("values"), py::arg("t") = 0.0)
      .def_property_readonly("grid", [](const WaveFunction& u) {
        return std::const_pointer_cast<SpatialGrid>(u.grid);
      })
      .def_property_readonly("values", [](const WaveFunction& u) { return to_array(u.values); })
      .def_readonly("t", &WaveFunction::t)
      .def("norm", [](const WaveFunction& u) { return l2_norm(u); })
      .def("inner", [](const WaveFunction& u, const WaveFunction& v) { return inner_product(u, v); });

  m.def("gaussian_packet",
        [](std::shared_ptr<SpatialGrid> g, double x0, double sigma, double k0, double norm) {
          return gaussian_packet(std::move(g), x0, sigma, k0, norm);
        },
        py::arg("grid"), py::arg("x0"), py::arg("sigma"), py::arg("k0"), py::arg("norm") = 1.0);
  m.def("trapped_charge", &trapped_charge, py::arg("u"), py::arg("b"), py::arg("c"));

  py::class_<PotentialSpec>(m, "PotentialSpec")
      .def_static("zero", &PotentialSpec::zero)
      .def_static("indicator", &PotentialSpec::indicator, py::arg("left"), py::arg("right"),
                  py::arg("height") = 1.0)
      .def_static("double_barrier", &PotentialSpec::double_barrier, py::arg("beta1"),
                  py::arg("beta2"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
      .def_static("sampled",
                  [](std::shared_ptr<SpatialGrid> g, std::vector<double> v) {
                    return PotentialSpec(SampledPotential{std::move(g), std::move(v)});
                  },
                  py::arg("grid"), py::arg("values"))
      .def("__call__", &PotentialSpec::operator(), py::arg("x"))
      .def("sample", [](const PotentialSpec& p, const SpatialGrid& g) {
        return to_array(evaluate_potential(p, g));
      })
      .def_property_readonly("l1_norm", &PotentialSpec::l1_norm)
      .def_property_readonly("sup_norm", &PotentialSpec::sup_norm);

  py::class_<NonlocalCoupling>(m, "NonlocalCoupling")
      .def(py::init<cplx, PotentialSpec, PotentialSpec>(), py::arg("lam"), py::arg("v1"),
           py::arg("v2"))
      .def_static("none", &NonlocalCoupling::none)
      .def_static("capacitor", &NonlocalCoupling::capacitor, py::arg("lam"), py::arg("b"),
                  py::arg("c"))
      .def_property_readonly("lam", &NonlocalCoupling::lambda);

  py::enum_<Method>(m, "Method")
      .value("SplitStep", Method::SplitStep)
      .value("CrankNicolson", Method::CrankNicolson);

  py::class_<EvolutionConfig>(m, "EvolutionConfig")
      .def(py::init<>())
      .def_readwrite("dt", &EvolutionConfig::dt)
      .def_readwrite("t_final", &EvolutionConfig::t_final)
      .def_readwrite("method", &EvolutionConfig::method)
      .def_readwrite("snapshot_every", &EvolutionConfig::snapshot_every);

  py::class_<Diagnostics>(m, "Diagnostics")
      .def_readonly("norm", &Diagnostics::norm)
      .def_readonly("energy", &Diagnostics::energy)
      .def_readonly("charge", &Diagnostics::charge);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("diagnostics", &Trajectory::diagnostics)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("blew_up", &Trajectory::blew_up);

  m.def("evolve",
        py::overload_cast<const WaveFunction&, const PotentialSpec&, const NonlocalCoupling&,
                          const EvolutionConfig&>(&evolve),
        py::arg("phi"), py::arg("v0"), py::arg("coupling"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("energy",
        py::overload_cast<const WaveFunction&, const PotentialSpec&, const NonlocalCoupling&>(&energy),
        py::arg("u"), py::arg("v0"), py::arg("coupling"));

  py::class_<ConservationReport>(m, "ConservationReport")
      .def_readonly("max_norm_drift", &ConservationReport::max_norm_drift)
      .def_readonly("max_energy_drift", &ConservationReport::max_energy_drift)
      .def("passed", &ConservationReport::pass);
  m.def("verify_conservation",
        [](const Trajectory& t, const PotentialSpec& v0, const NonlocalCoupling& c) {
          return verify_conservation(t, v0, c);
        },
        py::arg("trajectory"), py::arg("v0"), py::arg("coupling"));

  py::class_<PicardConfig>(m, "PicardConfig")
      .def(py::init<>())
      .def_readwrite("n_time_nodes", &PicardConfig::n_time_nodes)
      .def_readwrite("max_iters", &PicardConfig::max_iters)
      .def_readwrite("tol", &PicardConfig::tol);
  py::class_<PicardResult>(m, "PicardResult")
      .def_readonly("iteration_errors", &PicardResult::iteration_errors)
      .def_readonly("converged", &PicardResult::converged)
      .def_property_readonly("final_state",
                             [](const PicardResult& r) { return r.trajectory.final_state(); });
  m.def("picard_solve",
        py::overload_cast<const WaveFunction&, const PotentialSpec&, const NonlocalCoupling&, double,
                          const PicardConfig&>(&picard_solve),
        py::arg("phi"), py::arg("v0"), py::arg("coupling"), py::arg("T"),
        py::arg("config") = PicardConfig{}, py::call_guard<py::gil_scoped_release>());
  m.def("lipschitz_quotient", &lipschitz_quotient, py::arg("iteration_errors"));

  py::enum_<Classification>(m, "Classification")
      .value("Generic", Classification::Generic)
      .value("Exceptional", Classification::Exceptional);
  py::class_<ClassifyResult>(m, "ClassifyResult")
      .def_readonly("kind", &ClassifyResult::kind)
      .def_readonly("wronskian_at_zero", &ClassifyResult::wronskian_at_zero);
  m.def("classify", [](const PotentialSpec& v0) { return classify(v0); }, py::arg("v0"));
  m.def("count_bound_states", [](const PotentialSpec& v0) { return count_bound_states(v0); },
        py::arg("v0"));

  py::class_<ScatteringData>(m, "ScatteringData")
      .def_property_readonly("k", [](const ScatteringData& s) { return to_array(s.k); })
      .def_property_readonly("t", [](const ScatteringData& s) { return to_array(s.t); })
      .def_property_readonly("r_left", [](const ScatteringData& s) { return to_array(s.r_left); })
      .def_property_readonly("r_right", [](const ScatteringData& s) { return to_array(s.r_right); })
      .def_readonly("classification", &ScatteringData::classification)
      .def("unitarity_defect", &ScatteringData::unitarity_defect);
  m.def("default_k_grid", &default_k_grid, py::arg("n") = 256, py::arg("k_min") = 0.05,
        py::arg("k_max") = 40.0);
  m.def("reflection_transmission",
        [](const PotentialSpec& v0, std::vector<double> k) { return reflection_transmission(v0, k); },
        py::arg("v0"), py::arg("k_grid"), py::call_guard<py::gil_scoped_release>());
  m.def("uniform_scattering_data",
        [](const PotentialSpec& v0, double dk, double k_max) {
          return uniform_scattering_data(v0, dk, k_max);
        },
        py::arg("v0"), py::arg("dk"), py::arg("k_max"), py::call_guard<py::gil_scoped_release>());

  m.def("linear_scattering",
        [](const PotentialSpec& v0, const WaveFunction& phi) {
          return linear_scattering_operator(v0, phi.grid).apply(phi);
        },
        py::arg("v0"), py::arg("phi"), py::call_guard<py::gil_scoped_release>());

  py::class_<ScatterConfig>(m, "ScatterConfig")
      .def(py::init<>())
      .def_readwrite("dt", &ScatterConfig::dt)
      .def_readwrite("T", &ScatterConfig::T)
      .def_readwrite("matching_tol", &ScatterConfig::matching_tol)
      .def_readwrite("epsilons", &ScatterConfig::epsilons);
  py::class_<AsymptoticPair>(m, "AsymptoticPair")
      .def_readonly("phi_minus", &AsymptoticPair::phi_minus)
      .def_readonly("phi_plus", &AsymptoticPair::phi_plus)
      .def_readonly("converged", &AsymptoticPair::converged)
      .def_readonly("matching_error", &AsymptoticPair::matching_error)
      .def_readonly("T", &AsymptoticPair::T);
  m.def("nonlinear_scattering",
        py::overload_cast<const WaveFunction&, const PotentialSpec&, const NonlocalCoupling&,
                          const ScatterConfig&>(&nonlinear_scattering),
        py::arg("phi_minus"), py::arg("v0"), py::arg("coupling"), py::arg("config") = ScatterConfig{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<ReconstructionResult>(m, "ReconstructionResult")
      .def_property_readonly("x", [](const ReconstructionResult& r) {
        return to_array(std::vector<double>(r.x_grid->xs().begin(), r.x_grid->xs().end()));
      })
      .def_property_readonly("v0_hat", [](const ReconstructionResult& r) { return to_array(r.v0_hat); })
      .def_readonly("residual", &ReconstructionResult::residual)
      .def_readonly("max_condition", &ReconstructionResult::max_condition);
  m.def("marchenko",
        [](const ScatteringData& sd, std::shared_ptr<SpatialGrid> x_grid, double taper_fraction,
           std::size_t residual_stride) {
          KernelOptions ko;
          ko.taper_fraction = taper_fraction;
          MarchenkoOptions mo;
          mo.residual_stride = residual_stride;
          return marchenko_solve(build_kernel(sd, std::move(x_grid), ko), mo);
        },
        py::arg("data"), py::arg("x_grid"), py::arg("taper_fraction") = 0.1,
        py::arg("residual_stride") = 1, py::call_guard<py::gil_scoped_release>());

  py::class_<CapacitorParams>(m, "CapacitorParams")
      .def_readonly("beta1", &CapacitorParams::beta1)
      .def_readonly("beta2", &CapacitorParams::beta2)
      .def_readonly("a", &CapacitorParams::a)
      .def_readonly("b", &CapacitorParams::b)
      .def_readonly("c", &CapacitorParams::c)
      .def_readonly("d", &CapacitorParams::d);
  py::class_<CapacitorFit>(m, "CapacitorFit")
      .def_readonly("value", &CapacitorFit::value)
      .def_readonly("uncertainty", &CapacitorFit::uncertainty);
  m.def("fit_capacitor_params",
        [](const SpatialGrid& g, std::vector<double> v) { return fit_capacitor_params(g, v); },
        py::arg("grid"), py::arg("values"));
  m.def("fit_capacitor_params",
        [](const ReconstructionResult& r) { return fit_capacitor_params(r); }, py::arg("result"));
}
