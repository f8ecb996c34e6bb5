#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "rough_transport/bmo.hpp"
#include "rough_transport/errors.hpp"
#include "rough_transport/field_library.hpp"
#include "rough_transport/lagrangian_flow.hpp"
#include "rough_transport/renormalization.hpp"
#include "rough_transport/scenarios.hpp"
#include "rough_transport/solution_rep.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
namespace rt = rough_transport;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<rt::Vec> to_points(const Array& a, int dimension) {
  if (a.ndim() == 1 && dimension == 1) {
    std::vector<rt::Vec> pts(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) pts[static_cast<std::size_t>(i)] = rt::Vec{a.data()[i]};
    return pts;
  }
  if (a.ndim() != 2 || a.shape(1) != dimension)
    throw py::value_error("points must have shape (n, " + std::to_string(dimension) + ")");
  std::vector<rt::Vec> pts(static_cast<std::size_t>(a.shape(0)), rt::Vec(dimension));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (int j = 0; j < dimension; ++j) pts[static_cast<std::size_t>(i)][j] = a.data()[i * dimension + j];
  return pts;
}

rt::Direction parse_direction(const std::string& s) {
  if (s == "forward") return rt::Direction::forward;
  if (s == "backward") return rt::Direction::backward;
  throw py::value_error("direction must be 'forward' or 'backward'");
}

py::array_t<double> trajectories(const rt::FlowMap& flow) {
  const auto n = static_cast<py::ssize_t>(flow.seeds());
  const auto K = static_cast<py::ssize_t>(flow.steps() + 1);
  const int d = flow.dimension();
  py::array_t<double> out({n, K, static_cast<py::ssize_t>(d)});
  auto w = out.mutable_unchecked<3>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t k = 0; k < K; ++k) {
      const rt::Vec x = flow.position(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
      for (int j = 0; j < d; ++j) w(i, k, j) = x[j];
    }
  return out;
}

py::dict integrate(const std::string& field_id, int dimension, double T, const Array& points, int steps,
                   const std::string& direction) {
  const auto field = rt::make_velocity_field(field_id, dimension, T);
  const auto pts = to_points(points, dimension);
  double radius = 0.0;
  for (const auto& p : pts) radius = std::max(radius, p.norm());
  rt::FlowMap flow;
  rt::JacobianTrack track;
  {
    py::gil_scoped_release release;
    flow = rt::integrate_flow(field, pts, std::max(radius, 1.0), steps, parse_direction(direction));
    track = rt::jacobian(field, flow);
  }
  py::array_t<double> jx({static_cast<py::ssize_t>(track.seeds), static_cast<py::ssize_t>(track.samples)});
  std::copy(track.jx.begin(), track.jx.end(), jx.mutable_data());
  return py::dict("times"_a = flow.time_grid(), "positions"_a = trajectories(flow), "jacobian"_a = jx, "L"_a = track.L);
}

py::tuple evaluate(const std::string& field_id, const std::string& damping_id, int dimension, double T, double t,
                   const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != dimension) throw py::value_error("x must have `dimension` coordinates");
  const auto field = rt::make_velocity_field(field_id, dimension, T);
  const auto damping = rt::make_damping_field(damping_id, dimension, T);
  rt::Vec p(dimension);
  for (int j = 0; j < dimension; ++j) p[j] = x[static_cast<std::size_t>(j)];
  const auto s = rt::evaluate_field(field, damping, t, p);
  std::vector<double> b(static_cast<std::size_t>(dimension));
  for (int j = 0; j < dimension; ++j) b[static_cast<std::size_t>(j)] = s.b[j];
  return py::make_tuple(b, s.divb, s.c);
}

py::dict probe(const std::string& u0_id, const std::string& damping_id, double t, const std::vector<double>& etas) {
  const auto p = rt::integrability_probe(rt::make_initial_datum(u0_id, 1), rt::make_damping_field(damping_id, 1), t,
                                         etas);
  return py::dict("verdict"_a = p.verdict, "etas"_a = p.etas, "integrals"_a = p.integrals, "ratios"_a = p.ratios);
}

py::dict bmo_analysis(const Array& values, double M, const std::vector<double>& lambdas) {
  rt::SampledFunction f;
  f.lower = -2.0 * M;
  f.values.assign(values.data(), values.data() + values.size());
  if (f.values.empty()) throw py::value_error("values must be nonempty");
  f.spacing = 4.0 * M / static_cast<double>(f.values.size());
  const auto family = rt::dyadic_ball_family(M);
  rt::BMOProfile profile;
  rt::JNFit jn;
  {
    py::gil_scoped_release release;
    profile = rt::bmo_norm(std::move(f), M, family);
    jn = rt::jn_decay_check(profile, rt::default_eta_grid(profile.norm_star));
  }
  py::dict out("norm_star"_a = profile.norm_star, "c_fit"_a = jn.c_fit, "C_fit"_a = jn.C_fit,
               "decay_etas"_a = jn.etas, "decay_measures"_a = jn.measures);
  if (!lambdas.empty()) {
    const auto lemma = rt::lemma52_checks(profile, lambdas);
    out["average"] = lemma.average;
    out["average_bound"] = lemma.average_bound;
    out["lambdas"] = lemma.lambdas;
    out["T"] = lemma.T;
    out["lemma_c"] = lemma.c;
    out["lemma_r_squared"] = lemma.r_squared;
    out["lemma_passed"] = lemma.passed();
  }
  return out;
}

std::string run(const std::string& config_json) {
  const auto config = rt::parse_config(config_json);
  rt::RunReport report;
  {
    py::gil_scoped_release release;
    report = rt::run_scenario(config);
  }
  return report.to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lagrangian solutions of the damped continuity equation with rough coefficients";

  auto base = py::register_exception<rt::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<rt::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<rt::ValidationError>(m, "ValidationError", base.ptr());

  m.def("version", &rt::version_string);

  m.def("field_ids", &rt::velocity_field_ids);
  m.def("damping_ids", &rt::damping_field_ids);
  m.def("datum_ids", &rt::initial_datum_ids);
  m.def("evaluate_field", &evaluate, "field_id"_a, "damping_id"_a, "dimension"_a, "T"_a, "t"_a, "x"_a,
        "Returns (b, div b, c) at (t, x).");
  m.def("integrate_flow", &integrate, "field_id"_a, "dimension"_a, "T"_a, "points"_a, "steps"_a,
        "direction"_a = "forward",
        "RK4 trajectories and Jacobians: dict with times, positions (n, K+1, d), jacobian (n, K+1), L.");

  py::class_<rt::Renormalizer>(m, "Renormalizer")
      .def_readonly("label", &rt::Renormalizer::label)
      .def_readonly("sup_beta", &rt::Renormalizer::sup_beta)
      .def_readonly("sup_rbeta_prime", &rt::Renormalizer::sup_rbeta_prime)
      .def("beta", [](const rt::Renormalizer& r, double x) { return r.beta(x); })
      .def("beta_prime", [](const rt::Renormalizer& r, double x) { return r.beta_prime(x); })
      .def("sweep_sup_rbeta_prime", [](const rt::Renormalizer& r) { return rt::sweep_sup_rbeta_prime(r); })
      .def("admissible", [](const rt::Renormalizer& r) { return rt::check_admissible(r).passed(); });
  m.def("beta_arctan", &rt::make_beta_arctan, "M"_a);
  m.def("beta_log", &rt::make_beta_log, "delta"_a);
  m.def("arctan_contraction_gap", &rt::arctan_contraction_gap, "r1"_a, "r2"_a, "M"_a);

  py::class_<rt::TestFunctionPhiR>(m, "PhiR")
      .def(py::init<double, int>(), "R"_a, "dimension"_a)
      .def("eval_radial", &rt::TestFunctionPhiR::eval_radial)
      .def("grad_radial", &rt::TestFunctionPhiR::grad_radial)
      .def("l1_norm", &rt::TestFunctionPhiR::l1_norm)
      .def("tail_mass", &rt::TestFunctionPhiR::tail_mass);

  m.def("integrability_probe", &probe, "u0_id"_a, "damping_id"_a, "t"_a, "etas"_a);
  m.def("bmo_analysis", &bmo_analysis, "values"_a, "M"_a, "lambdas"_a = std::vector<double>{},
        "Mean-oscillation profile of midpoint samples on [-2M, 2M], with John-Nirenberg fit and optional "
        "superlevel integrals T(lambda).");

  m.def("list_scenarios",
        [](const std::string& filter) {
          std::vector<std::pair<std::string, std::string>> rows;
          for (const auto& s : rt::list_scenarios(filter)) rows.emplace_back(s.id, s.description);
          return rows;
        },
        "filter"_a = "");
  m.def("default_config_json", [](const std::string& id) { return rt::to_json(rt::default_config(id)).dump(); });
  m.def("run_scenario_json", &run, "config_json"_a);
}
