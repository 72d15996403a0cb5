#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ppconv/convergence.hpp"
#include "ppconv/density.hpp"
#include "ppconv/experiments.hpp"
#include "ppconv/point_process.hpp"
#include "ppconv/runs.hpp"
#include "ppconv/tessellation.hpp"
#include "ppconv/voronoi.hpp"

namespace py = pybind11;
using namespace ppconv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointConfig to_config(const Array& pts, int dim) {
  if (pts.ndim() == 1 && pts.shape(0) == 0) return PointConfig(dim, GeneratorMeta{});
  if (pts.ndim() != 2 || pts.shape(1) != dim) {
    throw Error(Errc::domain, "points must have shape (n, " + std::to_string(dim) + ")");
  }
  PointConfig c(dim, GeneratorMeta{});
  c.reserve(static_cast<std::size_t>(pts.shape(0)));
  const double* p = pts.data();
  for (py::ssize_t i = 0; i < pts.shape(0); ++i) c.push_back(PointView(p + i * dim, static_cast<std::size_t>(dim)));
  return c;
}

Array to_array(const PointConfig& c) {
  Array out({static_cast<py::ssize_t>(c.size()), static_cast<py::ssize_t>(c.dim())});
  std::copy(c.coords().begin(), c.coords().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> point(const Array& x) {
  if (x.ndim() != 1) throw Error(Errc::domain, "a point must be one-dimensional");
  return {x.data(), x.data() + x.shape(0)};
}

py::dict sample_dict(const RescaledSample& s) {
  py::dict d;
  d["atoms"] = to_array(s.atoms);
  d["materialized_below"] = s.materialized_below;
  d["above_cap"] = s.above_cap;
  d["dropped_unbounded"] = s.dropped_unbounded;
  d["transform"] = s.meta.transform;
  return d;
}

TargetLaw target_law(const std::string& name, double shape, double mass) {
  if (name == "gumbel") return TargetLaw::gumbel();
  if (name == "exp") return TargetLaw::exp_unit();
  if (name == "weibull") return TargetLaw::weibull(shape, mass);
  throw Error(Errc::domain, "target must be gumbel, exp or weibull");
}

InradiusVariant variant(const std::string& name) {
  if (name == "two_c") return InradiusVariant::two_c;
  if (name == "two_pow_d_c") return InradiusVariant::two_pow_d_c;
  throw Error(Errc::domain, "variant must be two_c or two_pow_d_c");
}

}  // namespace

PYBIND11_MODULE(_ppconv, m) {
  m.doc() = "Poisson process convergence lab";

  // message starts with the error code, e.g. "domain: ..."
  py::register_exception<Error>(m, "PpconvError", PyExc_ValueError);

  py::class_<Box>(m, "Box")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("lo"), py::arg("hi"))
      .def_static("cube", &Box::cube, py::arg("dim"), py::arg("lo"), py::arg("hi"))
      .def_readonly("lo", &Box::lo)
      .def_readonly("hi", &Box::hi)
      .def_property_readonly("dim", &Box::dim)
      .def("volume", &Box::volume);

  py::class_<Window>(m, "Window")
      .def(py::init<Box>(), py::arg("box"))
      .def_property_readonly("dim", &Window::dim)
      .def("__repr__", &Window::describe);

  py::class_<DensityModel>(m, "Density")
      .def_static("constant", &DensityModel::constant, py::arg("dim"), py::arg("c"), py::arg("support"))
      .def_static("linear", &DensityModel::linear, py::arg("dim"), py::arg("a"), py::arg("b"), py::arg("support"))
      .def_static("step", &DensityModel::step, py::arg("support"), py::arg("cells"), py::arg("values"))
      .def_property_readonly("dim", &DensityModel::dim)
      .def_property_readonly("support", &DensityModel::support)
      .def("__call__", [](const DensityModel& f, const Array& y) { return f(point(y)); })
      .def(
          "ball_measure",
          [](const DensityModel& f, const Array& x, double r) { return ball_measure(f, point(x), r); },
          py::arg("center"), py::arg("radius"))
      .def(
          "invert_ball_measure",
          [](const DensityModel& f, const Array& x, double mass) { return invert_ball_measure(f, point(x), mass); },
          py::arg("center"), py::arg("mass"))
      .def("__repr__", &DensityModel::describe);

  m.def(
      "sample_poisson",
      [](const DensityModel& f, double t, const Box& box, std::uint64_t seed, std::uint64_t stream) {
        return to_array(sample_poisson(f, t, box, seed, stream));
      },
      py::arg("density"), py::arg("t"), py::arg("box"), py::arg("seed"), py::arg("stream") = 0);

  m.def(
      "inradius",
      [](const Array& x, const Array& pts) {
        const auto p = point(x);
        return inradius(p, to_config(pts, static_cast<int>(p.size())));
      },
      py::arg("x"), py::arg("points"));
  m.def(
      "circumradius",
      [](const Array& x, const Array& pts) {
        const auto p = point(x);
        return circumradius(p, to_config(pts, static_cast<int>(p.size())));
      },
      py::arg("x"), py::arg("points"), "inf when the cell is unbounded");
  m.def(
      "is_cell_bounded",
      [](const Array& x, const Array& pts) {
        const auto p = point(x);
        return is_cell_bounded(p, to_config(pts, static_cast<int>(p.size())));
      },
      py::arg("x"), py::arg("neighbors"));
  m.def(
      "estimate_p_k",
      [](int d, int k, std::size_t n, std::uint64_t seed) {
        const auto e = estimate_p_k(d, k, n, seed);
        return py::make_tuple(e.value, e.std_error);
      },
      py::arg("d"), py::arg("k"), py::arg("n_samples"), py::arg("seed"));
  m.def("alpha2", &alpha2, py::arg("d"), py::arg("p"));

  m.def(
      "inradius_process",
      [](const DensityModel& f, const Window& w, double t, std::uint64_t seed, const std::string& v,
         std::uint64_t stream) { return sample_dict(inradius_process(f, w, t, seed, variant(v), stream)); },
      py::arg("density"), py::arg("window"), py::arg("t"), py::arg("seed"), py::arg("variant") = "two_c",
      py::arg("stream") = 0);
  m.def(
      "circumradius_process",
      [](const DensityModel& f, const Window& w, double t, std::uint64_t seed, double a2, std::uint64_t stream,
         double cap) { return sample_dict(circumradius_process(f, w, t, seed, a2, stream, cap)); },
      py::arg("density"), py::arg("window"), py::arg("t"), py::arg("seed"), py::arg("alpha2"),
      py::arg("stream") = 0, py::arg("cap") = std::numeric_limits<double>::infinity());

  py::class_<BernoulliModel>(m, "BernoulliModel")
      .def_static(
          "iid", [](double scale, double exponent, int k) { return BernoulliModel::iid({scale, exponent}, k); },
          py::arg("scale"), py::arg("exponent"), py::arg("k"))
      .def_static(
          "block",
          [](double scale, double exponent, int m_, int k) { return BernoulliModel::block({scale, exponent}, m_, k); },
          py::arg("scale"), py::arg("exponent"), py::arg("m"), py::arg("k"))
      .def_readonly("k", &BernoulliModel::k)
      .def("y", &BernoulliModel::y, py::arg("n"))
      .def("horizon", &BernoulliModel::horizon, py::arg("n"), py::arg("extent"));

  m.def(
      "run_process",
      [](const BernoulliModel& model, std::uint64_t n, double extent, std::uint64_t seed, std::uint64_t stream) {
        const auto bits = simulate_bernoulli_array(model, n, model.horizon(n, extent), seed, stream);
        return sample_dict(build_run_process(bits, model.k, model.y(n)));
      },
      py::arg("model"), py::arg("n"), py::arg("extent"), py::arg("seed"), py::arg("stream") = 0);
  m.def(
      "run_indicators",
      [](const std::vector<int>& bits, int k) { return run_indicators(BitSequence::from_dense(bits), k).to_dense(); },
      py::arg("bits"), py::arg("k"));

  m.def(
      "ks_distance",
      [](std::vector<double> values, const std::string& target, double shape, double mass) {
        return ks_distance(std::move(values), target_law(target, shape, mass)).statistic;
      },
      py::arg("values"), py::arg("target"), py::arg("shape") = 1.0, py::arg("mass") = 1.0);
  m.def(
      "consecutive_ratio_statistic",
      [](const std::vector<std::size_t>& counts, double lambda, int k) {
        const auto e = consecutive_ratio_statistic(EmpiricalLaw::from_counts(counts, lambda), k);
        return py::make_tuple(e.value, e.std_error);
      },
      py::arg("counts"), py::arg("lam"), py::arg("k"));

  m.def("experiment_kinds", &experiment_kinds);
  m.def(
      "describe_json",
      [](const std::string& text) { return ExperimentConfig::from_json(Json::parse(text)).describe().dump(); },
      py::arg("config"));
  m.def(
      "run_experiment_json",
      [](const std::string& text) {
        const auto cfg = ExperimentConfig::from_json(Json::parse(text));
        Report r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        return report_json_text(r);
      },
      py::arg("config"));
}
