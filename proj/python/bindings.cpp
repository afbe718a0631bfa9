#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "lacuna/circleset.hpp"
#include "lacuna/construct.hpp"
#include "lacuna/error.hpp"
#include "lacuna/io.hpp"
#include "lacuna/plan.hpp"
#include "lacuna/trigpoly.hpp"
#include "lacuna/verify.hpp"

namespace py = pybind11;
using namespace lacuna;

namespace {

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(dump_json(j)); }

json from_python(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::array_t<cplx> to_array(std::span<const cplx> values) {
  py::array_t<cplx> out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::list arcs_list(const ArcSet& s) {
  py::list out;
  for (const Arc& a : s.arcs()) out.append(py::make_tuple(a.start, a.end));
  return out;
}

ArcSet arcs_from(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<Arc> arcs;
  arcs.reserve(pairs.size());
  for (const auto& [s, e] : pairs) arcs.push_back({s, e});
  return ArcSet::from_arcs(std::move(arcs));
}

}  // namespace

PYBIND11_MODULE(_lacuna, m) {
  m.doc() = "Inductive construction of lacunary trigonometric sums with certified bounds";
  m.attr("__version__") = kVersion;

  static py::exception<Error> error_type(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object index = e.index() ? py::object(py::int_(*e.index())) : py::object(py::none());
      PyErr_SetObject(error_type.ptr(),
                      py::make_tuple(std::string(error_name(e.code())), e.detail(), index).ptr());
    }
  });

  // ---- plans
  py::class_<FrequencyPlan>(m, "Plan")
      .def_readonly("q", &FrequencyPlan::q)
      .def_readonly("reduced", &FrequencyPlan::reduced)
      .def_readonly("warnings", &FrequencyPlan::warnings)
      .def_property_readonly("blocks",
                             [](const FrequencyPlan& p) {
                               py::list out;
                               for (const Block& b : p.blocks) out.append(py::make_tuple(b.m, b.d, b.d_eff));
                               return out;
                             })
      .def("__len__", &FrequencyPlan::size)
      .def("to_json", [](const FrequencyPlan& p) { return to_python(plan_to_json(p)); })
      .def("__repr__", [](const FrequencyPlan& p) {
        return "<Plan q=" + std::to_string(p.q) + " blocks=" + std::to_string(p.size()) + ">";
      });

  m.def(
      "preset",
      [](const std::string& name, const py::kwargs& kwargs) {
        PresetParams params;
        for (const auto& [k, v] : kwargs) params[k.cast<std::string>()] = v.cast<double>();
        return preset(name, params);
      },
      py::arg("name"));
  m.def(
      "validate",
      [](double q, const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) { return validate(q, pairs); },
      py::arg("q"), py::arg("blocks"));
  m.def("reduce_widths", &reduce_widths, py::arg("plan"));
  m.def("plan_from_json", [](const py::object& obj) { return plan_from_json(from_python(obj)); });

  // ---- trigonometric polynomials
  py::class_<TrigPoly>(m, "TrigPoly")
      .def(py::init([](std::int64_t min_freq, const std::vector<cplx>& coeffs, bool padded) {
             return TrigPoly(min_freq, coeffs, padded);
           }),
           py::arg("min_freq"), py::arg("coeffs"), py::arg("padded") = false)
      .def_property_readonly("min_freq", &TrigPoly::min_freq)
      .def_property_readonly("max_freq", &TrigPoly::max_freq)
      .def_property_readonly("degree", &TrigPoly::degree)
      .def_property_readonly("coeffs", [](const TrigPoly& p) { return to_array(p.coeffs()); })
      .def("coeff", &TrigPoly::coeff, py::arg("freq"))
      .def("coeff_l1", &TrigPoly::coeff_l1)
      .def("__call__", [](const TrigPoly& p, double x) { return p(x); })
      .def("__call__",
           [](const TrigPoly& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& xs) {
             py::array_t<cplx> out(xs.request().shape);
             const double* in = xs.data();
             cplx* dst = out.mutable_data();
             for (py::ssize_t i = 0; i < xs.size(); ++i) dst[i] = p(in[i]);
             return out;
           })
      .def(
          "samples", [](const TrigPoly& p, std::size_t grid) { return to_array(sample(p, grid)); },
          py::arg("grid"), "Values at x_k = 2 pi k / grid")
      .def(
          "sup_norm",
          [](const TrigPoly& p, int oversample) {
            const NormBracket b = sup_norm(p, oversample);
            return py::make_tuple(b.lower, b.upper);
          },
          py::arg("oversample") = 16, "Certified (lower, upper) bracket for the sup norm")
      .def("l2_norm", [](const TrigPoly& p) { return l2_norm(p); })
      .def(
          "real_part",
          [](const TrigPoly& p) {
            const RealTrigPoly r = real_part(p);
            return py::make_tuple(r.cos_coeffs, r.sin_coeffs);
          },
          "Cosine and sine coefficient lists of Re p")
      .def("__add__", [](const TrigPoly& a, const TrigPoly& b) { return sum(a, b); })
      .def("__eq__", [](const TrigPoly& a, const TrigPoly& b) { return a == b; })
      .def("__len__", &TrigPoly::size);

  m.def("fejer", &fejer, py::arg("d"));
  m.def("modulate", &modulate, py::arg("p"), py::arg("shift"));

  // ---- arc sets
  py::class_<ArcSet>(m, "ArcSet")
      .def(py::init(&arcs_from), py::arg("arcs"))
      .def_static("full_circle", &ArcSet::full_circle)
      .def_property_readonly("arcs", &arcs_list)
      .def_property_readonly("full", &ArcSet::full)
      .def_property_readonly("empty", &ArcSet::empty)
      .def("measure", &ArcSet::measure)
      .def("components", &ArcSet::components)
      .def("contains", &ArcSet::contains, py::arg("x"), py::arg("tol") = 0.0)
      .def("expand", [](const ArcSet& a, double eps) { return expand(a, eps); }, py::arg("eps"))
      .def("__or__", [](const ArcSet& a, const ArcSet& b) { return unite(a, b); })
      .def("__eq__", [](const ArcSet& a, const ArcSet& b) { return a == b; });

  m.def(
      "superlevel_arcs",
      [](const TrigPoly& p, double theta, int oversample, bool refine) {
        SuperlevelOptions o;
        o.oversample = oversample;
        o.refine = refine;
        return superlevel_arcs(p, theta, o);
      },
      py::arg("p"), py::arg("theta"), py::arg("oversample") = 8, py::arg("refine") = false);
  m.def(
      "survivors", [](const ArcSet& a, std::int64_t d) { return survivors(a, d); }, py::arg("arcs"), py::arg("d"));

  // ---- construction
  py::class_<ConstantProfile>(m, "Profile")
      .def(py::init([](double alpha, double gamma, double c_H, double a_offset, double a_slope,
                       std::optional<double> beta) {
             ConstantProfile p;
             p.alpha = alpha;
             p.gamma = gamma;
             p.c_H = c_H;
             p.a_offset = a_offset;
             p.a_slope = a_slope;
             p.beta_override = beta;
             p.validate();
             return p;
           }),
           py::arg("alpha") = 316.0, py::arg("gamma") = 210.0, py::arg("c_H") = 1.0, py::arg("a_offset") = 45.0,
           py::arg("a_slope") = 30.0, py::arg("beta") = py::none())
      .def_readonly("alpha", &ConstantProfile::alpha)
      .def_readonly("gamma", &ConstantProfile::gamma)
      .def_readonly("c_H", &ConstantProfile::c_H)
      .def_readonly("a_offset", &ConstantProfile::a_offset)
      .def_readonly("a_slope", &ConstantProfile::a_slope)
      .def_property_readonly("beta", &ConstantProfile::beta)
      .def_property_readonly("is_paper", &ConstantProfile::is_paper);

  py::class_<RunState>(m, "Run")
      .def_property_readonly("completed", &RunState::completed)
      .def_readonly("plan", &RunState::plan)
      .def_readonly("profile", &RunState::profile)
      .def("delta", &RunState::delta, py::arg("n"), py::return_value_policy::copy)
      .def("partial_sum", &RunState::partial_sum, py::arg("n"), py::return_value_policy::copy)
      .def(
          "envelope", [](const RunState& s, std::size_t n) { return s.envelopes.at(n - 1); }, py::arg("n"))
      .def(
          "record", [](const RunState& s, std::size_t n) { return to_python(record_to_json(s.record(n))); },
          py::arg("n"))
      .def(
          "lambda_", [](const RunState& s, std::size_t n) { return s.record(n).lambda; }, py::arg("n"),
          "Survivor lattice indices of step n")
      .def(
          "step", [](RunState& s) { return to_python(record_to_json(step(s))); },
          "Run one more step and return its record");

  m.def(
      "init",
      [](const FrequencyPlan& plan, const std::optional<ConstantProfile>& profile, std::size_t threads, bool refine,
         int sup_oversample, int superlevel_oversample) {
        ConstructOptions o;
        o.threads = threads;
        o.superlevel.refine = refine;
        o.sup_oversample = sup_oversample;
        o.superlevel.oversample = superlevel_oversample;
        return init(plan.reduced ? plan : reduce_widths(plan), profile.value_or(ConstantProfile{}), o);
      },
      py::arg("plan"), py::arg("profile") = py::none(), py::arg("threads") = 0, py::arg("refine") = false,
      py::arg("sup_oversample") = 16, py::arg("superlevel_oversample") = 8);

  m.def(
      "run",
      [](const FrequencyPlan& plan, const std::optional<ConstantProfile>& profile, std::optional<std::size_t> steps,
         std::size_t threads, bool refine, int sup_oversample, int superlevel_oversample) {
        ConstructOptions o;
        o.threads = threads;
        o.superlevel.refine = refine;
        o.sup_oversample = sup_oversample;
        o.superlevel.oversample = superlevel_oversample;
        const FrequencyPlan p = plan.reduced ? plan : reduce_widths(plan);
        py::gil_scoped_release release;
        return run(p, profile.value_or(ConstantProfile{}), steps.value_or(p.size()), {}, o);
      },
      py::arg("plan"), py::arg("profile") = py::none(), py::arg("steps") = py::none(), py::arg("threads") = 0,
      py::arg("refine") = false, py::arg("sup_oversample") = 16, py::arg("superlevel_oversample") = 8);

  m.def("kernel_sum_envelope",
        [](std::int64_t d, const std::vector<std::int64_t>& lambda) { return kernel_sum_envelope(d, lambda); },
        py::arg("d"), py::arg("lattice"));

  // ---- verification
  m.def(
      "verify",
      [](const RunState& state, bool majorant, std::size_t tail_points) {
        VerifyOptions o;
        o.majorant = majorant;
        o.tail_points = tail_points;
        VerificationReport rep;
        {
          py::gil_scoped_release release;
          rep = verify_run(state, o);
        }
        return to_python(report_to_json(rep));
      },
      py::arg("run"), py::arg("majorant") = true, py::arg("tail_points") = 64);
  m.def(
      "series_identity",
      [](double q, std::int64_t a) {
        const SeriesIdentity s = series_identity(q, a);
        py::dict out;
        out["closed_form"] = s.closed_form;
        out["bound"] = s.bound ? py::object(py::float_(*s.bound)) : py::object(py::none());
        out["oracle_diff"] = s.oracle_diff;
        out["terms"] = s.terms;
        return out;
      },
      py::arg("q"), py::arg("a"));
  m.def("theorem_rhs", &theorem_rhs, py::arg("run"), py::arg("N"));

  // ---- persistence
  m.def(
      "save_run",
      [](const std::string& dir, const RunState& state, const std::string& source) {
        RunManifestInfo info;
        info.plan_source = source;
        info.threads = state.options.threads;
        save_run(dir, state, info);
      },
      py::arg("dir"), py::arg("run"), py::arg("source") = "python");
  m.def(
      "load_run", [](const std::string& dir) { return load_run(dir); }, py::arg("dir"));
}
