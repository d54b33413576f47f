// Python bindings. Values cross the boundary as JSON-compatible Python objects
// (dict, list, str, int, float, bool, None), converted through the json module.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "argeval/contest.hpp"
#include "argeval/eval.hpp"
#include "argeval/pipeline.hpp"
#include "argeval/store.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json to_cpp(const py::object& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(obj, py::arg("allow_nan") = false).cast<std::string>());
}

template <typename J>
py::object to_py(const J& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

argeval::CaseParameters params_arg(const py::object& obj) {
  return argeval::case_parameters_from_json(to_cpp(obj));
}

std::vector<argeval::GeneralQbaf> frameworks_arg(const py::list& items) {
  std::vector<argeval::GeneralQbaf> out;
  for (const auto& item : items) out.push_back(argeval::general_qbaf_from_json(to_cpp(py::reinterpret_borrow<py::object>(item))));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  using namespace argeval;
  m.doc() = "Quantitative argumentation for explainable decision support";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const StructuralError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const ConditionParseError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const ConditionEvalError& e) {
      py::set_error(PyExc_TypeError, e.what());
    } catch (const json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });
  // Registered last so they are tried first.
  py::register_exception<EditRejected>(m, "EditRejected", PyExc_ValueError);
  py::register_exception<NotFound>(m, "NotFound", PyExc_KeyError);

  // Argumentation frameworks
  m.def("aggregate", [](const std::vector<double>& v) { return df_quad_aggregate(v); }, py::arg("strengths"));
  m.def("combine", &df_quad_combine, py::arg("base"), py::arg("attack"), py::arg("support"));
  m.def("evaluate", [](const py::object& q) { return evaluate(qbaf_from_json(to_cpp(q))); }, py::arg("qbaf"),
        "Strength of every argument of a framework given as a dict.");
  m.def("root_strength", [](const py::object& q) { return root_strength(qbaf_from_json(to_cpp(q))); }, py::arg("qbaf"));

  // Conditions
  m.def("normalise_condition", [](const py::object& s) { return to_py(to_json(parse_condition(to_cpp(s)))); },
        py::arg("schema"), "Parses a condition schema and returns its canonical form.");
  m.def("eval_condition",
        [](const py::object& s, const py::object& p) { return eval_condition(parse_condition(to_cpp(s)), params_arg(p)); },
        py::arg("schema"), py::arg("params"));

  // Inference
  m.def("instantiate",
        [](const py::object& g, const py::object& p) {
          const auto inst = instantiate(general_qbaf_from_json(to_cpp(g)), params_arg(p));
          json removed = json::array();
          for (const auto& r : inst.removed) removed.push_back(to_json(r));
          return to_py(json{{"qbaf", to_json(inst.qbaf)}, {"removed", removed}});
        },
        py::arg("framework"), py::arg("params"));
  m.def("infer",
        [](const py::list& generals, const py::object& p) {
          return to_py(to_json(infer_with_params(frameworks_arg(generals), params_arg(p))));
        },
        py::arg("frameworks"), py::arg("params"), "Scores every framework against known case parameters.");

  // Evaluation
  m.def("label_match", [](double s, const std::string& l) { return eval::label_match(s, eval::label_from_string(l)); },
        py::arg("score"), py::arg("label"));
  m.def("ndcg",
        [](const std::map<std::string, double>& scores, const std::map<std::string, std::string>& labels,
           double recommended, double maybe, double not_recommended) {
          std::map<std::string, eval::Label> l;
          for (const auto& [k, v] : labels) l[k] = eval::label_from_string(v);
          return eval::ndcg_case(scores, l, {recommended, maybe, not_recommended});
        },
        py::arg("scores"), py::arg("labels"), py::arg("recommended") = 2.0, py::arg("maybe") = 1.0,
        py::arg("not_recommended") = 0.0);
  m.def("generate_grid",
        [](const py::list& grid) {
          eval::ParamGrid g;
          for (const auto& entry : grid) {
            const auto pair = entry.cast<py::tuple>();
            std::vector<ParamValue> values;
            for (const auto& v : to_cpp(pair[1])) values.push_back(param_value_from_json(v));
            g.emplace_back(pair[0].cast<std::string>(), std::move(values));
          }
          py::list out;
          for (const auto& p : eval::generate_grid(g)) out.append(to_py(to_json(p)));
          return out;
        },
        py::arg("grid"), "Cartesian product of (name, values) pairs; the first varies slowest.");

  // Artifact store
  py::class_<ArtifactStore>(m, "Store")
      .def_static("open", [](const std::string& root) { return ArtifactStore::open(root); }, py::arg("root"))
      .def_property_readonly("revision", &ArtifactStore::revision)
      .def_property_readonly("base_revision", &ArtifactStore::base_revision)
      .def("digest", [](const ArtifactStore& s) { return digest(s.snapshot()->artifacts); })
      .def("frameworks",
           [](const ArtifactStore& s) {
             py::list out;
             for (const auto& g : s.snapshot()->artifacts.frameworks()) out.append(to_py(to_json(g)));
             return out;
           })
      .def("contest",
           [](ArtifactStore& s, const py::object& c) { return to_py(to_json(s.contest(contestation_from_json(to_cpp(c))))); },
           py::arg("contestation"))
      .def("log",
           [](const ArtifactStore& s) {
             py::list out;
             for (const auto& r : s.log()) out.append(to_py(to_json(r)));
             return out;
           })
      .def("replay_digest",
           [](const ArtifactStore& s, std::optional<std::uint64_t> to) { return digest(s.replay(to)); },
           py::arg("to_revision") = py::none());
}
