#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "kantab/chain.hpp"
#include "kantab/control.hpp"
#include "kantab/error.hpp"
#include "kantab/io.hpp"
#include "kantab/kantor.hpp"
#include "kantab/oracle.hpp"
#include "kantab/refine.hpp"

namespace py = pybind11;
using namespace kantab;

namespace {

LabeledMarkovChain make_chain(const std::vector<std::vector<double>>& transition,
                              const std::vector<double>& initial,
                              const std::vector<Symbol>& labels, std::size_t alphabet_size) {
  LabeledMarkovChain c;
  c.alphabet = Alphabet::numeric(alphabet_size);
  c.transition = Matrix(transition.size());
  for (std::size_t i = 0; i < transition.size(); ++i) {
    if (transition[i].size() != transition.size())
      fail(ErrorKind::Validation, "transition matrix must be square");
    for (std::size_t j = 0; j < transition.size(); ++j) c.transition(i, j) = transition[i][j];
  }
  c.initial = initial;
  c.labels = labels;
  require_valid(c);
  return c;
}

std::vector<std::vector<double>> matrix_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m.size(); ++i) rows.emplace_back(m.row(i).begin(), m.row(i).end());
  return rows;
}

DynamicalSystem system_from(const std::optional<std::string>& path) {
  return path ? io::load_system(*path).system : benchmark_system();
}

}  // namespace

PYBIND11_MODULE(_kantab, m) {
  m.doc() = "Kantorovich metric between labeled Markov chains and adaptive abstraction";

  static py::exception<Error> kantab_error(m, "KantabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(kantab_error.ptr(), e.what());
    }
  });

  py::class_<LabeledMarkovChain>(m, "Chain")
      .def(py::init(&make_chain), py::arg("transition"), py::arg("initial"), py::arg("labels"),
           py::arg("alphabet_size") = 2)
      .def_property_readonly("n_states", &LabeledMarkovChain::n_states)
      .def_property_readonly("alphabet", [](const LabeledMarkovChain& c) { return c.alphabet.names(); })
      .def_property_readonly("transition", [](const LabeledMarkovChain& c) { return matrix_rows(c.transition); })
      .def_readonly("initial", &LabeledMarkovChain::initial)
      .def_readonly("labels", &LabeledMarkovChain::labels)
      .def("word_probability",
           [](const LabeledMarkovChain& c, const std::string& w) {
             return word_probability(c, parse_word(c.alphabet, w));
           })
      .def("to_json", [](const LabeledMarkovChain& c) { return io::serialize_chain(c); })
      .def(py::self == py::self);

  m.def("load_chain", &io::load_chain, py::arg("path"));
  m.def("parse_chain", [](const std::string& text) { return io::parse_chain(text); }, py::arg("text"));

  py::class_<MetricResult>(m, "MetricResult")
      .def_readonly("value", &MetricResult::value)
      .def_readonly("horizon", &MetricResult::horizon)
      .def_readonly("upper_bound", &MetricResult::upper_bound)
      .def_readonly("nodes_expanded", &MetricResult::nodes_expanded);

  m.def("kant_metric",
        [](const LabeledMarkovChain& a, const LabeledMarkovChain& b, int n) { return kant_metric(a, b, n); },
        py::arg("first"), py::arg("second"), py::arg("horizon"));
  m.def("chain_metric", &chain_metric, py::arg("first"), py::arg("second"), py::arg("epsilon"));
  m.def("horizon_for_accuracy", &horizon_for_accuracy, py::arg("epsilon"));
  m.def(
      "exact_kantorovich",
      [](const LabeledMarkovChain& a, const LabeledMarkovChain& b, int n) {
        return exact_kantorovich(enumerate_distribution(a, n), enumerate_distribution(b, n)).value;
      },
      py::arg("first"), py::arg("second"), py::arg("horizon"));
  m.def(
      "word_distribution",
      [](const LabeledMarkovChain& c, int n) {
        const auto d = enumerate_distribution(c, n);
        py::dict out;
        for (std::size_t i = 0; i < d.size(); ++i)
          out[py::str(format_word(d.alphabet, d.word(i)))] = d.probs[i];
        return out;
      },
      py::arg("chain"), py::arg("horizon"));

  m.def(
      "refine",
      [](std::optional<std::string> system, double epsilon, std::optional<std::size_t> max_iterations,
         const std::string& mode, std::size_t samples, std::uint64_t seed) {
        const auto sys = system_from(system);
        RefinementConfig cfg;
        cfg.epsilon = epsilon;
        cfg.max_iterations = max_iterations;
        if (mode != "exact" && mode != "sampled")
          fail(ErrorKind::InvalidArgument, "mode must be 'exact' or 'sampled'");
        cfg.mode = mode == "exact" ? MeasureMode::Exact : MeasureMode::Sampled;
        cfg.samples = samples;
        cfg.seed = seed;
        const auto r = refine(sys, cfg);
        return py::module_::import("json").attr("loads")(io::trace_to_json(sys, r.trace).dump());
      },
      py::arg("system") = py::none(), py::arg("epsilon") = 1e-3, py::arg("max_iterations") = py::none(),
      py::arg("mode") = "exact", py::arg("samples") = 1'000'000, py::arg("seed") = 1);

  m.def(
      "control",
      [](std::optional<std::string> system, double gamma, std::size_t trajectories,
         std::size_t length, std::uint64_t seed) {
        io::SystemDocument doc = system ? io::load_system(*system)
                                        : io::SystemDocument{benchmark_system(), benchmark_controlled_system()};
        if (!doc.controlled) fail(ErrorKind::Validation, "system document has no control section");
        ControlConfig cfg;
        cfg.gamma = gamma;
        cfg.trajectories = trajectories;
        cfg.length = length;
        cfg.seed = seed;
        const auto report = run_control_pipeline(*doc.controlled, cfg);
        return py::module_::import("json").attr("loads")(io::control_to_json(doc.system, report).dump());
      },
      py::arg("system") = py::none(), py::arg("gamma") = 0.95, py::arg("trajectories") = 5000,
      py::arg("length") = 1000, py::arg("seed") = 1);
}
