#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "probthread/analysis.hpp"
#include "probthread/error.hpp"
#include "probthread/interaction.hpp"
#include "probthread/interleaving.hpp"
#include "probthread/pglb.hpp"
#include "probthread/service.hpp"
#include "probthread/term.hpp"

namespace py = pybind11;
using namespace probthread;

namespace {

SchedulerSpec scheduler_from(const std::string& name, const std::optional<std::string>& table) {
  return table ? table_scheduler(*table) : builtin_scheduler(name);
}

py::dict distribution_dict(const OutcomeDistribution& d) {
  py::dict out;
  out["terminate"] = d.terminate.to_string();
  out["deadlock"] = d.deadlock.to_string();
  out["surviving"] = d.surviving.to_string();
  if (d.traces) {
    py::dict traces;
    for (const auto& [key, p] : *d.traces) traces[py::str(key)] = p.to_string();
    out["traces"] = traces;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<OutOfRange>(m, "OutOfRange", error.ptr());
  py::register_exception<MalformedProbability>(m, "MalformedProbability", error.ptr());
  py::register_exception<WeightSumNotOne>(m, "WeightSumNotOne", error.ptr());
  py::register_exception<UnguardedRecursion>(m, "UnguardedRecursion", error.ptr());
  py::register_exception<NonRegularProduct>(m, "NonRegularProduct", error.ptr());
  py::register_exception<MissingReply>(m, "MissingReply", error.ptr());

  py::class_<ThreadGraph>(m, "Thread")
      .def(py::init([](const std::string& text) { return parse_thread(text); }), py::arg("text"))
      .def("__str__", [](const ThreadGraph& g) { return format_thread(normalize(g)); })
      .def("__repr__", [](const ThreadGraph& g) { return "Thread('" + format_thread(normalize(g)) + "')"; })
      .def("__eq__", [](const ThreadGraph& a, const ThreadGraph& b) { return normalize(a) == normalize(b); })
      .def("__hash__", [](const ThreadGraph& g) { return py::hash(py::str(format_thread(normalize(g)))); })
      .def("size", &ThreadGraph::size)
      .def("project", [](const ThreadGraph& g, std::size_t n) { return project(n, g); }, py::arg("depth"))
      .def("equal_up_to", [](const ThreadGraph& a, const ThreadGraph& b, std::size_t n) { return equal_up_to(n, a, b); },
           py::arg("other"), py::arg("depth"))
      .def("bisimilar", [](const ThreadGraph& a, const ThreadGraph& b) { return bisimilar(a, b); }, py::arg("other"));

  m.def("use", [](const ThreadGraph& g, const std::string& family) {
    return use(g, ServiceRegistry::with_builtins().parse_family(family));
  }, py::arg("thread"), py::arg("services"));
  m.def("abstract_tau", &abstract_tau, py::arg("thread"));
  m.def("extract", [](const std::string& program, bool abstraction, bool use_random, std::size_t entry) {
    pglb::ExtractOptions options;
    options.abstraction = abstraction;
    options.use_random = use_random;
    auto p = pglb::parse(program);
    if (entry != 1) return entry == 0 || entry > p.size() ? ThreadGraph::dead_end() : pglb::extract_at(entry, p);
    return pglb::extract(p, options);
  }, py::arg("program"), py::arg("abstraction") = true, py::arg("use_random") = true, py::arg("entry") = 1);
  m.def("interleave", [](const std::vector<ThreadGraph>& threads, const std::string& scheduler,
                         const std::optional<std::string>& table) {
    auto spec = scheduler_from(scheduler, table);
    return interleave(spec, {}, spec.initial_state, threads);
  }, py::arg("threads"), py::arg("scheduler") = "cyclic", py::arg("table") = std::nullopt);
  m.def("outcome_distribution", [](const ThreadGraph& g, std::size_t depth, const std::string& env, bool traces) {
    return distribution_dict(outcome_distribution(g, Environment::parse(env), depth, traces));
  }, py::arg("thread"), py::arg("depth"), py::arg("env") = "", py::arg("traces") = false);
  m.def("sample", [](const ThreadGraph& g, std::size_t depth, std::uint64_t seed, std::size_t runs, const std::string& env) {
    auto s = sample_runs(g, Environment::parse(env), depth, seed, runs);
    py::dict out;
    out["runs"] = s.runs;
    out["terminate"] = s.terminate;
    out["deadlock"] = s.deadlock;
    out["surviving"] = s.surviving;
    return out;
  }, py::arg("thread"), py::arg("depth"), py::arg("seed"), py::arg("runs") = 1, py::arg("env") = "");
}
