#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sqpm/axioms.hpp"
#include "sqpm/convex.hpp"
#include "sqpm/cost.hpp"
#include "sqpm/error.hpp"
#include "sqpm/market.hpp"
#include "sqpm/scenario.hpp"
#include "sqpm/traders.hpp"

namespace py = pybind11;

namespace {

sqpm::CostFunctionSpec spec_of(const std::string& family, double L, std::size_t d) {
  sqpm::CostFunctionSpec spec{sqpm::parse_cost_family(family), L, d};
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_sqpm, m) {
  m.doc() = "Smooth quadratic prediction market core";

  py::register_exception<sqpm::error>(m, "Error", PyExc_ValueError);

  m.def("project_simplex", [](const sqpm::Vec& x) { return sqpm::project_simplex(x); }, py::arg("x"));

  m.def(
      "cost",
      [](const std::string& family, double L, const sqpm::Vec& q) {
        return sqpm::cost(spec_of(family, L, q.size()), q);
      },
      py::arg("family"), py::arg("L"), py::arg("q"));
  m.def(
      "price",
      [](const std::string& family, double L, const sqpm::Vec& q) {
        return sqpm::grad(spec_of(family, L, q.size()), q);
      },
      py::arg("family"), py::arg("L"), py::arg("q"));

  m.def(
      "quote",
      [](const std::string& family, double L, const sqpm::Vec& q, const sqpm::Vec& r,
         const std::string& rule, const std::string& norm) {
        const auto state = sqpm::make_market(spec_of(family, L, q.size()), q, sqpm::parse_norm(norm));
        const auto pq = sqpm::quote(state, r, sqpm::parse_payment_rule(rule));
        py::dict out;
        out["linear_part"] = pq.linear_part;
        out["fee_part"] = pq.fee_part;
        out["total"] = pq.total;
        return out;
      },
      py::arg("family"), py::arg("L"), py::arg("q"), py::arg("r"), py::arg("rule") = "smoothquad",
      py::arg("norm") = "l2");

  m.def(
      "steepest_step",
      [](const sqpm::Vec& g, double L, const std::string& norm) {
        return sqpm::steepest_step(g, L, sqpm::parse_norm(norm));
      },
      py::arg("g"), py::arg("L"), py::arg("norm") = "l2");

  m.def(
      "run_scenario",
      [](const std::string& text) {
        const auto config = sqpm::parse_config(text, "<python>");
        const auto result = sqpm::run_scenario(config);
        std::ostringstream trace, ledger;
        sqpm::write_trace_csv(trace, result.trace, result.volumes);
        sqpm::write_ledger_csv(ledger, result.ledger);
        py::dict out;
        out["summary"] = sqpm::summary_json(result.summary);
        out["trace_csv"] = trace.str();
        out["ledger_csv"] = ledger.str();
        return out;
      },
      py::arg("config_text"),
      "Runs a scenario given the text of a config file. Returns the summary JSON "
      "and the trace and ledger CSV text.");

  m.def(
      "axioms",
      [](std::size_t samples, std::uint64_t seed) {
        py::list out;
        for (const auto& r : sqpm::run_axiom_suite(samples, seed)) {
          py::dict row;
          row["name"] = r.name;
          row["checked"] = r.checked;
          row["failures"] = r.failures;
          row["worst_margin"] = r.worst_margin;
          row["gated"] = r.gated;
          row["passed"] = r.passed();
          out.append(row);
        }
        return out;
      },
      py::arg("samples") = 1000, py::arg("seed") = 0);
}
