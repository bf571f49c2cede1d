#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sqpm/axioms.hpp"
#include "sqpm/error.hpp"
#include "sqpm/scenario.hpp"

using namespace sqpm;
using doctest::Approx;

namespace {

const char* kTernary = R"(# ternary market
cost = softmax
l = 1
norm = l2
q0 = 10, 20, 10
belief = 1/6, 1/6, 2/3
rounds = 200
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.cfg");
  } catch (const config_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing") {
  const ScenarioConfig cfg = parse_config(kTernary);
  CHECK(cfg.dimension() == 3);
  CHECK(cfg.cost.family == CostFamily::Softmax);
  CHECK(cfg.q0 == Vec{10, 20, 10});
  CHECK(cfg.belief[2] == Approx(2.0 / 3.0));
  CHECK(cfg.rounds == 200);
  CHECK(cfg.seed == 0);
  CHECK_FALSE(cfg.liquidity);
  CHECK(cfg.mode == TraderMode::Unconstrained);
}

TEST_CASE("config diagnostics") {
  CHECK(error_of("belief = 0.3, 0.3, 0.3\nrounds = 5\n").find("belief not on simplex") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = 5\ncolour = red\n").find("test.cfg:3") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = 5\nrounds = 6\n").find("twice") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = five\n").find("'rounds'") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\n").find("rounds") != std::string::npos);
  CHECK(error_of("belief = 1, 0\nrounds = 5\n").find("strictly interior") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = 5\nnorm = l1\n").find("experimental_l1") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = 5\nkappa = 1\n").find("liquidity is off") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = 5\ntrader = budgeted\n").find("budget") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nq0 = 1, 2, 3\nrounds = 5\n").find("q0") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = 5\nl = 1/0\n").find("division") != std::string::npos);
  CHECK(error_of("belief = 0.5, 0.5\nrounds = 5\nnorm = l7\n").find("norm") != std::string::npos);
  CHECK(error_of("just text\n").find("key = value") != std::string::npos);
  // sparsemax allows boundary beliefs
  CHECK(error_of("cost = sparsemax\nbelief = 1, 0\nrounds = 5\n").empty());
}

TEST_CASE("load_config names the scenario after the file") {
  const auto dir = std::filesystem::temp_directory_path() / "sqpm_unit_cfg";
  std::filesystem::create_directories(dir);
  const auto path = dir / "my_run.cfg";
  std::ofstream(path) << kTernary;
  CHECK(load_config(path).name == "my_run");
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), config_error);
}

TEST_CASE("scenario run and serialization round trip") {
  const ScenarioConfig cfg = parse_config(kTernary);
  const ScenarioResult res = run_scenario(cfg);
  CHECK(res.trace.rows.size() == cfg.rounds + 1);
  CHECK(res.summary.final_l1_gap < 1e-3);
  CHECK(res.summary.total_revenue == res.ledger.cumulative_revenue);

  std::stringstream trace_text;
  write_trace_csv(trace_text, res.trace);
  const ConvergenceTrace back = read_trace_csv(trace_text);
  REQUIRE(back.rows.size() == res.trace.rows.size());
  CHECK(back.q_star == res.trace.q_star);
  CHECK(back.smoothness == res.trace.smoothness);
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    CHECK(back.rows[i].q == res.trace.rows[i].q);
    CHECK(back.rows[i].suboptimality == res.trace.rows[i].suboptimality);
  }

  std::stringstream ledger_text;
  write_ledger_csv(ledger_text, res.ledger);
  const Ledger ledger = read_ledger_csv(ledger_text);
  REQUIRE(ledger.records.size() == res.ledger.records.size());
  CHECK(ledger.cumulative_revenue == res.ledger.cumulative_revenue);
  CHECK(ledger.records[5].bundle == res.ledger.records[5].bundle);
  CHECK(ledger.records[5].post_price == res.ledger.records[5].post_price);

  std::stringstream junk("# sqpm-trace=2\n");
  CHECK_THROWS_AS(read_trace_csv(junk), invalid_input);
}

TEST_CASE("failure marker row") {
  ScenarioConfig cfg = parse_config(kTernary);
  cfg.mode = TraderMode::Budgeted;
  cfg.budget = 0.01;
  cfg.solver.max_iters = 1;
  const ScenarioResult res = run_scenario(cfg);
  REQUIRE(res.summary.failure.has_value());
  CHECK(res.summary.numeric_failure);
  std::stringstream out;
  write_trace_csv(out, res.trace);
  CHECK(out.str().find("# FAILED=round ") != std::string::npos);
  const ConvergenceTrace back = read_trace_csv(out);
  CHECK(back.failure == res.trace.failure);
}

TEST_CASE("liquidity scenario carries volumes") {
  const std::string text = std::string(kTernary) + "liquidity = true\nalpha0 = 1\nkappa = 1\n";
  const ScenarioResult res = run_scenario(parse_config(text));
  CHECK(res.volumes.size() == res.trace.rows.size());
  for (std::size_t i = 1; i < res.volumes.size(); ++i) CHECK(res.volumes[i] >= res.volumes[i - 1]);
  CHECK(res.ledger.records.front().volume.has_value());
  std::stringstream ledger_text;
  write_ledger_csv(ledger_text, res.ledger);
  CHECK(read_ledger_csv(ledger_text).records.back().volume->v_post == res.volumes.back());

  // kappa = 0 reproduces the flat run
  const ScenarioResult flat = run_scenario(parse_config(kTernary));
  const ScenarioResult still = run_scenario(parse_config(std::string(kTernary) + "liquidity = true\nkappa = 0\n"));
  for (std::size_t i = 0; i < flat.trace.rows.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(std::abs(flat.trace.rows[i].q[k] - still.trace.rows[i].q[k]) <= 1e-12);
    }
    CHECK(std::abs(flat.trace.rows[i].revenue - still.trace.rows[i].revenue) <= 1e-12);
  }
}

TEST_CASE("figure data") {
  const ScenarioResult res = run_scenario(parse_config(kTernary));
  std::stringstream path;
  emit_figure_data(path, res.trace, FigureStyle::SimplexPath);
  std::string line, last;
  std::getline(path, line);
  CHECK(line == "kind,t,p1,p2,p3,x,y");
  std::size_t rows = 0;
  while (std::getline(path, line)) {
    if (line.rfind("path,", 0) == 0) ++rows;
    last = line;
  }
  CHECK(rows == res.trace.rows.size());
  CHECK(last.rfind("belief,", 0) == 0);

  std::stringstream env;
  emit_figure_data(env, res.trace, FigureStyle::Envelope);
  std::getline(env, line);
  while (std::getline(env, line)) CHECK(line.back() == '1');

  std::stringstream gap;
  emit_figure_data(gap, res.trace, FigureStyle::GapVsT);
  std::getline(gap, line);
  CHECK(line == "t,l1_gap,suboptimality,gd_envelope,sd_envelope");

  ConvergenceTrace binary = res.trace;
  binary.belief = {0.5, 0.5};
  std::stringstream sink;
  CHECK_THROWS_AS(emit_figure_data(sink, binary, FigureStyle::SimplexPath), invalid_input);
  CHECK_THROWS_AS(parse_figure_style("heatmap"), invalid_input);
}

TEST_CASE("flat trace gives a single repeated point") {
  const ScenarioResult res = run_scenario(parse_config(
      "cost = softmax\nq0 = 0, 0, 0\nbelief = 1/3, 1/3, 1/3\nrounds = 5\n"));
  std::stringstream path;
  emit_figure_data(path, res.trace, FigureStyle::SimplexPath);
  std::string line, first;
  std::getline(path, line);
  std::getline(path, first);
  while (std::getline(path, line)) {
    if (line.rfind("path,", 0) == 0) CHECK(line.substr(line.find(',', 5)) == first.substr(first.find(',', 5)));
  }
}

TEST_CASE("revenue comparison") {
  const ScenarioConfig cfg = parse_config(kTernary);
  const RevenueReport empty = compare_revenue(cfg, {});
  CHECK(empty.cumulative_dcfmm == 0.0);
  CHECK(empty.cumulative_smoothquad == 0.0);

  const RevenueReport rnd = compare_revenue(cfg, random_history(3, 1000, 5), Vec(3, 0.0));
  CHECK(rnd.per_trade.size() == 1000);
  CHECK(rnd.dominates());
  CHECK(rnd.cumulative_smoothquad >= rnd.cumulative_dcfmm);
  CHECK(rnd.worst_case_loss_smoothquad <= rnd.worst_case_loss_dcfmm);

  // pure ones-bundles: dcfmm charges exactly sum(alpha), smoothquad adds (L/2)||alpha 1||^2
  std::vector<Vec> ones_history;
  double alphas = 0.0, quad = 0.0;
  for (double a : {0.5, -1.0, 2.0}) {
    ones_history.push_back(Vec(3, a));
    alphas += a;
    quad += 0.5 * 3.0 * a * a;
  }
  const RevenueReport flat = compare_revenue(cfg, ones_history);
  CHECK(flat.cumulative_dcfmm == Approx(alphas));
  CHECK(flat.cumulative_smoothquad - flat.cumulative_dcfmm == Approx(quad));

  CHECK(random_history(3, 4, 9) == random_history(3, 4, 9));
  CHECK(random_history(3, 4, 9) != random_history(3, 4, 10));
  for (const Vec& r : random_history(4, 100, 1)) {
    for (double x : r) CHECK((x >= -1.0 && x < 1.0));
  }
}

TEST_CASE("axiom suite passes") {
  const auto results = run_axiom_suite(1200, 4);
  CHECK(results.size() == 10);
  for (const AxiomResult& r : results) {
    INFO(r.name);
    CHECK(r.checked > 0);
    CHECK(r.passed());
  }
}

TEST_CASE("write_scenario_outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "sqpm_unit_out";
  std::filesystem::remove_all(dir);
  ScenarioConfig cfg = parse_config(kTernary);
  cfg.name = "fig";
  cfg.ledger_out = "nested/ledger.csv";
  const ScenarioFiles files = write_scenario_outputs(cfg, run_scenario(cfg), dir);
  CHECK(std::filesystem::exists(dir / "fig.trace.csv"));
  CHECK(std::filesystem::exists(dir / "nested/ledger.csv"));
  CHECK(std::filesystem::exists(dir / "fig.summary.json"));
  REQUIRE(files.path.has_value());
  CHECK(std::filesystem::exists(*files.path));
}
