// sqpm: scenario runner for smooth quadratic prediction markets.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sqpm/axioms.hpp"
#include "sqpm/error.hpp"
#include "sqpm/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumeric = 2;

int simulate(const std::string& config_path, const std::string& out_dir) {
  const sqpm::ScenarioConfig config = sqpm::load_config(config_path);
  const sqpm::ScenarioResult result = sqpm::run_scenario(config);
  const sqpm::ScenarioFiles files = sqpm::write_scenario_outputs(config, result, out_dir);

  const auto& s = result.summary;
  std::cout << "scenario " << s.name << ": " << s.rounds_completed << "/" << s.rounds_requested
            << " rounds\n"
            << "  final l1 gap     " << sqpm::format_double(s.final_l1_gap) << "\n"
            << "  total revenue    " << sqpm::format_double(s.total_revenue) << "\n"
            << "  worst-case loss  " << sqpm::format_double(s.worst_case_loss) << "\n";
  if (s.experimental) std::cout << "  note: l1 fees use the experimental smoothness override\n";
  if (s.approximate) std::cout << "  note: budget handled by the feasible-direction heuristic\n";
  std::cout << "  trace   " << files.trace.string() << "\n"
            << "  ledger  " << files.ledger.string() << "\n"
            << "  summary " << files.summary.string() << "\n";
  if (files.path) std::cout << "  path    " << files.path->string() << "\n";
  if (s.failure) {
    std::cerr << "sqpm: run stopped at " << *s.failure << "\n";
    return s.numeric_failure ? kNumeric : kValidation;
  }
  return kOk;
}

int compare(const std::string& config_path, const std::string& history_path,
            std::optional<std::size_t> random_count, std::uint64_t seed,
            const std::string& out_path) {
  const sqpm::ScenarioConfig config = sqpm::load_config(config_path);
  std::vector<sqpm::Vec> history;
  std::optional<sqpm::Vec> q0;
  if (!history_path.empty()) {
    std::ifstream in(history_path);
    if (!in) throw sqpm::invalid_input("cannot read ledger " + history_path);
    const sqpm::Ledger ledger = sqpm::read_ledger_csv(in);
    if (ledger.dimension() != config.dimension()) {
      throw sqpm::invalid_input("ledger dimension does not match the config");
    }
    history = sqpm::history_of(ledger);
    q0 = ledger.q0;
  } else {
    history = sqpm::random_history(config.dimension(), random_count.value_or(1000), seed);
  }
  const sqpm::RevenueReport report = sqpm::compare_revenue(config, history, q0);
  if (out_path.empty()) {
    sqpm::write_revenue_report(std::cout, report);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw sqpm::invalid_input("cannot write " + out_path);
    sqpm::write_revenue_report(out, report);
  }
  std::cerr << "dcfmm " << sqpm::format_double(report.cumulative_dcfmm) << ", smoothquad "
            << sqpm::format_double(report.cumulative_smoothquad) << ", "
            << report.dominance_violations << " dominance violations\n";
  return report.dominates() ? kOk : kNumeric;
}

int figure(const std::string& trace_path, const std::string& style, const std::string& out_path) {
  std::ifstream in(trace_path);
  if (!in) throw sqpm::invalid_input("cannot read trace " + trace_path);
  const sqpm::ConvergenceTrace trace = sqpm::read_trace_csv(in);
  const sqpm::FigureStyle s = sqpm::parse_figure_style(style);
  if (out_path.empty()) {
    sqpm::emit_figure_data(std::cout, trace, s);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw sqpm::invalid_input("cannot write " + out_path);
    sqpm::emit_figure_data(out, trace, s);
  }
  return kOk;
}

int axioms(std::size_t samples, std::uint64_t seed) {
  const auto results = sqpm::run_axiom_suite(samples, seed);
  sqpm::print_axiom_report(std::cout, results);
  for (const auto& r : results) {
    if (!r.passed()) return kNumeric;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth quadratic prediction market simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", history_path, out_path, trace_path, style;
  std::size_t random_count = 0, samples = 10000;
  std::uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write trace, ledger and summary");
  sim->add_option("config", config_path, "Scenario config file")->required();
  sim->add_option("--out-dir", out_dir, "Directory for relative output paths");

  auto* cmp = app.add_subcommand("compare", "Price one trade history under both payment rules");
  cmp->add_option("config", config_path, "Scenario config file")->required();
  auto* hist = cmp->add_option("--history", history_path, "Ledger CSV from a previous run");
  auto* rnd = cmp->add_option("--random", random_count, "Number of random uniform [-1,1] trades");
  cmp->add_option("--seed", seed, "Seed for --random");
  cmp->add_option("-o,--out", out_path, "Report file (default stdout)");
  hist->excludes(rnd);

  auto* fig = app.add_subcommand("figure", "Emit plotting data from a trace");
  fig->add_option("trace", trace_path, "Trace CSV")->required();
  fig->add_option("--style", style, "simplex_path, gap_vs_t or envelope")->required();
  fig->add_option("-o,--out", out_path, "Output file (default stdout)");

  auto* ax = app.add_subcommand("axioms", "Run the randomized axiom property suite");
  ax->add_option("--samples", samples, "Random (q, r) pairs per property");
  ax->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*sim) return simulate(config_path, out_dir);
    if (*cmp) {
      std::optional<std::size_t> count;
      if (*rnd) count = random_count;
      return compare(config_path, history_path, count, seed, out_path);
    }
    if (*fig) return figure(trace_path, style, out_path);
    if (*ax) return axioms(samples, seed);
  } catch (const sqpm::numeric_failure& e) {
    std::cerr << "sqpm: numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const sqpm::error& e) {
    std::cerr << "sqpm: " << e.what() << "\n";
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "sqpm: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
