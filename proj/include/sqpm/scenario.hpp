#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqpm/convex.hpp"
#include "sqpm/cost.hpp"
#include "sqpm/liquidity.hpp"
#include "sqpm/market.hpp"
#include "sqpm/traders.hpp"

namespace sqpm {

struct LiquidityConfig {
  double alpha0 = 1.0;
  double kappa = 0.0;
  double v0 = 0.0;
};

/// A simulation scenario. Loaded from a flat `key = value` text file; see
/// docs/formats.md for the schema.
struct ScenarioConfig {
  std::string name = "scenario";
  CostFunctionSpec cost;
  NormKind norm = NormKind::L2;
  bool experimental_l1 = false;
  Vec q0;
  Vec belief;
  std::size_t rounds = 0;
  TraderMode mode = TraderMode::Unconstrained;
  std::optional<double> budget;
  SolverParams solver;
  std::optional<LiquidityConfig> liquidity;
  std::uint64_t seed = 0;

  std::string trace_out;
  std::string ledger_out;
  std::string summary_out;
  std::string path_out;

  std::size_t dimension() const noexcept { return cost.dimension; }
  TraderConfig trader() const;
  /// Throws config_error naming the violated invariant.
  void validate() const;
};

/// Parses the key-value schema. `source` labels diagnostics.
ScenarioConfig parse_config(std::string_view text, std::string_view source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

struct ScenarioSummary {
  std::string name;
  std::size_t rounds_requested = 0;
  std::size_t rounds_completed = 0;
  double final_l1_gap = 0.0;
  Vec final_price;
  double total_revenue = 0.0;
  double worst_case_loss = 0.0;
  bool experimental = false;
  bool approximate = false;
  bool liquidity = false;
  std::uint64_t seed = 0;
  std::optional<std::string> failure;
  bool numeric_failure = false;
};

struct ScenarioResult {
  ConvergenceTrace trace;
  Ledger ledger;
  Vec volumes;  ///< per trace row; empty unless liquidity is on
  ScenarioSummary summary;
};

/// Runs the scenario in memory. Deterministic given the config.
ScenarioResult run_scenario(const ScenarioConfig& config);

struct ScenarioFiles {
  std::filesystem::path trace;
  std::filesystem::path ledger;
  std::filesystem::path summary;
  std::optional<std::filesystem::path> path;  ///< ternary markets only
};

/// Writes trace, ledger, summary and (for d = 3) the simplex path. Relative
/// output paths resolve against `out_dir`; unset ones default to
/// `<name>.trace.csv`, `<name>.ledger.csv`, `<name>.summary.json`,
/// `<name>.path.csv`.
ScenarioFiles write_scenario_outputs(const ScenarioConfig& config, const ScenarioResult& result,
                                     const std::filesystem::path& out_dir);

// Serialization. Numbers use 17 significant digits so files round-trip.

std::string format_double(double x);

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace, const Vec& volumes = {});
ConvergenceTrace read_trace_csv(std::istream& in);

void write_ledger_csv(std::ostream& out, const Ledger& ledger);
Ledger read_ledger_csv(std::istream& in);

std::string summary_json(const ScenarioSummary& summary);

enum class FigureStyle { SimplexPath, GapVsT, Envelope };
FigureStyle parse_figure_style(std::string_view name);

/// Reference envelopes for a trace: the gradient-descent bound
/// L ||q0 - q*||_2^2 / (2t) and the steepest-descent bound 2 L K^2 / (t + 4)
/// with K the largest distance from q* along the trace in the trading norm.
struct Envelopes {
  double gd_scale = 0.0;  ///< L ||q0 - q*||_2^2 / 2
  double sd_k = 0.0;
  double gd(std::size_t t) const;
  double sd(std::size_t t, double L) const;
};
Envelopes envelopes_of(const ConvergenceTrace& trace);

/// Plain numeric CSV for external plotting.
void emit_figure_data(std::ostream& out, const ConvergenceTrace& trace, FigureStyle style);

struct RevenueRow {
  double dcfmm = 0.0;
  double smoothquad = 0.0;
};

struct RevenueReport {
  std::vector<RevenueRow> per_trade;
  double cumulative_dcfmm = 0.0;
  double cumulative_smoothquad = 0.0;
  double worst_case_loss_dcfmm = 0.0;
  double worst_case_loss_smoothquad = 0.0;
  std::size_t dominance_violations = 0;  ///< trades with smoothquad < dcfmm - 1e-12
  double min_margin = 0.0;               ///< min over trades of smoothquad - dcfmm

  bool dominates() const noexcept { return dominance_violations == 0; }
};

/// Uniform [-1, 1]^d bundles from a seeded generator.
std::vector<Vec> random_history(std::size_t dimension, std::size_t count, std::uint64_t seed);
std::vector<Vec> history_of(const Ledger& ledger);

/// Prices the same bundle sequence, starting from q0, under both rules.
RevenueReport compare_revenue(const ScenarioConfig& config, const std::vector<Vec>& history,
                              std::optional<Vec> q0 = std::nullopt);

void write_revenue_report(std::ostream& out, const RevenueReport& report);

}  // namespace sqpm
