#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqpm/convex.hpp"
#include "sqpm/cost.hpp"
#include "sqpm/market.hpp"

namespace sqpm {

struct SolverParams {
  std::size_t max_iters = 10000;
  double tol = 1e-8;
  /// Fixed step for plain projected dual ascent; <= 0 selects the
  /// Newton-scaled ascent with backtracking.
  double dual_step = 0.0;
};

/// An expectation-maximizing trader. Budget and buy-only are independent
/// toggles; the trader's norm must match the market's fee norm.
struct TraderConfig {
  Vec belief;
  NormKind norm = NormKind::L2;
  std::optional<double> budget;
  bool buy_only = false;
  SolverParams solver;

  void validate(std::size_t dimension) const;
};

enum class TraderMode { Unconstrained, BuyOnly, Budgeted, BudgetedBuyOnly };

std::string_view to_string(TraderMode mode) noexcept;
TraderMode mode_of(const TraderConfig& config) noexcept;

/// True when the configuration is served by the feasible-direction budget
/// heuristic rather than an exact constrained optimum.
bool is_approximate(const TraderConfig& config) noexcept;

/// grad C(q) - mu: the gradient of the trader's surrogate objective
/// C(q) - <mu, q>.
Vec surrogate_grad(const MarketState& state, ConstVecRef belief);

/// C(q) - <mu, q>.
double surrogate_value(const CostFunctionSpec& cost, ConstVecRef q, ConstVecRef belief);

/// Exact minimizer of <g, r> + (L/2)||r||^2 under `kind`. The l1 step moves
/// the smallest index attaining max |g_j|.
Vec steepest_step(ConstVecRef g, double L, NormKind kind);

/// Maximizer of <mu, r> - Pay_L(q, r) with no constraints.
Vec trade_unconstrained(const MarketState& state, const TraderConfig& config);

/// Same objective restricted to r >= 0. Closed form for every norm.
Vec trade_buy_only(const MarketState& state, const TraderConfig& config);

/// Same objective subject to Pay_L(q, r) - r_y <= B for every outcome y.
/// l2 is solved by projected dual ascent (combined with r >= 0 when the
/// trader is also buy-only); l1/linf scale the unconstrained step back to
/// the largest feasible multiple. Throws solver_failure on non-convergence.
Vec trade_budgeted(const MarketState& state, const TraderConfig& config);

/// Dispatches on the configuration's mode.
Vec trade(const MarketState& state, const TraderConfig& config);

struct BudgetSolution {
  Vec bundle;
  Vec multipliers;  ///< one per outcome; empty for the l1/linf heuristic
  std::size_t iterations = 0;
  double max_violation = 0.0;
  double max_complementary_slackness = 0.0;
};

/// trade_budgeted with solver diagnostics.
BudgetSolution solve_budgeted(const MarketState& state, const TraderConfig& config);

/// Per-outcome budget slack Pay_L(q, r) - r_y - B.
Vec budget_constraint_values(const MarketState& state, ConstVecRef bundle, double budget);

struct KktResiduals {
  double stationarity = 0.0;
  double complementary_slackness = 0.0;
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;

  double max() const noexcept;
};

/// Residuals of the buy-only l2 program min <c,r> + (L/2)||r||^2, r >= 0,
/// at the primal/dual pair (r, lambda).
KktResiduals buy_only_kkt(ConstVecRef c, double L, ConstVecRef r, ConstVecRef lambda);

/// The closed-form dual certificate lambda* = (c)_+.
Vec buy_only_multipliers(ConstVecRef c);

/// Minimizer of the surrogate aligned with q0: state_for_price(mu) shifted
/// along the ones vector by the mean residual (least squares in l2).
Vec optimal_state(const CostFunctionSpec& cost, ConstVecRef belief, ConstVecRef q0);

struct TraceRow {
  std::size_t t = 0;
  Vec q;
  Vec price;
  double l1_gap = 0.0;
  double suboptimality = 0.0;
  double payment = 0.0;  ///< payment for the trade that produced q_t
  double revenue = 0.0;  ///< cumulative
};

struct ConvergenceTrace {
  CostFunctionSpec cost;
  NormKind norm = NormKind::L2;
  TraderMode mode = TraderMode::Unconstrained;
  double smoothness = 0.0;
  bool experimental = false;
  bool approximate = false;
  Vec belief;
  Vec q_star;
  std::vector<TraceRow> rows;
  /// Set when a round failed; rows hold everything up to the failing round.
  std::optional<std::string> failure;
  bool numeric_failure = false;
};

/// Applies `rounds` trades from the stream (cycled) to a Smooth Quadratic
/// market and records one row per round, including round 0. All traders
/// must share the first trader's belief for the suboptimality column to be
/// meaningful. Errors in a round stop the run and are reported in
/// `failure`; the state and ledger keep every completed trade.
ConvergenceTrace run_convergence(MarketState& state, Ledger& ledger,
                                 std::span<const TraderConfig> traders, std::size_t rounds);

}  // namespace sqpm
