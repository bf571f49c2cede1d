#include "sqpm/traders.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sqpm/error.hpp"

namespace sqpm {

void TraderConfig::validate(std::size_t dimension) const {
  if (belief.size() != dimension) throw invalid_input("belief has the wrong dimension");
  if (!on_simplex(belief)) throw invalid_input("belief not on simplex");
  if (budget && !(*budget > 0.0 && std::isfinite(*budget))) {
    throw invalid_input("budget must be a positive number");
  }
  if (solver.max_iters == 0 || !(solver.tol > 0.0)) {
    throw invalid_input("solver max_iters and tol must be positive");
  }
}

std::string_view to_string(TraderMode mode) noexcept {
  switch (mode) {
    case TraderMode::Unconstrained:
      return "unconstrained";
    case TraderMode::BuyOnly:
      return "buy_only";
    case TraderMode::Budgeted:
      return "budgeted";
    case TraderMode::BudgetedBuyOnly:
      return "budgeted_buy_only";
  }
  return "?";
}

TraderMode mode_of(const TraderConfig& config) noexcept {
  if (config.budget) return config.buy_only ? TraderMode::BudgetedBuyOnly : TraderMode::Budgeted;
  return config.buy_only ? TraderMode::BuyOnly : TraderMode::Unconstrained;
}

bool is_approximate(const TraderConfig& config) noexcept {
  return config.budget.has_value() && config.norm != NormKind::L2;
}

Vec surrogate_grad(const MarketState& state, ConstVecRef belief) {
  if (belief.size() != state.q.size()) throw invalid_input("belief has the wrong dimension");
  return sub(inst_price(state), belief);
}

double surrogate_value(const CostFunctionSpec& cost_spec, ConstVecRef q, ConstVecRef belief) {
  return cost(cost_spec, q) - dot(belief, q);
}

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

void check_trader(const MarketState& state, const TraderConfig& config) {
  config.validate(state.q.size());
  if (config.norm != state.norm) {
    throw invalid_input("trader norm " + std::string(to_string(config.norm)) +
                        " does not match the market fee norm " +
                        std::string(to_string(state.norm)));
  }
}

double market_smoothness(const MarketState& state) {
  return smoothness(state.cost, state.norm, state.allow_experimental);
}

}  // namespace

Vec steepest_step(ConstVecRef g, double L, NormKind kind) {
  if (!(L > 0.0)) throw invalid_input("step smoothness must be positive");
  require_finite(g, "gradient");
  Vec r(g.size(), 0.0);
  switch (kind) {
    case NormKind::L2:
      for (std::size_t i = 0; i < g.size(); ++i) r[i] = -g[i] / L;
      break;
    case NormKind::LInf: {
      const double size = norm(g, NormKind::L1) / L;
      for (std::size_t i = 0; i < g.size(); ++i) r[i] = -size * sign(g[i]);
      break;
    }
    case NormKind::L1: {
      if (g.empty()) break;
      std::size_t j = 0;
      for (std::size_t i = 1; i < g.size(); ++i) {
        if (std::abs(g[i]) > std::abs(g[j])) j = i;
      }
      r[j] = -g[j] / L;
      break;
    }
  }
  return r;
}

Vec trade_unconstrained(const MarketState& state, const TraderConfig& config) {
  check_trader(state, config);
  return steepest_step(surrogate_grad(state, config.belief), market_smoothness(state), state.norm);
}

Vec trade_buy_only(const MarketState& state, const TraderConfig& config) {
  check_trader(state, config);
  const double L = market_smoothness(state);
  const Vec c = surrogate_grad(state, config.belief);
  Vec r(c.size(), 0.0);
  switch (state.norm) {
    case NormKind::L2:
      for (std::size_t i = 0; i < c.size(); ++i) r[i] = std::max(-c[i], 0.0) / L;
      break;
    case NormKind::LInf: {
      // Every underpriced outcome is bought up to a common level.
      double deficit = 0.0;
      for (double x : c) deficit += std::max(-x, 0.0);
      for (std::size_t i = 0; i < c.size(); ++i) r[i] = c[i] < 0.0 ? deficit / L : 0.0;
      break;
    }
    case NormKind::L1: {
      // All volume goes to the most underpriced outcome (smallest index on ties).
      std::size_t j = 0;
      for (std::size_t i = 1; i < c.size(); ++i) {
        if (c[i] < c[j]) j = i;
      }
      if (c[j] < 0.0) r[j] = -c[j] / L;
      break;
    }
  }
  return r;
}

Vec budget_constraint_values(const MarketState& state, ConstVecRef bundle, double budget) {
  const double pay = quote_smoothquad(state, bundle).total;
  Vec g(bundle.size());
  for (std::size_t y = 0; y < bundle.size(); ++y) g[y] = pay - bundle[y] - budget;
  return g;
}

namespace {

double max_of(const Vec& v) { return *std::max_element(v.begin(), v.end()); }

// Largest theta in (0, 1] with theta * step feasible for every outcome. Each
// constraint is a * theta^2 + b_y * theta - B <= 0 with a >= 0 and B > 0, so
// the feasible thetas form an interval containing zero.
double feasible_scale(const MarketState& state, ConstVecRef step, double budget) {
  const double L = market_smoothness(state);
  const Vec price = inst_price(state);
  const double size = norm(step, state.norm);
  const double a = 0.5 * L * size * size;
  const double linear = dot(price, step);
  double theta = 1.0;
  for (std::size_t y = 0; y < step.size(); ++y) {
    const double b = linear - step[y];
    const double denom = b + std::sqrt(b * b + 4.0 * a * budget);
    if (denom > 0.0) theta = std::min(theta, 2.0 * budget / denom);
  }
  // Rounding in the root can leave a hair of violation.
  for (int i = 0; i < 64 && theta > 0.0; ++i) {
    if (max_of(budget_constraint_values(state, scaled(step, theta), budget)) <= 0.0) break;
    theta *= 1.0 - 1e-12 * (i + 1) * (i + 1);
  }
  return theta;
}

struct DualPoint {
  Vec lambda;
  Vec r;
  Vec g;
  double value = 0.0;  // Lagrangian at (r(lambda), lambda)
};

}  // namespace

BudgetSolution solve_budgeted(const MarketState& state, const TraderConfig& config) {
  check_trader(state, config);
  if (!config.budget) throw invalid_input("trader has no budget");
  const double budget = *config.budget;
  const double L = market_smoothness(state);
  const std::size_t d = state.q.size();
  const Vec price = inst_price(state);
  const Vec c = sub(price, config.belief);
  const double tol = config.solver.tol;

  BudgetSolution out;
  const Vec free_step =
      config.buy_only ? trade_buy_only(state, config) : trade_unconstrained(state, config);
  {
    const Vec g = budget_constraint_values(state, free_step, budget);
    if (max_of(g) <= tol) {
      out.bundle = free_step;
      out.multipliers.assign(state.norm == NormKind::L2 ? d : 0, 0.0);
      out.max_violation = std::max(max_of(g), 0.0);
      return out;
    }
  }

  if (state.norm != NormKind::L2) {
    const double theta = feasible_scale(state, free_step, budget);
    out.bundle = scaled(free_step, theta);
    out.max_violation = std::max(max_of(budget_constraint_values(state, out.bundle, budget)), 0.0);
    return out;
  }

  // Projected dual ascent on the outcome multipliers. For fixed lambda the
  // Lagrangian minimizer is r = -(c + sum_y lambda_y (p - e_y)) / (L (1 + sum lambda)),
  // clipped at zero for buy-only traders.
  auto evaluate = [&](Vec lambda) {
    DualPoint pt;
    double total = 0.0;
    for (double l : lambda) total += l;
    pt.r.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double num = c[i] + total * price[i] - lambda[i];
      pt.r[i] = -num / (L * (1.0 + total));
      if (config.buy_only) pt.r[i] = std::max(pt.r[i], 0.0);
    }
    const double pay_quad = dot(price, pt.r) + 0.5 * L * dot(pt.r, pt.r);
    pt.g.resize(d);
    double value = dot(c, pt.r) + 0.5 * L * dot(pt.r, pt.r);
    for (std::size_t y = 0; y < d; ++y) {
      pt.g[y] = pay_quad - pt.r[y] - budget;
      value += lambda[y] * pt.g[y];
    }
    pt.value = value;
    pt.lambda = std::move(lambda);
    return pt;
  };

  const bool newton = !(config.solver.dual_step > 0.0);
  const double fixed_step = config.solver.dual_step;

  DualPoint cur = evaluate(Vec(d, 0.0));
  Vec best_feasible(d, 0.0);
  double best_objective = 0.0;  // objective of the zero bundle
  auto objective = [&](const Vec& r) { return dot(c, r) + 0.5 * L * dot(r, r); };

  for (std::size_t it = 0; it < config.solver.max_iters; ++it) {
    double violation = 0.0;
    double slackness = 0.0;
    for (std::size_t y = 0; y < d; ++y) {
      violation = std::max(violation, cur.g[y]);
      slackness = std::max(slackness, std::abs(cur.lambda[y] * cur.g[y]));
    }
    if (violation <= tol) {
      const double obj = objective(cur.r);
      if (obj < best_objective) {
        best_objective = obj;
        best_feasible = cur.r;
      }
      if (slackness <= tol) {
        out.bundle = cur.r;
        out.multipliers = cur.lambda;
        out.iterations = it;
        out.max_violation = violation;
        out.max_complementary_slackness = slackness;
        return out;
      }
    }

    if (!newton) {
      Vec next(d);
      for (std::size_t y = 0; y < d; ++y) {
        next[y] = std::max(0.0, cur.lambda[y] + fixed_step * cur.g[y]);
      }
      cur = evaluate(std::move(next));
      continue;
    }

    // Dual Hessian is -A A^T / (L (1 + sum lambda)) with rows
    // a_y = p - e_y + L r restricted to unclipped coordinates.
    std::vector<std::size_t> active;
    for (std::size_t y = 0; y < d; ++y) {
      if (cur.lambda[y] > 0.0 || cur.g[y] > 0.0) active.push_back(y);
    }
    double total = 0.0;
    for (double l : cur.lambda) total += l;
    const auto n = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd rows(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < d; ++i) {
        const bool clipped = config.buy_only && cur.r[i] <= 0.0;
        const double e = (i == active[static_cast<std::size_t>(k)]) ? 1.0 : 0.0;
        rows(k, static_cast<Eigen::Index>(i)) = clipped ? 0.0 : price[i] - e + L * cur.r[i];
      }
    }
    Eigen::MatrixXd curvature = rows * rows.transpose() / (L * (1.0 + total));
    curvature.diagonal().array() += 1e-14;
    Eigen::VectorXd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) rhs(k) = cur.g[active[static_cast<std::size_t>(k)]];
    const Eigen::VectorXd newton_dir = curvature.ldlt().solve(rhs);

    Vec direction_newton(d, 0.0);
    for (Eigen::Index k = 0; k < n; ++k) {
      direction_newton[active[static_cast<std::size_t>(k)]] = newton_dir(k);
    }
    const double diag_max = std::max(curvature.diagonal().maxCoeff(), 1e-12);
    Vec direction_gradient = scaled(cur.g, 1.0 / (static_cast<double>(d) * diag_max));

    bool moved = false;
    for (const Vec* direction : {&direction_newton, &direction_gradient}) {
      if (!is_finite(*direction)) continue;
      double t = 1.0;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        Vec next(d);
        double ascent = 0.0;
        for (std::size_t y = 0; y < d; ++y) {
          next[y] = std::max(0.0, cur.lambda[y] + t * (*direction)[y]);
          ascent += cur.g[y] * (next[y] - cur.lambda[y]);
        }
        DualPoint trial = evaluate(std::move(next));
        if (trial.value >= cur.value + 1e-4 * ascent) {
          cur = std::move(trial);
          moved = true;
          break;
        }
      }
      if (moved) break;
    }
    if (!moved) break;
  }

  throw solver_failure("budgeted trade solver did not converge", best_feasible);
}

Vec trade_budgeted(const MarketState& state, const TraderConfig& config) {
  return solve_budgeted(state, config).bundle;
}

Vec trade(const MarketState& state, const TraderConfig& config) {
  switch (mode_of(config)) {
    case TraderMode::Unconstrained:
      return trade_unconstrained(state, config);
    case TraderMode::BuyOnly:
      return trade_buy_only(state, config);
    case TraderMode::Budgeted:
    case TraderMode::BudgetedBuyOnly:
      return trade_budgeted(state, config);
  }
  return {};
}

double KktResiduals::max() const noexcept {
  return std::max({stationarity, complementary_slackness, primal_feasibility, dual_feasibility});
}

Vec buy_only_multipliers(ConstVecRef c) {
  Vec lambda(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) lambda[i] = std::max(c[i], 0.0);
  return lambda;
}

KktResiduals buy_only_kkt(ConstVecRef c, double L, ConstVecRef r, ConstVecRef lambda) {
  if (c.size() != r.size() || c.size() != lambda.size()) {
    throw invalid_input("dimension mismatch in KKT check");
  }
  KktResiduals res;
  for (std::size_t i = 0; i < c.size(); ++i) {
    res.stationarity = std::max(res.stationarity, std::abs(c[i] + L * r[i] - lambda[i]));
    res.complementary_slackness = std::max(res.complementary_slackness, std::abs(lambda[i] * r[i]));
    res.primal_feasibility = std::max(res.primal_feasibility, std::max(-r[i], 0.0));
    res.dual_feasibility = std::max(res.dual_feasibility, std::max(-lambda[i], 0.0));
  }
  return res;
}

Vec optimal_state(const CostFunctionSpec& cost_spec, ConstVecRef belief, ConstVecRef q0) {
  Vec base = state_for_price(cost_spec, belief);
  if (q0.size() != base.size()) throw invalid_input("initial state has the wrong dimension");
  double shift = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) shift += q0[i] - base[i];
  shift /= static_cast<double>(base.size());
  for (double& x : base) x += shift;
  return base;
}

ConvergenceTrace run_convergence(MarketState& state, Ledger& ledger,
                                 std::span<const TraderConfig> traders, std::size_t rounds) {
  if (rounds < 1) throw invalid_input("need at least one round");
  if (traders.empty()) throw invalid_input("trader stream is empty");
  for (const TraderConfig& tc : traders) tc.validate(state.q.size());

  const TraderConfig& lead = traders.front();
  ConvergenceTrace trace;
  trace.cost = state.cost;
  trace.norm = state.norm;
  trace.mode = mode_of(lead);
  trace.smoothness = market_smoothness(state);
  trace.experimental = state.allow_experimental && is_experimental(state.cost, state.norm);
  trace.approximate = is_approximate(lead);
  trace.belief = lead.belief;
  trace.q_star = optimal_state(state.cost, lead.belief, state.q);
  const double floor_value = surrogate_value(state.cost, trace.q_star, trace.belief);

  auto record = [&](double payment) {
    TraceRow row;
    row.t = trace.rows.size();
    row.q = state.q;
    row.price = inst_price(state);
    row.l1_gap = norm(sub(row.price, trace.belief), NormKind::L1);
    row.suboptimality = surrogate_value(state.cost, state.q, trace.belief) - floor_value;
    row.payment = payment;
    row.revenue = ledger.cumulative_revenue;
    trace.rows.push_back(std::move(row));
  };

  record(0.0);
  for (std::size_t t = 0; t < rounds; ++t) {
    const std::size_t index = t % traders.size();
    try {
      const Vec bundle = trade(state, traders[index]);
      const TradeRecord& rec = apply_trade(state, ledger, "trader-" + std::to_string(index), bundle,
                                           PaymentRule::SmoothQuad);
      record(rec.quote.total);
    } catch (const numeric_failure& e) {
      trace.failure = "round " + std::to_string(t + 1) + ": " + e.what();
      trace.numeric_failure = true;
      break;
    } catch (const error& e) {
      trace.failure = "round " + std::to_string(t + 1) + ": " + e.what();
      break;
    }
  }
  return trace;
}

}  // namespace sqpm
