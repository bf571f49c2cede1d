#pragma once

#include <string>

#include "sqpm/convex.hpp"
#include "sqpm/cost.hpp"
#include "sqpm/market.hpp"

namespace sqpm {

/// Asymmetric norm used to measure traded volume. Only the positive-part
/// l1 norm is provided: g(r) = sum_i max(r_i, 0), so sales add no volume.
enum class AsymmetricNorm { PositivePartL1 };

double volume_increment(AsymmetricNorm g, ConstVecRef r);
inline double volume_increment(ConstVecRef r) {
  return volume_increment(AsymmetricNorm::PositivePartL1, r);
}

/// Liquidity schedule alpha(v) = alpha0 + kappa * log(1 + v).
struct LiquidityParams {
  double alpha0 = 1.0;
  double kappa = 0.0;
  CostFunctionSpec base_cost;
  AsymmetricNorm volume_norm = AsymmetricNorm::PositivePartL1;

  void validate() const;
};

double liquidity_alpha(const LiquidityParams& params, double v);

/// The volume-dependent cost
///
///   C°(q; v) = alpha(v) * C(q / alpha(v)) + (alpha(v) - 1) * R_max
///
/// where R_max is the base regularizer's maximum over the simplex (zero for
/// the entropy family). For fixed v this is the base family with rescaled
/// L plus a constant, so it stays convex, increasing, one-invariant and
/// probability mapping; it is nondecreasing in v and its smoothness is the
/// base smoothness divided by alpha(v).
double vpm_cost(const LiquidityParams& params, ConstVecRef q, double v);
/// grad_q C°(q; v) = grad C(q / alpha(v)).
Vec vpm_grad(const LiquidityParams& params, ConstVecRef q, double v);
/// C°(.; v) as a plain cost function (up to its additive constant).
CostFunctionSpec cost_at_volume(const LiquidityParams& params, double v);
/// Smoothness of C°(.; v) under `kind`.
double vpm_smoothness(const LiquidityParams& params, NormKind kind, double v,
                      bool allow_experimental = false);

/// C°(q; v + g(r)) - C°(q; v), always >= 0.
double liquidity_fee(const LiquidityParams& params, ConstVecRef q, double v, ConstVecRef r);

/// Adaptive-liquidity Smooth Quadratic payment:
///   linear_part = <grad C°(q; v + g(r)), r>
///   fee_part    = (L°(v)/2) ||r||^2 + liquidity_fee
/// with L° evaluated at the pre-trade volume.
PaymentQuote quote_vpm_smoothquad(const LiquidityParams& params, ConstVecRef q, double v,
                                  ConstVecRef r, NormKind kind, bool allow_experimental = false);

/// Volume-parameterized DCFMM payment C°(q + r; v + g(r)) - C°(q; v).
double pay_vpm_dcfmm(const LiquidityParams& params, ConstVecRef q, double v, ConstVecRef r);

struct VolumeState {
  double v = 0.0;
  double v0 = 0.0;
};

struct VpmMarket {
  MarketState state;  ///< state.cost is the base cost
  VolumeState volume;
  LiquidityParams params;
};

VpmMarket make_vpm_market(const LiquidityParams& params, Vec q0, double v0,
                          NormKind norm = NormKind::L2, bool allow_experimental = false);

/// Flat Smooth Quadratic view of the market at its current volume. Traders
/// use it to choose bundles.
MarketState flat_view(const VpmMarket& market);

/// Prices r with quote_vpm_smoothquad, then advances q, t and v and appends a
/// ledger record carrying the volume columns.
const TradeRecord& vpm_apply_trade(VpmMarket& market, Ledger& ledger, std::string trader_id,
                                   ConstVecRef r);

}  // namespace sqpm
