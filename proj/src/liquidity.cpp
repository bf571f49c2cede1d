#include "sqpm/liquidity.hpp"

#include <algorithm>
#include <cmath>

#include "sqpm/error.hpp"

namespace sqpm {

double volume_increment(AsymmetricNorm /*g*/, ConstVecRef r) {
  require_finite(r, "bundle");
  double v = 0.0;
  for (double x : r) v += std::max(x, 0.0);
  return v;
}

void LiquidityParams::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw invalid_input("alpha0 must be positive");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw invalid_input("kappa must be nonnegative");
  base_cost.validate();
}

double liquidity_alpha(const LiquidityParams& params, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw invalid_input("volume must be nonnegative");
  return params.alpha0 + params.kappa * std::log1p(v);
}

CostFunctionSpec cost_at_volume(const LiquidityParams& params, double v) {
  const double alpha = liquidity_alpha(params, v);
  CostFunctionSpec spec = params.base_cost;
  // alpha * C(q / alpha) for softmax(L) is softmax(L / alpha); for
  // sparsemax(L) it is sparsemax(alpha * L).
  spec.L = spec.family == CostFamily::Softmax ? spec.L / alpha : spec.L * alpha;
  return spec;
}

double vpm_cost(const LiquidityParams& params, ConstVecRef q, double v) {
  const double alpha = liquidity_alpha(params, v);
  const double r_max = regularizer_max(regularizer_of(params.base_cost), params.base_cost.dimension);
  return alpha * cost(params.base_cost, scaled(q, 1.0 / alpha)) + (alpha - 1.0) * r_max;
}

Vec vpm_grad(const LiquidityParams& params, ConstVecRef q, double v) {
  const double alpha = liquidity_alpha(params, v);
  return grad(params.base_cost, scaled(q, 1.0 / alpha));
}

double vpm_smoothness(const LiquidityParams& params, NormKind kind, double v,
                      bool allow_experimental) {
  return smoothness(params.base_cost, kind, allow_experimental) / liquidity_alpha(params, v);
}

double liquidity_fee(const LiquidityParams& params, ConstVecRef q, double v, ConstVecRef r) {
  const double dv = volume_increment(params.volume_norm, r);
  if (dv == 0.0 || params.kappa == 0.0) return 0.0;
  const double before = vpm_cost(params, q, v);
  const double fee = vpm_cost(params, q, v + dv) - before;
  // Nondecreasing in v mathematically; only rounding noise is clamped, so a
  // real decrease still shows up as a negative fee.
  if (fee < 0.0 && fee > -1e-12 * (1.0 + std::abs(before))) return 0.0;
  return fee;
}

PaymentQuote quote_vpm_smoothquad(const LiquidityParams& params, ConstVecRef q, double v,
                                  ConstVecRef r, NormKind kind, bool allow_experimental) {
  if (q.size() != r.size()) throw invalid_input("bundle has the wrong dimension");
  require_finite(r, "bundle");
  const double L_pre = vpm_smoothness(params, kind, v, allow_experimental);
  const double v_post = v + volume_increment(params.volume_norm, r);
  const double linear = dot(vpm_grad(params, q, v_post), r);
  const double size = norm(r, kind);
  const double fee = 0.5 * L_pre * size * size + liquidity_fee(params, q, v, r);
  return {PaymentRule::SmoothQuad, linear, fee, linear + fee};
}

double pay_vpm_dcfmm(const LiquidityParams& params, ConstVecRef q, double v, ConstVecRef r) {
  const double v_post = v + volume_increment(params.volume_norm, r);
  return vpm_cost(params, add(q, r), v_post) - vpm_cost(params, q, v);
}

VpmMarket make_vpm_market(const LiquidityParams& params, Vec q0, double v0, NormKind norm,
                          bool allow_experimental) {
  params.validate();
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw invalid_input("initial volume must be nonnegative");
  VpmMarket market{make_market(params.base_cost, std::move(q0), norm, allow_experimental),
                   VolumeState{v0, v0}, params};
  // Surface unsupported norms at construction rather than at the first quote.
  (void)vpm_smoothness(params, norm, v0, allow_experimental);
  return market;
}

MarketState flat_view(const VpmMarket& market) {
  MarketState view = market.state;
  view.cost = cost_at_volume(market.params, market.volume.v);
  return view;
}

const TradeRecord& vpm_apply_trade(VpmMarket& market, Ledger& ledger, std::string trader_id,
                                   ConstVecRef r) {
  MarketState& state = market.state;
  if (ledger.q0.size() != state.q.size()) throw invalid_input("ledger belongs to another market");
  const double v_pre = market.volume.v;
  const PaymentQuote paid = quote_vpm_smoothquad(market.params, state.q, v_pre, r, state.norm,
                                                 state.allow_experimental);
  const double v_post = v_pre + volume_increment(market.params.volume_norm, r);
  Vec next = add(state.q, r);

  TradeRecord record;
  record.round = state.t;
  record.trader_id = std::move(trader_id);
  record.bundle.assign(r.begin(), r.end());
  record.quote = paid;
  record.pre_price = vpm_grad(market.params, state.q, v_pre);
  record.post_price = vpm_grad(market.params, next, v_post);
  record.volume = VolumeColumns{v_pre, v_post, liquidity_fee(market.params, state.q, v_pre, r)};

  ledger.records.push_back(std::move(record));
  ledger.cumulative_revenue += paid.total;
  state.q = std::move(next);
  ++state.t;
  market.volume.v = v_post;
  return ledger.records.back();
}

}  // namespace sqpm
