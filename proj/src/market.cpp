#include "sqpm/market.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "sqpm/error.hpp"

namespace sqpm {

std::string_view to_string(PaymentRule rule) noexcept {
  return rule == PaymentRule::DCFMM ? "dcfmm" : "smoothquad";
}

PaymentRule parse_payment_rule(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dcfmm") return PaymentRule::DCFMM;
  if (lower == "smoothquad") return PaymentRule::SmoothQuad;
  throw invalid_input("unknown payment rule '" + std::string(name) + "'");
}

MarketState make_market(const CostFunctionSpec& cost, Vec q0, NormKind norm,
                        bool allow_experimental) {
  cost.validate();
  if (q0.size() != cost.dimension) throw invalid_input("initial state has the wrong dimension");
  require_finite(q0, "initial state");
  smoothness(cost, norm, allow_experimental);  // throws unsupported_norm
  return MarketState{std::move(q0), 0, cost, norm, allow_experimental};
}

Ledger make_ledger(const MarketState& state) { return Ledger{state.q, {}, 0.0}; }

Vec inst_price(const MarketState& state) { return grad(state.cost, state.q); }

namespace {

void check_bundle(const MarketState& state, ConstVecRef bundle) {
  if (bundle.size() != state.q.size()) throw invalid_input("bundle has the wrong dimension");
  require_finite(bundle, "bundle");
}

}  // namespace

PaymentQuote quote_dcfmm(const MarketState& state, ConstVecRef bundle) {
  check_bundle(state, bundle);
  const Vec price = grad(state.cost, state.q);
  const double total = cost(state.cost, add(state.q, bundle)) - cost(state.cost, state.q);
  const double linear = dot(price, bundle);
  // The Bregman fee, written as the remainder so linear + fee == total.
  return {PaymentRule::DCFMM, linear, total - linear, total};
}

PaymentQuote quote_smoothquad(const MarketState& state, ConstVecRef bundle) {
  check_bundle(state, bundle);
  const double L = smoothness(state.cost, state.norm, state.allow_experimental);
  const double linear = dot(grad(state.cost, state.q), bundle);
  const double size = norm(bundle, state.norm);
  const double fee = 0.5 * L * size * size;
  return {PaymentRule::SmoothQuad, linear, fee, linear + fee};
}

PaymentQuote quote(const MarketState& state, ConstVecRef bundle, PaymentRule rule) {
  return rule == PaymentRule::DCFMM ? quote_dcfmm(state, bundle) : quote_smoothquad(state, bundle);
}

const TradeRecord& apply_trade(MarketState& state, Ledger& ledger, std::string trader_id,
                               ConstVecRef bundle, PaymentRule rule) {
  if (ledger.q0.size() != state.q.size()) throw invalid_input("ledger belongs to another market");
  const PaymentQuote paid = quote(state, bundle, rule);
  Vec next = add(state.q, bundle);

  TradeRecord record;
  record.round = state.t;
  record.trader_id = std::move(trader_id);
  record.bundle.assign(bundle.begin(), bundle.end());
  record.quote = paid;
  record.pre_price = grad(state.cost, state.q);
  record.post_price = grad(state.cost, next);

  ledger.records.push_back(std::move(record));
  ledger.cumulative_revenue += paid.total;
  state.q = std::move(next);
  ++state.t;
  return ledger.records.back();
}

Vec net_bundle(const Ledger& ledger) {
  Vec total(ledger.dimension(), 0.0);
  for (const TradeRecord& rec : ledger.records) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += rec.bundle[i];
  }
  return total;
}

SettlementReport settle(const Ledger& ledger, std::size_t outcome) {
  if (outcome >= ledger.dimension()) {
    throw invalid_input("outcome index " + std::to_string(outcome) + " out of range for " +
                        std::to_string(ledger.dimension()) + " outcomes");
  }
  SettlementReport report;
  report.outcome = outcome;
  report.revenue = ledger.cumulative_revenue;
  report.record_payouts.reserve(ledger.records.size());
  for (const TradeRecord& rec : ledger.records) {
    const double payout = rec.bundle[outcome];
    report.record_payouts.push_back(payout);
    report.trader_payouts[rec.trader_id] += payout;
    report.total_payout += payout;
  }
  report.market_pnl = report.revenue - report.total_payout;
  return report;
}

double worst_case_loss(const Ledger& ledger) {
  if (ledger.empty()) return 0.0;
  const Vec payout = net_bundle(ledger);
  const double worst = *std::max_element(payout.begin(), payout.end());
  return worst - ledger.cumulative_revenue;
}

}  // namespace sqpm
