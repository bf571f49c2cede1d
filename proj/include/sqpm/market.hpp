#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqpm/convex.hpp"
#include "sqpm/cost.hpp"

namespace sqpm {

enum class PaymentRule { DCFMM, SmoothQuad };

std::string_view to_string(PaymentRule rule) noexcept;
PaymentRule parse_payment_rule(std::string_view name);

/// Outstanding shares plus the market's pricing configuration.
struct MarketState {
  Vec q;
  std::size_t t = 0;
  CostFunctionSpec cost;
  NormKind norm = NormKind::L2;  ///< norm of the quadratic fee
  bool allow_experimental = false;
};

MarketState make_market(const CostFunctionSpec& cost, Vec q0, NormKind norm = NormKind::L2,
                        bool allow_experimental = false);

/// Payment split into the instantaneous-price term and the fee term.
struct PaymentQuote {
  PaymentRule rule = PaymentRule::SmoothQuad;
  double linear_part = 0.0;
  double fee_part = 0.0;
  double total = 0.0;
};

/// Extra columns carried by trades priced through the volume-parameterized layer.
struct VolumeColumns {
  double v_pre = 0.0;
  double v_post = 0.0;
  double liquidity_fee = 0.0;
};

struct TradeRecord {
  std::size_t round = 0;
  std::string trader_id;
  Vec bundle;
  PaymentQuote quote;
  Vec pre_price;
  Vec post_price;
  std::optional<VolumeColumns> volume;
};

struct Ledger {
  Vec q0;
  std::vector<TradeRecord> records;
  double cumulative_revenue = 0.0;

  std::size_t dimension() const noexcept { return q0.size(); }
  bool empty() const noexcept { return records.empty(); }
};

Ledger make_ledger(const MarketState& state);

Vec inst_price(const MarketState& state);

/// C(q + r) - C(q), split as <grad C(q), r> + D_C(q + r, q).
PaymentQuote quote_dcfmm(const MarketState& state, ConstVecRef bundle);
/// <grad C(q), r> + (L/2)||r||^2 with L the smoothness of C under state.norm.
PaymentQuote quote_smoothquad(const MarketState& state, ConstVecRef bundle);
PaymentQuote quote(const MarketState& state, ConstVecRef bundle, PaymentRule rule);

/// Prices the bundle, then advances the state and appends to the ledger.
/// State and ledger are untouched if quoting throws.
const TradeRecord& apply_trade(MarketState& state, Ledger& ledger, std::string trader_id,
                               ConstVecRef bundle, PaymentRule rule);

struct SettlementReport {
  std::size_t outcome = 0;
  std::vector<double> record_payouts;  ///< <r_t, delta_y> per ledger record
  std::map<std::string, double> trader_payouts;
  double total_payout = 0.0;
  double revenue = 0.0;
  double market_pnl = 0.0;  ///< revenue - total_payout
};

/// Settles every ledger record against outcome index y (0-based).
SettlementReport settle(const Ledger& ledger, std::size_t outcome);

/// Sum of all traded bundles.
Vec net_bundle(const Ledger& ledger);

/// max over outcomes of (total payout - collected revenue). Zero for an
/// empty ledger.
double worst_case_loss(const Ledger& ledger);

}  // namespace sqpm
