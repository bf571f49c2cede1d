#include "sqpm/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "sqpm/cost.hpp"
#include "sqpm/liquidity.hpp"
#include "sqpm/market.hpp"
#include "sqpm/random.hpp"
#include "sqpm/scenario.hpp"

namespace sqpm {

namespace {

constexpr double kTol = 1e-12;

struct Tally {
  AxiomResult result;

  Tally(std::string name, bool gated = true) {
    result.name = std::move(name);
    result.gated = gated;
    result.worst_margin = INFINITY;
  }

  // margin = lhs - rhs of an inequality lhs >= rhs.
  void check(double margin, double tol) {
    ++result.checked;
    result.worst_margin = std::min(result.worst_margin, margin);
    if (!(margin >= -tol)) ++result.failures;
  }
};

Vec draw(Rng& rng, std::size_t d, double lo, double hi) {
  Vec v(d);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double min_entry(const Vec& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

std::vector<AxiomResult> run_axiom_suite(std::size_t samples, std::uint64_t seed) {
  const std::size_t dims[] = {2, 3, 5};
  std::vector<CostFunctionSpec> specs;
  for (std::size_t d : dims) {
    specs.push_back(make_softmax(d, 1.0));
    specs.push_back(make_sparsemax(d, 1.0));
  }

  Tally simplex("price_on_simplex");
  Tally no_arb("no_arbitrage");
  Tally info("information_incorporation");
  Tally fee("fee_nonnegativity");
  Tally expressive("expressiveness");
  Tally dominance("revenue_dominance");
  Tally vpm_fee("vpm_liquidity_fee_nonnegativity");
  Tally vpm_dominance("vpm_revenue_dominance");
  Tally vpm_no_arb("vpm_no_arbitrage");
  Tally vpm_info("vpm_information_incorporation", false);

  Rng rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const CostFunctionSpec& spec = specs[i % specs.size()];
    const std::size_t d = spec.dimension;
    const MarketState state = make_market(spec, draw(rng, d, -10.0, 10.0));
    const Vec r = draw(rng, d, -10.0, 10.0);
    MarketState moved = state;
    moved.q = add(state.q, r);

    const Vec p = inst_price(state);
    simplex.check(std::min(min_entry(p), -std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0)),
                  kTol);

    for (PaymentRule rule : {PaymentRule::SmoothQuad, PaymentRule::DCFMM}) {
      const PaymentQuote first = quote(state, r, rule);
      no_arb.check(first.total - min_entry(r), kTol);
      info.check(quote(moved, r, rule).total - first.total, kTol);
      fee.check(first.fee_part, kTol);
    }
    dominance.check(quote_smoothquad(state, r).total - quote_dcfmm(state, r).total, kTol);

    // Interior target, then the state that should price it.
    Vec target = draw(rng, d, 0.05, 1.0);
    const double mass = std::accumulate(target.begin(), target.end(), 0.0);
    for (double& x : target) x /= mass;
    expressive.check(1e-6 - norm(sub(grad(spec, state_for_price(spec, target)), target),
                                 NormKind::L1),
                     0.0);

    LiquidityParams params;
    params.alpha0 = 1.0;
    params.kappa = 1.0;
    params.base_cost = spec;
    const double v = rng.uniform(0.0, 10.0);
    vpm_fee.check(liquidity_fee(params, state.q, v, r), 0.0);
    const double smooth = quote_vpm_smoothquad(params, state.q, v, r, NormKind::L2).total;
    vpm_dominance.check(smooth - pay_vpm_dcfmm(params, state.q, v, r), kTol);
    const double v_next = v + volume_increment(r);
    vpm_info.check(quote_vpm_smoothquad(params, moved.q, v_next, r, NormKind::L2).total - smooth,
                   kTol);
  }

  // Buy-heavy histories of 20 trades each against a fresh adaptive market.
  const std::size_t histories = std::max<std::size_t>(1, samples / 10);
  for (std::size_t h = 0; h < histories; ++h) {
    const CostFunctionSpec& spec = specs[h % specs.size()];
    const std::size_t d = spec.dimension;
    LiquidityParams params;
    params.alpha0 = 1.0;
    params.kappa = 1.0;
    params.base_cost = spec;
    VpmMarket market = make_vpm_market(params, draw(rng, d, -10.0, 10.0), 0.0);
    Ledger ledger = make_ledger(market.state);
    for (int t = 0; t < 20; ++t) vpm_apply_trade(market, ledger, "h", draw(rng, d, -1.0, 3.0));
    const Vec total = net_bundle(ledger);
    vpm_no_arb.check(ledger.cumulative_revenue - min_entry(total), 1e-9);
  }

  std::vector<AxiomResult> out;
  for (Tally* t : {&simplex, &no_arb, &info, &fee, &expressive, &dominance, &vpm_fee,
                   &vpm_dominance, &vpm_no_arb, &vpm_info}) {
    if (t->result.checked == 0) t->result.worst_margin = 0.0;
    out.push_back(t->result);
  }
  return out;
}

void print_axiom_report(std::ostream& out, const std::vector<AxiomResult>& results) {
  for (const AxiomResult& r : results) {
    out << (r.gated ? (r.passed() ? "PASS " : "FAIL ") : "INFO ") << r.name
        << " checked=" << r.checked << " failures=" << r.failures
        << " worst_margin=" << format_double(r.worst_margin) << "\n";
  }
}

}  // namespace sqpm
