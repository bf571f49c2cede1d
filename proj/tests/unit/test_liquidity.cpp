#include "doctest.h"
#include "oracles.hpp"
#include "sqpm/error.hpp"
#include "sqpm/liquidity.hpp"

using namespace sqpm;
using doctest::Approx;

namespace {

LiquidityParams params(const CostFunctionSpec& base, double alpha0 = 1.0, double kappa = 1.0) {
  LiquidityParams p;
  p.alpha0 = alpha0;
  p.kappa = kappa;
  p.base_cost = base;
  return p;
}

}  // namespace

TEST_CASE("volume increment") {
  CHECK(volume_increment(Vec{1.0, 2.0, 0.0}) == 3.0);
  CHECK(volume_increment(Vec{-1.0, -2.0, 0.0}) == 0.0);
  CHECK(volume_increment(Vec{2.0, -5.0, 1.0}) == 3.0);
}

TEST_CASE("asymmetric norm axioms") {
  Rng rng(3);
  CHECK(volume_increment(Vec{0.0, 0.0}) == 0.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec x = oracle::uniform(rng, 4, -3, 3);
    const Vec y = oracle::uniform(rng, 4, -3, 3);
    const double a = rng.uniform(0.01, 5.0);
    CHECK(volume_increment(x) >= 0.0);
    CHECK(volume_increment(scaled(x, a)) == Approx(a * volume_increment(x)).epsilon(1e-14));
    CHECK(volume_increment(add(x, y)) <= volume_increment(x) + volume_increment(y) + 1e-14);
    // g(x) = g(-x) = 0 only at x = 0
    CHECK(volume_increment(x) + volume_increment(scaled(x, -1.0)) > 0.0);
  }
}

TEST_CASE("liquidity schedule") {
  const auto p = params(make_softmax(3, 1.0), 1.0, 1.0);
  CHECK(liquidity_alpha(p, 0.0) == 1.0);
  CHECK(liquidity_alpha(p, std::exp(1.0) - 1.0) == Approx(2.0));
  CHECK(vpm_smoothness(p, NormKind::L2, std::exp(1.0) - 1.0) == Approx(0.5));
  CHECK_THROWS_AS(liquidity_alpha(p, -1.0), invalid_input);
  LiquidityParams bad = p;
  bad.alpha0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), invalid_input);
  bad = p;
  bad.kappa = -1.0;
  CHECK_THROWS_AS(bad.validate(), invalid_input);
}

TEST_CASE("vpm cost examples") {
  const auto base = make_softmax(3, 1.0);
  const Vec q{1.0, 0.0, 0.0};
  CHECK(vpm_cost(params(base, 1.0, 0.0), q, 7.0) == Approx(cost(base, q)));
  const auto p = params(base);
  CHECK(vpm_cost(p, q, 0.0) == Approx(std::log(std::exp(1.0) + 2.0)));
  CHECK(vpm_cost(p, q, std::exp(1.0) - 1.0) == Approx(2.0 * cost(base, scaled(q, 0.5))));
  const double s = 1.7;
  const double v = 4.0;
  const double alpha = liquidity_alpha(p, v);
  CHECK(vpm_cost(p, scaled(ones(3), alpha * s), v) == Approx(alpha * (cost(base, Vec(3, 0.0)) + s)));
}

TEST_CASE("vpm cost is CIIP in q and nondecreasing in v") {
  Rng rng(5);
  for (const CostFunctionSpec& base : {make_softmax(3, 1.0), make_sparsemax(3, 1.0)}) {
    const auto p = params(base, 1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      const Vec q = oracle::uniform(rng, 3, -5, 5);
      const double v = rng.uniform(0.0, 20.0);
      const double dv = rng.uniform(0.0, 5.0);
      CHECK(vpm_cost(p, q, v + dv) >= vpm_cost(p, q, v) - 1e-12);
      const double a = rng.uniform(-3, 3);
      CHECK(vpm_cost(p, add(q, scaled(ones(3), a)), v) == Approx(vpm_cost(p, q, v) + a).epsilon(1e-12));
      CHECK(on_simplex(vpm_grad(p, q, v)));
      // price matches finite differences of the cost in q
      const Vec fd = finite_diff_grad([&](ConstVecRef x) { return vpm_cost(p, x, v); }, q);
      if (base.family == CostFamily::Softmax) CHECK(oracle::max_abs_diff(fd, vpm_grad(p, q, v)) < 1e-6);
      // flat cost at fixed v differs from C° only by a constant in q
      const Vec q2 = oracle::uniform(rng, 3, -5, 5);
      const CostFunctionSpec flat = cost_at_volume(p, v);
      CHECK((vpm_cost(p, q2, v) - vpm_cost(p, q, v)) ==
            Approx(cost(flat, q2) - cost(flat, q)).epsilon(1e-10));
      CHECK(oracle::max_abs_diff(vpm_grad(p, q, v), grad(flat, q)) < 1e-12);
    }
  }
}

TEST_CASE("liquidity fee") {
  const auto base = make_softmax(3, 1.0);
  const auto p = params(base);
  const Vec q0{10.0, 20.0, 10.0};
  CHECK(liquidity_fee(p, q0, 0.0, Vec{-1.0, -0.5, 0.0}) == 0.0);
  CHECK(liquidity_fee(params(base, 1.0, 0.0), q0, 0.0, Vec{1.0, 0.0, 0.0}) == 0.0);
  CHECK(liquidity_fee(p, q0, 0.0, Vec{1.0, 0.0, 0.0}) > 0.0);
}

TEST_CASE("vpm smooth quadratic quote") {
  const auto base = make_softmax(3, 1.0);
  const MarketState flat = make_market(base, Vec{0.3, -0.2, 1.0});
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const Vec r = oracle::uniform(rng, 3, -2, 2);
    const PaymentQuote a = quote_vpm_smoothquad(params(base, 1.0, 0.0), flat.q, 3.0, r, NormKind::L2);
    const PaymentQuote b = quote_smoothquad(flat, r);
    CHECK(std::abs(a.total - b.total) <= 1e-12);
    CHECK(std::abs(a.fee_part - b.fee_part) <= 1e-12);
  }
  CHECK(quote_vpm_smoothquad(params(base), flat.q, 1.0, Vec{0, 0, 0}, NormKind::L2).total == 0.0);
  CHECK_THROWS_AS(quote_vpm_smoothquad(params(base), flat.q, 1.0, Vec{1, 0}, NormKind::L2), invalid_input);
  CHECK_THROWS_AS(quote_vpm_smoothquad(params(make_sparsemax(3, 1.0)), flat.q, 1.0, Vec{1, 0, 0}, NormKind::LInf),
                  unsupported_norm);
}

TEST_CASE("vpm fee dominance and fee nonnegativity") {
  Rng rng(12);
  for (const CostFunctionSpec& base : {make_softmax(3, 1.0), make_sparsemax(3, 1.0), make_softmax(5, 2.0)}) {
    const auto p = params(base, 1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t d = base.dimension;
      const Vec q = oracle::uniform(rng, d, -10, 10);
      const Vec r = oracle::uniform(rng, d, -10, 10);
      const double v = rng.uniform(0.0, 50.0);
      CHECK(liquidity_fee(p, q, v, r) >= 0.0);
      CHECK(quote_vpm_smoothquad(p, q, v, r, NormKind::L2).total >= pay_vpm_dcfmm(p, q, v, r) - 1e-12);
    }
  }
}

TEST_CASE("vpm market bookkeeping") {
  const auto base = make_softmax(3, 1.0);
  VpmMarket m = make_vpm_market(params(base), Vec{10.0, 20.0, 10.0}, 2.0);
  Ledger ledger = make_ledger(m.state);
  CHECK(m.volume.v == 2.0);
  vpm_apply_trade(m, ledger, "s", Vec{-1.0, -1.0, 0.0});
  CHECK(m.volume.v == 2.0);
  const TradeRecord& rec = vpm_apply_trade(m, ledger, "b", Vec{1.0, 0.5, -2.0});
  CHECK(m.volume.v == 3.5);
  REQUIRE(rec.volume.has_value());
  CHECK(rec.volume->v_pre == 2.0);
  CHECK(rec.volume->v_post == 3.5);
  CHECK(rec.volume->liquidity_fee > 0.0);
  CHECK(rec.post_price == vpm_grad(m.params, m.state.q, m.volume.v));
  CHECK(ledger.cumulative_revenue == ledger.records[0].quote.total + ledger.records[1].quote.total);
  CHECK_THROWS_AS(make_vpm_market(params(base), Vec(3, 0.0), -1.0), invalid_input);
}

TEST_CASE("buying deepens the market") {
  const auto base = make_softmax(3, 1.0);
  VpmMarket m = make_vpm_market(params(base), Vec(3, 0.0), 0.0);
  Ledger ledger = make_ledger(m.state);
  const Vec probe{0.5, 0.0, 0.0};
  double last_impact = INFINITY;
  double last_v = -1.0;
  for (int t = 0; t < 10; ++t) {
    // symmetric buys keep the price at the centre
    vpm_apply_trade(m, ledger, "b", Vec{1.0, 1.0, 1.0});
    CHECK(m.volume.v > last_v);
    last_v = m.volume.v;
    const Vec before = vpm_grad(m.params, m.state.q, m.volume.v);
    const Vec after = vpm_grad(m.params, add(m.state.q, probe), m.volume.v + volume_increment(probe));
    const double impact = norm(sub(after, before), NormKind::L1);
    CHECK(impact < last_impact);
    last_impact = impact;
  }
}

TEST_CASE("vpm no-arbitrage on buy-heavy histories") {
  Rng rng(77);
  for (int h = 0; h < 200; ++h) {
    const auto base = h % 2 ? make_softmax(3, 1.0) : make_sparsemax(3, 1.0);
    VpmMarket m = make_vpm_market(params(base), oracle::uniform(rng, 3, -5, 5), 0.0);
    Ledger ledger = make_ledger(m.state);
    for (int t = 0; t < 30; ++t) vpm_apply_trade(m, ledger, "x", oracle::uniform(rng, 3, -1.0, 3.0));
    const Vec net = net_bundle(ledger);
    CHECK(*std::min_element(net.begin(), net.end()) <= ledger.cumulative_revenue + 1e-9);
  }
}
