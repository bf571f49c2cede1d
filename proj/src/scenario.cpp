#include "sqpm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "sqpm/error.hpp"
#include "sqpm/random.hpp"

namespace sqpm {

namespace {

// Trades on the flat view at the current volume; the market then charges the
// adaptive-liquidity payment. Suboptimality is measured against the cost in
// force at each row's volume.
ConvergenceTrace run_vpm(const ScenarioConfig& config, VpmMarket& market, Ledger& ledger,
                         Vec& volumes) {
  const TraderConfig trader = config.trader();
  trader.validate(config.dimension());

  ConvergenceTrace trace;
  trace.cost = config.cost;
  trace.norm = config.norm;
  trace.mode = mode_of(trader);
  trace.smoothness = vpm_smoothness(market.params, config.norm, market.volume.v,
                                    config.experimental_l1);
  trace.experimental = config.experimental_l1 && is_experimental(config.cost, config.norm);
  trace.approximate = is_approximate(trader);
  trace.belief = config.belief;
  trace.q_star = optimal_state(cost_at_volume(market.params, market.volume.v), config.belief,
                               market.state.q);

  auto record = [&](double payment) {
    const CostFunctionSpec flat = cost_at_volume(market.params, market.volume.v);
    const Vec q_star = optimal_state(flat, config.belief, config.q0);
    TraceRow row;
    row.t = trace.rows.size();
    row.q = market.state.q;
    row.price = vpm_grad(market.params, market.state.q, market.volume.v);
    row.l1_gap = norm(sub(row.price, config.belief), NormKind::L1);
    row.suboptimality = surrogate_value(flat, market.state.q, config.belief) -
                        surrogate_value(flat, q_star, config.belief);
    row.payment = payment;
    row.revenue = ledger.cumulative_revenue;
    trace.rows.push_back(std::move(row));
    volumes.push_back(market.volume.v);
  };

  record(0.0);
  for (std::size_t t = 0; t < config.rounds; ++t) {
    try {
      const Vec bundle = trade(flat_view(market), trader);
      record(vpm_apply_trade(market, ledger, "trader-0", bundle).quote.total);
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

std::filesystem::path resolve(const std::filesystem::path& out_dir, const std::string& given,
                              const std::string& fallback) {
  const std::filesystem::path p = given.empty() ? fallback : given;
  return p.is_absolute() ? p : out_dir / p;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot write " + path.string());
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult result;
  if (config.liquidity) {
    LiquidityParams params;
    params.alpha0 = config.liquidity->alpha0;
    params.kappa = config.liquidity->kappa;
    params.base_cost = config.cost;
    VpmMarket market = make_vpm_market(params, config.q0, config.liquidity->v0, config.norm,
                                       config.experimental_l1);
    result.ledger = make_ledger(market.state);
    result.trace = run_vpm(config, market, result.ledger, result.volumes);
  } else {
    MarketState state = make_market(config.cost, config.q0, config.norm, config.experimental_l1);
    result.ledger = make_ledger(state);
    const TraderConfig trader = config.trader();
    result.trace = run_convergence(state, result.ledger, std::span(&trader, 1), config.rounds);
  }

  ScenarioSummary& s = result.summary;
  s.name = config.name;
  s.rounds_requested = config.rounds;
  s.rounds_completed = result.trace.rows.size() - 1;
  s.final_l1_gap = result.trace.rows.back().l1_gap;
  s.final_price = result.trace.rows.back().price;
  s.total_revenue = result.ledger.cumulative_revenue;
  s.worst_case_loss = worst_case_loss(result.ledger);
  s.experimental = result.trace.experimental;
  s.approximate = result.trace.approximate;
  s.liquidity = config.liquidity.has_value();
  s.seed = config.seed;
  s.failure = result.trace.failure;
  s.numeric_failure = result.trace.numeric_failure;
  return result;
}

ScenarioFiles write_scenario_outputs(const ScenarioConfig& config, const ScenarioResult& result,
                                     const std::filesystem::path& out_dir) {
  ScenarioFiles files;
  files.trace = resolve(out_dir, config.trace_out, config.name + ".trace.csv");
  files.ledger = resolve(out_dir, config.ledger_out, config.name + ".ledger.csv");
  files.summary = resolve(out_dir, config.summary_out, config.name + ".summary.json");
  {
    auto out = open_out(files.trace);
    write_trace_csv(out, result.trace, result.volumes);
  }
  {
    auto out = open_out(files.ledger);
    write_ledger_csv(out, result.ledger);
  }
  {
    auto out = open_out(files.summary);
    out << summary_json(result.summary);
  }
  if (config.dimension() == 3) {
    files.path = resolve(out_dir, config.path_out, config.name + ".path.csv");
    auto out = open_out(*files.path);
    emit_figure_data(out, result.trace, FigureStyle::SimplexPath);
  }
  return files;
}

FigureStyle parse_figure_style(std::string_view name) {
  if (name == "simplex_path") return FigureStyle::SimplexPath;
  if (name == "gap_vs_t") return FigureStyle::GapVsT;
  if (name == "envelope") return FigureStyle::Envelope;
  throw invalid_input("unknown figure style '" + std::string(name) +
                      "' (expected simplex_path, gap_vs_t or envelope)");
}

double Envelopes::gd(std::size_t t) const {
  return t == 0 ? INFINITY : gd_scale / static_cast<double>(t);
}

double Envelopes::sd(std::size_t t, double L) const {
  return 2.0 * L * sd_k * sd_k / (static_cast<double>(t) + 4.0);
}

Envelopes envelopes_of(const ConvergenceTrace& trace) {
  if (trace.rows.empty()) throw invalid_input("trace has no rows");
  Envelopes env;
  const double r0 = norm(sub(trace.rows.front().q, trace.q_star), NormKind::L2);
  env.gd_scale = 0.5 * trace.smoothness * r0 * r0;
  for (const TraceRow& row : trace.rows) {
    env.sd_k = std::max(env.sd_k, norm(sub(row.q, trace.q_star), trace.norm));
  }
  return env;
}

void emit_figure_data(std::ostream& out, const ConvergenceTrace& trace, FigureStyle style) {
  switch (style) {
    case FigureStyle::SimplexPath: {
      if (trace.belief.size() != 3) {
        throw invalid_input("simplex_path needs a ternary market, got dimension " +
                            std::to_string(trace.belief.size()));
      }
      const double h = std::sqrt(3.0) / 2.0;
      out << "kind,t,p1,p2,p3,x,y\n";
      auto point = [&](const char* kind, const std::string& t, const Vec& p) {
        out << kind << ',' << t << ',' << format_double(p[0]) << ',' << format_double(p[1]) << ','
            << format_double(p[2]) << ',' << format_double(p[1] + 0.5 * p[2]) << ','
            << format_double(h * p[2]) << "\n";
      };
      for (const TraceRow& row : trace.rows) point("path", std::to_string(row.t), row.price);
      point("belief", "", trace.belief);
      break;
    }
    case FigureStyle::GapVsT: {
      const Envelopes env = envelopes_of(trace);
      out << "t,l1_gap,suboptimality,gd_envelope,sd_envelope\n";
      for (const TraceRow& row : trace.rows) {
        out << row.t << ',' << format_double(row.l1_gap) << ',' << format_double(row.suboptimality)
            << ',' << format_double(env.gd(row.t)) << ','
            << format_double(env.sd(row.t, trace.smoothness)) << "\n";
      }
      break;
    }
    case FigureStyle::Envelope: {
      const Envelopes env = envelopes_of(trace);
      const bool l2 = trace.norm == NormKind::L2;
      out << "t,suboptimality,envelope,holds\n";
      for (const TraceRow& row : trace.rows) {
        if (row.t == 0) continue;
        const double bound = l2 ? env.gd(row.t) : env.sd(row.t, trace.smoothness);
        out << row.t << ',' << format_double(row.suboptimality) << ',' << format_double(bound)
            << ',' << (row.suboptimality <= bound + 1e-9 ? 1 : 0) << "\n";
      }
      break;
    }
  }
}

std::vector<Vec> random_history(std::size_t dimension, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> out(count, Vec(dimension));
  for (Vec& r : out) {
    for (double& x : r) x = rng.uniform(-1.0, 1.0);
  }
  return out;
}

std::vector<Vec> history_of(const Ledger& ledger) {
  std::vector<Vec> out;
  out.reserve(ledger.records.size());
  for (const TradeRecord& rec : ledger.records) out.push_back(rec.bundle);
  return out;
}

RevenueReport compare_revenue(const ScenarioConfig& config, const std::vector<Vec>& history,
                              std::optional<Vec> q0) {
  const Vec start = q0 ? std::move(*q0) : config.q0;
  MarketState dcfmm = make_market(config.cost, start, config.norm, config.experimental_l1);
  MarketState smooth = dcfmm;
  Ledger dcfmm_ledger = make_ledger(dcfmm);
  Ledger smooth_ledger = make_ledger(smooth);

  RevenueReport report;
  report.min_margin = INFINITY;
  for (const Vec& r : history) {
    if (r.size() != config.dimension()) throw invalid_input("history bundle has the wrong dimension");
    const double a = apply_trade(dcfmm, dcfmm_ledger, "history", r, PaymentRule::DCFMM).quote.total;
    const double b =
        apply_trade(smooth, smooth_ledger, "history", r, PaymentRule::SmoothQuad).quote.total;
    report.per_trade.push_back({a, b});
    report.min_margin = std::min(report.min_margin, b - a);
    if (b < a - 1e-12) ++report.dominance_violations;
  }
  if (history.empty()) report.min_margin = 0.0;
  report.cumulative_dcfmm = dcfmm_ledger.cumulative_revenue;
  report.cumulative_smoothquad = smooth_ledger.cumulative_revenue;
  report.worst_case_loss_dcfmm = worst_case_loss(dcfmm_ledger);
  report.worst_case_loss_smoothquad = worst_case_loss(smooth_ledger);
  return report;
}

void write_revenue_report(std::ostream& out, const RevenueReport& report) {
  out << "# trades=" << report.per_trade.size() << "\n";
  out << "# cumulative_dcfmm=" << format_double(report.cumulative_dcfmm) << "\n";
  out << "# cumulative_smoothquad=" << format_double(report.cumulative_smoothquad) << "\n";
  out << "# worst_case_loss_dcfmm=" << format_double(report.worst_case_loss_dcfmm) << "\n";
  out << "# worst_case_loss_smoothquad=" << format_double(report.worst_case_loss_smoothquad)
      << "\n";
  out << "# dominance_violations=" << report.dominance_violations << "\n";
  out << "# min_margin=" << format_double(report.min_margin) << "\n";
  out << "trade,dcfmm,smoothquad,margin\n";
  for (std::size_t i = 0; i < report.per_trade.size(); ++i) {
    const RevenueRow& row = report.per_trade[i];
    out << i + 1 << ',' << format_double(row.dcfmm) << ',' << format_double(row.smoothquad) << ','
        << format_double(row.smoothquad - row.dcfmm) << "\n";
  }
}

}  // namespace sqpm
