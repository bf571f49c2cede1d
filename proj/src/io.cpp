#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "sqpm/error.hpp"
#include "sqpm/scenario.hpp"

namespace sqpm {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string join(const Vec& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (s == "nan") return NAN;
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw invalid_input("bad number '" + s + "'");
  }
  if (used != s.size()) throw invalid_input("bad number '" + s + "'");
  return x;
}

Vec to_vec(const std::string& s, char sep) {
  Vec out;
  for (const std::string& item : split(s, sep)) out.push_back(to_double(item));
  return out;
}

// Metadata lines look like "# key=value".
std::map<std::string, std::string> read_header(std::istream& in, std::string& first_data_line) {
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    first_data_line = line;
    break;
  }
  return meta;
}

const std::string& need(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw invalid_input("file header is missing '" + key + "'");
  return it->second;
}

TraderMode parse_mode(const std::string& s) {
  for (TraderMode m : {TraderMode::Unconstrained, TraderMode::BuyOnly, TraderMode::Budgeted,
                       TraderMode::BudgetedBuyOnly}) {
    if (to_string(m) == s) return m;
  }
  throw invalid_input("unknown trader mode '" + s + "'");
}

}  // namespace

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace, const Vec& volumes) {
  const std::size_t d = trace.cost.dimension;
  out << "# sqpm-trace=1\n";
  out << "# cost=" << to_string(trace.cost.family) << "\n";
  out << "# L=" << format_double(trace.cost.L) << "\n";
  out << "# norm=" << to_string(trace.norm) << "\n";
  out << "# mode=" << to_string(trace.mode) << "\n";
  out << "# smoothness=" << format_double(trace.smoothness) << "\n";
  out << "# experimental=" << (trace.experimental ? 1 : 0) << "\n";
  out << "# approximate=" << (trace.approximate ? 1 : 0) << "\n";
  out << "# belief=" << join(trace.belief, ';') << "\n";
  out << "# q_star=" << join(trace.q_star, ';') << "\n";
  out << "t";
  for (std::size_t i = 1; i <= d; ++i) out << ",q" << i;
  for (std::size_t i = 1; i <= d; ++i) out << ",p" << i;
  out << ",l1_gap,suboptimality,payment,revenue";
  if (!volumes.empty()) out << ",volume";
  out << "\n";
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    out << row.t << ',' << join(row.q, ',') << ',' << join(row.price, ',') << ','
        << format_double(row.l1_gap) << ',' << format_double(row.suboptimality) << ','
        << format_double(row.payment) << ',' << format_double(row.revenue);
    if (!volumes.empty()) out << ',' << format_double(volumes.at(k));
    out << "\n";
  }
  if (trace.failure) out << "# FAILED=" << *trace.failure << "\n";
}

ConvergenceTrace read_trace_csv(std::istream& in) {
  std::string header;
  const auto meta = read_header(in, header);
  if (need(meta, "sqpm-trace") != "1") throw invalid_input("unsupported trace version");

  ConvergenceTrace trace;
  trace.cost.family = parse_cost_family(need(meta, "cost"));
  trace.cost.L = to_double(need(meta, "L"));
  trace.norm = parse_norm(need(meta, "norm"));
  trace.mode = parse_mode(need(meta, "mode"));
  trace.smoothness = to_double(need(meta, "smoothness"));
  trace.experimental = need(meta, "experimental") == "1";
  trace.approximate = need(meta, "approximate") == "1";
  trace.belief = to_vec(need(meta, "belief"), ';');
  trace.q_star = to_vec(need(meta, "q_star"), ';');
  const std::size_t d = trace.belief.size();
  trace.cost.dimension = d;

  const std::size_t columns = split(header, ',').size();
  if (columns != 1 + 2 * d + 4 && columns != 2 + 2 * d + 4) {
    throw invalid_input("trace header does not match the belief dimension");
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# FAILED=", 0) == 0) {
      trace.failure = line.substr(9);
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != columns) throw invalid_input("trace row has the wrong number of columns");
    TraceRow row;
    row.t = static_cast<std::size_t>(std::stoull(cells[0]));
    for (std::size_t i = 0; i < d; ++i) row.q.push_back(to_double(cells[1 + i]));
    for (std::size_t i = 0; i < d; ++i) row.price.push_back(to_double(cells[1 + d + i]));
    row.l1_gap = to_double(cells[1 + 2 * d]);
    row.suboptimality = to_double(cells[2 + 2 * d]);
    row.payment = to_double(cells[3 + 2 * d]);
    row.revenue = to_double(cells[4 + 2 * d]);
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

void write_ledger_csv(std::ostream& out, const Ledger& ledger) {
  const std::size_t d = ledger.dimension();
  const bool volume = !ledger.records.empty() && ledger.records.front().volume.has_value();
  out << "# sqpm-ledger=1\n";
  out << "# q0=" << join(ledger.q0, ';') << "\n";
  out << "# cumulative_revenue=" << format_double(ledger.cumulative_revenue) << "\n";
  out << "round,trader_id,rule";
  for (std::size_t i = 1; i <= d; ++i) out << ",r" << i;
  out << ",linear_part,fee_part,total";
  for (std::size_t i = 1; i <= d; ++i) out << ",pre_p" << i;
  for (std::size_t i = 1; i <= d; ++i) out << ",post_p" << i;
  if (volume) out << ",v_pre,v_post,liquidity_fee";
  out << "\n";
  for (const TradeRecord& rec : ledger.records) {
    out << rec.round << ',' << rec.trader_id << ',' << to_string(rec.quote.rule) << ','
        << join(rec.bundle, ',') << ',' << format_double(rec.quote.linear_part) << ','
        << format_double(rec.quote.fee_part) << ',' << format_double(rec.quote.total) << ','
        << join(rec.pre_price, ',') << ',' << join(rec.post_price, ',');
    if (volume) {
      const VolumeColumns& v = rec.volume.value();
      out << ',' << format_double(v.v_pre) << ',' << format_double(v.v_post) << ','
          << format_double(v.liquidity_fee);
    }
    out << "\n";
  }
}

Ledger read_ledger_csv(std::istream& in) {
  std::string header;
  const auto meta = read_header(in, header);
  if (need(meta, "sqpm-ledger") != "1") throw invalid_input("unsupported ledger version");
  Ledger ledger;
  ledger.q0 = to_vec(need(meta, "q0"), ';');
  const std::size_t d = ledger.q0.size();
  const std::size_t base = 3 + d + 3 + 2 * d;
  const std::size_t columns = split(header, ',').size();
  if (columns != base && columns != base + 3) {
    throw invalid_input("ledger header does not match the state dimension");
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns) throw invalid_input("ledger row has the wrong number of columns");
    TradeRecord rec;
    rec.round = static_cast<std::size_t>(std::stoull(cells[0]));
    rec.trader_id = cells[1];
    rec.quote.rule = parse_payment_rule(cells[2]);
    std::size_t k = 3;
    for (std::size_t i = 0; i < d; ++i) rec.bundle.push_back(to_double(cells[k++]));
    rec.quote.linear_part = to_double(cells[k++]);
    rec.quote.fee_part = to_double(cells[k++]);
    rec.quote.total = to_double(cells[k++]);
    for (std::size_t i = 0; i < d; ++i) rec.pre_price.push_back(to_double(cells[k++]));
    for (std::size_t i = 0; i < d; ++i) rec.post_price.push_back(to_double(cells[k++]));
    if (columns == base + 3) {
      VolumeColumns v;
      v.v_pre = to_double(cells[k++]);
      v.v_post = to_double(cells[k++]);
      v.liquidity_fee = to_double(cells[k++]);
      rec.volume = v;
    }
    ledger.cumulative_revenue += rec.quote.total;
    ledger.records.push_back(std::move(rec));
  }
  return ledger;
}

std::string summary_json(const ScenarioSummary& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["rounds_requested"] = s.rounds_requested;
  j["rounds_completed"] = s.rounds_completed;
  j["final_l1_gap"] = s.final_l1_gap;
  j["final_price"] = s.final_price;
  j["total_revenue"] = s.total_revenue;
  j["worst_case_loss"] = s.worst_case_loss;
  j["experimental_l1"] = s.experimental;
  j["approximate_solver"] = s.approximate;
  j["liquidity"] = s.liquidity;
  j["seed"] = s.seed;
  if (s.failure) {
    j["failure"] = *s.failure;
    j["numeric_failure"] = s.numeric_failure;
  }
  return j.dump(2) + "\n";
}

}  // namespace sqpm
