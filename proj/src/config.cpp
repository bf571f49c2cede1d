#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sqpm/error.hpp"
#include "sqpm/scenario.hpp"

namespace sqpm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class Fields {
 public:
  Fields(std::map<std::string, Entry> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    std::string where = source_;
    if (it != entries_.end()) where += ":" + std::to_string(it->second.line);
    throw config_error(where + ": field '" + key + "': " + what);
  }

  std::string text(const std::string& key, std::string fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_number(key, entries_.at(key).value);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entries_.at(key).value;
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, "expected a nonnegative integer");
    return out;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = lower(entries_.at(key).value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "expected true or false");
  }

  std::optional<Vec> vector(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    Vec out;
    std::stringstream ss(entries_.at(key).value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
    if (out.empty()) fail(key, "expected a comma-separated list of numbers");
    return out;
  }

  template <typename Fn>
  auto parse(const std::string& key, Fn&& fn) const {
    try {
      return fn(entries_.at(key).value);
    } catch (const error& e) {
      fail(key, e.what());
    }
  }

 private:
  // Decimal literal, or a ratio "a/b" of two decimals.
  double parse_number(const std::string& key, const std::string& v) const {
    auto one = [&](std::string_view s) {
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(x)) {
        fail(key, "'" + v + "' is not a finite number");
      }
      return x;
    };
    const auto slash = v.find('/');
    if (slash == std::string::npos) return one(trim(v));
    const double den = one(trim(std::string_view(v).substr(slash + 1)));
    if (den == 0.0) fail(key, "division by zero in '" + v + "'");
    return one(trim(std::string_view(v).substr(0, slash))) / den;
  }

  std::map<std::string, Entry> entries_;
  std::string source_;
};

const char* const kKnownKeys[] = {
    "name",        "dimension",        "cost",          "l",           "norm",
    "experimental_l1", "q0",           "belief",        "rounds",      "trader",
    "budget",      "buy_only",         "solver_max_iters", "solver_tol", "solver_dual_step",
    "liquidity",   "alpha0",           "kappa",         "v0",          "seed",
    "trace_out",   "ledger_out",       "summary_out",   "path_out"};

}  // namespace

TraderConfig ScenarioConfig::trader() const {
  TraderConfig tc;
  tc.belief = belief;
  tc.norm = norm;
  tc.budget = budget;
  tc.buy_only = mode == TraderMode::BuyOnly || mode == TraderMode::BudgetedBuyOnly;
  tc.solver = solver;
  return tc;
}

void ScenarioConfig::validate() const {
  auto bad = [](const std::string& what) { throw config_error("invalid scenario: " + what); };
  if (!(cost.L > 0.0)) bad("L must be positive");
  if (cost.dimension < 2) bad("dimension must be at least 2");
  if (q0.size() != cost.dimension) bad("q0 does not match the dimension");
  if (belief.size() != cost.dimension) bad("belief does not match the dimension");
  if (!is_finite(q0)) bad("q0 has non-finite entries");
  if (!on_simplex(belief)) bad("belief not on simplex");
  if (cost.family == CostFamily::Softmax &&
      std::any_of(belief.begin(), belief.end(), [](double x) { return !(x > 0.0); })) {
    bad("belief must be strictly interior for softmax");
  }
  if (rounds < 1) bad("rounds must be at least 1");
  const bool budgeted = mode == TraderMode::Budgeted || mode == TraderMode::BudgetedBuyOnly;
  if (budgeted && !budget) bad("budgeted trader needs a budget");
  if (budget && !(*budget > 0.0)) bad("budget must be positive");
  if (!budgeted && budget) bad("budget is set but the trader is not budgeted");
  if (solver.max_iters == 0 || !(solver.tol > 0.0)) bad("solver settings must be positive");
  if (!registered_smoothness(cost, norm) && !(experimental_l1 && norm == NormKind::L1)) {
    bad(std::string(to_string(cost.family)) + " has no registered " +
        std::string(to_string(norm)) + " smoothness" +
        (norm == NormKind::L1 ? "; set experimental_l1 = true to use it anyway" : ""));
  }
  if (liquidity) {
    if (!(liquidity->alpha0 > 0.0)) bad("alpha0 must be positive");
    if (!(liquidity->kappa >= 0.0)) bad("kappa must be nonnegative");
    if (!(liquidity->v0 >= 0.0)) bad("v0 must be nonnegative");
  }
}

ScenarioConfig parse_config(std::string_view text, std::string_view source) {
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw config_error(where + ": expected 'key = value'");
    const std::string key = lower(trim(std::string_view(line).substr(0, eq)));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys)) {
      throw config_error(where + ": unknown field '" + key + "'");
    }
    if (value.empty()) throw config_error(where + ": field '" + key + "' has no value");
    if (!entries.emplace(key, Entry{value, line_no}).second) {
      throw config_error(where + ": field '" + key + "' given twice");
    }
  }

  const Fields f(std::move(entries), std::string(source));
  ScenarioConfig cfg;
  cfg.name = f.text("name", cfg.name);

  std::optional<Vec> q0 = f.vector("q0");
  std::optional<Vec> belief = f.vector("belief");
  if (!belief) throw config_error(std::string(source) + ": missing required field 'belief'");
  std::size_t d = f.count("dimension", belief->size());
  if (d != belief->size()) f.fail("belief", "has " + std::to_string(belief->size()) +
                                                " entries but dimension is " + std::to_string(d));
  if (q0 && q0->size() != d) {
    f.fail("q0", "has " + std::to_string(q0->size()) + " entries but dimension is " +
                     std::to_string(d));
  }
  cfg.q0 = q0 ? *q0 : Vec(d, 0.0);
  cfg.belief = *belief;

  cfg.cost.dimension = d;
  if (f.has("cost")) {
    cfg.cost.family = f.parse("cost", [](const std::string& v) { return parse_cost_family(v); });
  }
  cfg.cost.L = f.number("l", 1.0);
  if (f.has("norm")) cfg.norm = f.parse("norm", [](const std::string& v) { return parse_norm(v); });
  cfg.experimental_l1 = f.flag("experimental_l1", false);

  if (!f.has("rounds")) throw config_error(std::string(source) + ": missing required field 'rounds'");
  cfg.rounds = f.count("rounds", 0);

  const std::string trader = lower(f.text("trader", "unconstrained"));
  const bool buy_only = f.flag("buy_only", false);
  if (trader == "unconstrained") {
    cfg.mode = buy_only ? TraderMode::BuyOnly : TraderMode::Unconstrained;
  } else if (trader == "buy_only") {
    cfg.mode = TraderMode::BuyOnly;
  } else if (trader == "budgeted") {
    cfg.mode = buy_only ? TraderMode::BudgetedBuyOnly : TraderMode::Budgeted;
  } else if (trader == "budgeted_buy_only") {
    cfg.mode = TraderMode::BudgetedBuyOnly;
  } else {
    f.fail("trader", "expected unconstrained, buy_only, budgeted or budgeted_buy_only");
  }
  if (f.has("budget")) cfg.budget = f.number("budget", 0.0);
  cfg.solver.max_iters = f.count("solver_max_iters", cfg.solver.max_iters);
  cfg.solver.tol = f.number("solver_tol", cfg.solver.tol);
  cfg.solver.dual_step = f.number("solver_dual_step", cfg.solver.dual_step);

  if (f.flag("liquidity", false)) {
    cfg.liquidity = LiquidityConfig{f.number("alpha0", 1.0), f.number("kappa", 0.0),
                                    f.number("v0", 0.0)};
  } else {
    for (const char* key : {"alpha0", "kappa", "v0"}) {
      if (f.has(key)) f.fail(key, "set while liquidity is off");
    }
  }

  cfg.seed = f.count("seed", 0);

  cfg.trace_out = f.text("trace_out", "");
  cfg.ledger_out = f.text("ledger_out", "");
  cfg.summary_out = f.text("summary_out", "");
  cfg.path_out = f.text("path_out", "");

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ScenarioConfig cfg = parse_config(buffer.str(), path.string());
  if (cfg.name == "scenario") cfg.name = path.stem().string();
  return cfg;
}

}  // namespace sqpm
