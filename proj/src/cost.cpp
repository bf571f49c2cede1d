#include "sqpm/cost.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "sqpm/error.hpp"

namespace sqpm {

std::string_view to_string(CostFamily family) noexcept {
  return family == CostFamily::Softmax ? "softmax" : "sparsemax";
}

CostFamily parse_cost_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "softmax") return CostFamily::Softmax;
  if (lower == "sparsemax") return CostFamily::Sparsemax;
  throw invalid_input("unknown cost family '" + std::string(name) +
                      "' (expected softmax or sparsemax)");
}

void CostFunctionSpec::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw invalid_input("cost parameter L must be positive");
  if (dimension < 2) throw invalid_input("market needs at least two outcomes");
}

CostFunctionSpec make_softmax(std::size_t dimension, double L) {
  CostFunctionSpec spec{CostFamily::Softmax, L, dimension};
  spec.validate();
  return spec;
}

CostFunctionSpec make_sparsemax(std::size_t dimension, double L) {
  CostFunctionSpec spec{CostFamily::Sparsemax, L, dimension};
  spec.validate();
  return spec;
}

namespace {

void check_state(const CostFunctionSpec& spec, ConstVecRef q) {
  if (q.size() != spec.dimension) {
    throw invalid_input("state has dimension " + std::to_string(q.size()) + ", market has " +
                        std::to_string(spec.dimension));
  }
  require_finite(q, "state");
}

}  // namespace

double cost(const CostFunctionSpec& spec, ConstVecRef q) {
  check_state(spec, q);
  if (spec.family == CostFamily::Softmax) {
    const double m = *std::max_element(q.begin(), q.end());
    double s = 0.0;
    for (double x : q) s += std::exp(spec.L * (x - m));
    return m + std::log(s) / spec.L;
  }
  const Vec p = project_simplex(scaled(q, 1.0 / spec.L));
  double value = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    value += q[i] * p[i];
    sq += p[i] * p[i];
  }
  return value - 0.5 * spec.L * sq;
}

Vec grad(const CostFunctionSpec& spec, ConstVecRef q) {
  check_state(spec, q);
  if (spec.family == CostFamily::Softmax) {
    const double m = *std::max_element(q.begin(), q.end());
    Vec p(q.size());
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      p[i] = std::exp(spec.L * (q[i] - m));
      s += p[i];
    }
    for (double& x : p) x /= s;
    return p;
  }
  return project_simplex(scaled(q, 1.0 / spec.L));
}

std::optional<double> registered_smoothness(const CostFunctionSpec& spec, NormKind kind) noexcept {
  switch (spec.family) {
    case CostFamily::Softmax:
      if (kind == NormKind::L2 || kind == NormKind::LInf) return spec.L;
      return std::nullopt;
    case CostFamily::Sparsemax:
      if (kind == NormKind::L2) return 1.0 / spec.L;
      return std::nullopt;
  }
  return std::nullopt;
}

bool is_experimental(const CostFunctionSpec& spec, NormKind kind) noexcept {
  return kind == NormKind::L1 && !registered_smoothness(spec, kind).has_value();
}

double smoothness(const CostFunctionSpec& spec, NormKind kind, bool allow_experimental) {
  if (auto registered = registered_smoothness(spec, kind)) return *registered;
  if (allow_experimental && kind == NormKind::L1) {
    // ||x||_2 <= ||x||_1 and ||x||_inf <= ||x||_1, so the l2 constant is a
    // valid upper bound for both families.
    return *registered_smoothness(spec, NormKind::L2);
  }
  throw unsupported_norm(std::string(to_string(spec.family)) + " has no registered " +
                         std::string(to_string(kind)) + " smoothness constant");
}

double bregman(const CostFunctionSpec& spec, ConstVecRef x, ConstVecRef y) {
  return bregman([&](ConstVecRef z) { return cost(spec, z); },
                 [&](ConstVecRef z) { return grad(spec, z); }, x, y);
}

namespace {

// Support changes of proj(z(s)) for z(s) = (q + s r)/L on (0, 1). The price
// is affine in s between consecutive breakpoints, and a support excursion
// can be narrower than any quadrature node spacing, so they are tracked
// exactly instead of left to the adaptive rule.
std::vector<double> sparsemax_breakpoints(double L, ConstVecRef q, ConstVecRef r) {
  const std::size_t d = q.size();
  constexpr double tie = 1e-12;
  std::vector<double> out;
  Vec z(d), dz(d);
  for (std::size_t i = 0; i < d; ++i) dz[i] = r[i] / L;
  double s = 0.0;
  for (std::size_t events = 0; s < 1.0; ++events) {
    if (events > 64 * d + 64) throw numeric_failure("sparsemax breakpoint tracking did not terminate");
    for (std::size_t i = 0; i < d; ++i) z[i] = (q[i] + s * r[i]) / L;
    const Vec p = project_simplex(z);
    double tau = 0.0;
    std::size_t top = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (p[i] > p[top]) top = i;
    }
    tau = z[top] - p[top];

    // Support just to the right of s: strictly positive coordinates, then
    // tied ones by decreasing speed while they outrun the threshold.
    std::vector<bool> in(d, false);
    std::vector<std::size_t> tied;
    double speed = 0.0;
    std::size_t count = 0;
    const double scale = tie * (1.0 + std::abs(tau));
    for (std::size_t i = 0; i < d; ++i) {
      if (p[i] > scale) {
        in[i] = true;
        speed += dz[i];
        ++count;
      } else if (std::abs(z[i] - tau) <= scale) {
        tied.push_back(i);
      }
    }
    std::sort(tied.begin(), tied.end(), [&](std::size_t a, std::size_t b) { return dz[a] > dz[b]; });
    for (std::size_t j : tied) {
      if (count > 0 && dz[j] <= speed / static_cast<double>(count)) break;
      in[j] = true;
      speed += dz[j];
      ++count;
    }
    const double tau_rate = speed / static_cast<double>(count);

    double step = INFINITY;
    for (std::size_t i = 0; i < d; ++i) {
      const double rel = dz[i] - tau_rate;
      if (in[i] && rel < 0.0) step = std::min(step, std::max(p[i], 0.0) / -rel);
      if (!in[i] && rel > 0.0) step = std::min(step, std::max(tau - z[i], 0.0) / rel);
    }
    const double next = s + std::max(step, 1e-15);
    if (!(next < 1.0)) break;
    out.push_back(next);
    s = next;
  }
  return out;
}

}  // namespace

double line_integral_price(const CostFunctionSpec& spec, ConstVecRef q, ConstVecRef r,
                           double tol) {
  check_state(spec, q);
  if (r.size() != q.size()) throw invalid_input("dimension mismatch");
  require_finite(r, "bundle");
  const VectorField field = [&](ConstVecRef z) { return grad(spec, z); };
  if (spec.family == CostFamily::Softmax) return line_integral_price(field, q, r, tol);

  std::vector<double> cuts = sparsemax_breakpoints(spec.L, q, r);
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(1.0);
  Vec point(q.size());
  auto integrand = [&](double s) {
    for (std::size_t i = 0; i < q.size(); ++i) point[i] = q[i] + s * r[i];
    return dot(grad(spec, point), r);
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] > cuts[k]) total += integrate(integrand, cuts[k], cuts[k + 1], tol).value;
  }
  return total;
}

RegularizerSpec regularizer_of(const CostFunctionSpec& spec) noexcept {
  return {spec.family == CostFamily::Softmax ? RegularizerFamily::NegEntropy
                                             : RegularizerFamily::SquaredL2,
          spec.L};
}

double conjugate_value(const RegularizerSpec& spec, ConstVecRef p) {
  if (!on_simplex(p)) throw domain_error("regularizer argument is not on the simplex");
  if (spec.family == RegularizerFamily::NegEntropy) {
    double s = 0.0;
    for (double x : p) {
      if (!(x > 0.0)) throw domain_error("entropy regularizer needs a strictly interior point");
      s += x * std::log(x);
    }
    return s / spec.L;
  }
  double sq = 0.0;
  for (double x : p) sq += x * x;
  return 0.5 * spec.L * sq;
}

double regularizer_max(const RegularizerSpec& spec, std::size_t /*dimension*/) {
  return spec.family == RegularizerFamily::NegEntropy ? 0.0 : 0.5 * spec.L;
}

double regularizer_min(const RegularizerSpec& spec, std::size_t dimension) {
  const double d = static_cast<double>(dimension);
  if (spec.family == RegularizerFamily::NegEntropy) return -std::log(d) / spec.L;
  return 0.5 * spec.L / d;
}

double dcfmm_loss_bound(const CostFunctionSpec& spec) {
  const RegularizerSpec reg = regularizer_of(spec);
  return regularizer_max(reg, spec.dimension) - regularizer_min(reg, spec.dimension);
}

Vec state_for_price(const CostFunctionSpec& spec, ConstVecRef mu) {
  if (mu.size() != spec.dimension || !on_simplex(mu)) {
    throw invalid_input("target price is not a simplex point of the market's dimension");
  }
  Vec q(mu.size());
  if (spec.family == CostFamily::Softmax) {
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!(mu[i] > 0.0)) throw domain_error("softmax prices are strictly interior");
      q[i] = std::log(mu[i]) / spec.L;
    }
  } else {
    for (std::size_t i = 0; i < mu.size(); ++i) q[i] = spec.L * mu[i];
  }
  return q;
}

}  // namespace sqpm
