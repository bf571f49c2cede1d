#include "sqpm/convex.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "sqpm/error.hpp"

namespace sqpm {

std::string_view to_string(NormKind kind) noexcept {
  switch (kind) {
    case NormKind::L1:
      return "l1";
    case NormKind::L2:
      return "l2";
    case NormKind::LInf:
      return "linf";
  }
  return "?";
}

NormKind parse_norm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "l1") return NormKind::L1;
  if (lower == "l2") return NormKind::L2;
  if (lower == "linf" || lower == "l_inf" || lower == "inf") return NormKind::LInf;
  throw invalid_input("unknown norm '" + std::string(name) + "' (expected l1, l2 or linf)");
}

bool is_finite(ConstVecRef v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(ConstVecRef v, std::string_view what) {
  if (!is_finite(v)) throw invalid_input(std::string(what) + " has non-finite entries");
}

bool on_simplex(ConstVecRef p, double tol) noexcept {
  if (p.empty() || !is_finite(p)) return false;
  double sum = 0.0;
  for (double x : p) {
    if (x < -tol) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

namespace {

void require_same_size(ConstVecRef a, ConstVecRef b) {
  if (a.size() != b.size()) throw invalid_input("dimension mismatch");
}

}  // namespace

double dot(ConstVecRef a, ConstVecRef b) {
  require_same_size(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec add(ConstVecRef a, ConstVecRef b) {
  require_same_size(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec sub(ConstVecRef a, ConstVecRef b) {
  require_same_size(a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec scaled(ConstVecRef a, double s) {
  Vec out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

Vec ones(std::size_t d) { return Vec(d, 1.0); }

double norm(ConstVecRef v, NormKind kind) {
  require_finite(v);
  switch (kind) {
    case NormKind::L1: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormKind::L2: {
      // Scaled accumulation so huge entries do not overflow.
      double scale = 0.0;
      for (double x : v) scale = std::max(scale, std::abs(x));
      if (scale == 0.0) return 0.0;
      double s = 0.0;
      for (double x : v) {
        const double y = x / scale;
        s += y * y;
      }
      return scale * std::sqrt(s);
    }
    case NormKind::LInf: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
  }
  return 0.0;
}

double dual_norm(ConstVecRef v, NormKind kind) { return norm(v, dual(kind)); }

Vec project_simplex(ConstVecRef z) {
  if (z.empty()) throw invalid_input("cannot project an empty vector");
  require_finite(z, "projection input");
  const std::size_t d = z.size();

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Descending by value, ties by index.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });

  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    cumulative += z[order[k]];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (z[order[k]] - candidate > 0.0) threshold = candidate;
  }

  Vec p(d);
  double sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    p[i] = std::max(z[i] - threshold, 0.0);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

double bregman(const ScalarField& f, const VectorField& grad, ConstVecRef x, ConstVecRef y) {
  require_finite(x, "x");
  require_finite(y, "y");
  const Vec gy = grad(y);
  return f(x) - f(y) - dot(gy, sub(x, y));
}

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

struct Rule {
  double kronrod;
  double gauss;
};

Rule gauss_kronrod_rule(const std::function<double(double)>& fn, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = fn(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = fn(center - dx);
    const double f2 = fn(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {kronrod * half, gauss * half};
}

// The Kronrod/Gauss difference alone can miss a kink in the integrand (the
// sparsemax price is only piecewise smooth), so the estimate also compares
// the whole-interval rule against the sum over its two halves.
Segment gauss_kronrod(const std::function<double(double)>& fn, double a, double b) {
  const double mid = 0.5 * (a + b);
  const Rule whole = gauss_kronrod_rule(fn, a, b);
  const Rule left = gauss_kronrod_rule(fn, a, mid);
  const Rule right = gauss_kronrod_rule(fn, mid, b);
  const double value = left.kronrod + right.kronrod;
  if (!std::isfinite(value) || !std::isfinite(whole.kronrod)) {
    throw numeric_failure("integrand produced a non-finite value");
  }
  const double error =
      std::max(std::abs(whole.kronrod - value),
               std::abs(left.kronrod - left.gauss) + std::abs(right.kronrod - right.gauss));
  return {a, b, value, error};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           double tol) {
  if (!(tol > 0.0)) throw invalid_input("quadrature tolerance must be positive");
  if (a == b) return {0.0, 0.0, 0};

  std::priority_queue<Segment> heap;
  const Segment first = gauss_kronrod(fn, a, b);
  heap.push(first);
  double total = first.value;
  double total_error = first.error;
  std::size_t intervals = 1;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto converged = [&] {
    // Below this floor the Kronrod/Gauss difference is pure rounding.
    const double floor = 50.0 * eps * std::abs(total);
    return total_error <= tol || total_error <= floor;
  };

  while (!converged()) {
    if (intervals >= kQuadratureIntervalCap) {
      throw numeric_failure("adaptive quadrature did not reach tolerance within " +
                            std::to_string(kQuadratureIntervalCap) + " intervals");
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gauss_kronrod(fn, worst.a, mid);
    const Segment right = gauss_kronrod(fn, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }

  // Re-sum from scratch so the incremental updates leave no drift.
  double value = 0.0;
  double error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {value, error, intervals};
}

double line_integral_price(const VectorField& grad, ConstVecRef q, ConstVecRef r, double tol) {
  require_finite(q, "state");
  require_finite(r, "bundle");
  if (q.size() != r.size()) throw invalid_input("dimension mismatch");
  if (!(tol > 0.0)) throw invalid_input("quadrature tolerance must be positive");
  if (std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; })) return 0.0;

  Vec point(q.size());
  auto integrand = [&](double s) {
    for (std::size_t i = 0; i < q.size(); ++i) point[i] = q[i] + s * r[i];
    return dot(grad(point), r);
  };
  return integrate(integrand, 0.0, 1.0, tol).value;
}

double default_fd_step(ConstVecRef x) { return 1e-6 * (1.0 + norm(x, NormKind::LInf)); }

Vec finite_diff_grad(const ScalarField& f, ConstVecRef x, double h, DiffScheme scheme) {
  require_finite(x, "evaluation point");
  if (h <= 0.0) h = default_fd_step(x);
  Vec probe(x.begin(), x.end());
  Vec g(x.size());
  const double fx = scheme == DiffScheme::Central ? 0.0 : f(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    switch (scheme) {
      case DiffScheme::Central: {
        probe[i] = xi + h;
        const double up = f(probe);
        probe[i] = xi - h;
        const double down = f(probe);
        g[i] = (up - down) / (2.0 * h);
        break;
      }
      case DiffScheme::Forward:
        probe[i] = xi + h;
        g[i] = (f(probe) - fx) / h;
        break;
      case DiffScheme::Backward:
        probe[i] = xi - h;
        g[i] = (fx - f(probe)) / h;
        break;
    }
    probe[i] = xi;
  }
  return g;
}

}  // namespace sqpm
