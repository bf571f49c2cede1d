#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace sqpm {

using Vec = std::vector<double>;
using ConstVecRef = std::span<const double>;

/// Scalar field on R^d.
using ScalarField = std::function<double(ConstVecRef)>;
/// Vector field on R^d (e.g. a gradient map).
using VectorField = std::function<Vec(ConstVecRef)>;

enum class NormKind { L1, L2, LInf };

/// Dual pairing: L1 <-> LInf, L2 self-dual.
constexpr NormKind dual(NormKind kind) noexcept {
  switch (kind) {
    case NormKind::L1:
      return NormKind::LInf;
    case NormKind::LInf:
      return NormKind::L1;
    case NormKind::L2:
      break;
  }
  return NormKind::L2;
}

std::string_view to_string(NormKind kind) noexcept;
/// Accepts "l1", "l2", "linf" (case-insensitive). Throws invalid_input.
NormKind parse_norm(std::string_view name);

/// Tolerance on sum-to-one and nonnegativity for simplex points.
inline constexpr double kSimplexTol = 1e-9;

/// Throws invalid_input if any coordinate is NaN or infinite.
void require_finite(ConstVecRef v, std::string_view what = "vector");
bool is_finite(ConstVecRef v) noexcept;
bool on_simplex(ConstVecRef p, double tol = kSimplexTol) noexcept;

double dot(ConstVecRef a, ConstVecRef b);
Vec add(ConstVecRef a, ConstVecRef b);
Vec sub(ConstVecRef a, ConstVecRef b);
Vec scaled(ConstVecRef a, double s);
Vec ones(std::size_t d);

double norm(ConstVecRef v, NormKind kind);
/// ||v||_* for the dual of `kind`; equals norm(v, dual(kind)).
double dual_norm(ConstVecRef v, NormKind kind);

/// Euclidean projection onto the probability simplex (sort and threshold).
/// The result is renormalized once to remove rounding drift.
Vec project_simplex(ConstVecRef z);

/// D_f(x, y) = f(x) - f(y) - <grad f(y), x - y>.
double bregman(const ScalarField& f, const VectorField& grad, ConstVecRef x, ConstVecRef y);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t intervals = 0;
};

/// Maximum number of subintervals the adaptive integrator may create.
inline constexpr std::size_t kQuadratureIntervalCap = std::size_t{1} << 16;

/// Globally adaptive Gauss-Kronrod (7/15) integration of a scalar function
/// over [a, b]. Throws numeric_failure if the interval cap is hit before the
/// estimated absolute error drops below `tol`.
QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           double tol);

/// Integral over s in [0, 1] of <grad(q + s r), r>, i.e. the work done by
/// the price field along the straight segment from q to q + r.
double line_integral_price(const VectorField& grad, ConstVecRef q, ConstVecRef r, double tol);

enum class DiffScheme { Central, Forward, Backward };

/// Default finite-difference step: 1e-6 * (1 + ||x||_inf).
double default_fd_step(ConstVecRef x);

/// Finite-difference gradient estimate. h <= 0 selects default_fd_step(x).
/// One-sided schemes are for points sitting on a kink of f.
Vec finite_diff_grad(const ScalarField& f, ConstVecRef x, double h = 0.0,
                     DiffScheme scheme = DiffScheme::Central);

}  // namespace sqpm
