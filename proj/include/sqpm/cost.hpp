#pragma once

#include <optional>
#include <string_view>

#include "sqpm/convex.hpp"

namespace sqpm {

enum class CostFamily { Softmax, Sparsemax };

std::string_view to_string(CostFamily family) noexcept;
CostFamily parse_cost_family(std::string_view name);

/// A convex, increasing, one-invariant, probability-mapping cost function,
/// built as the Fenchel conjugate of a simplex-restricted regularizer.
///
///   Softmax:   C(q) = (1/L) log sum_i exp(L q_i)      (entropy regularizer)
///   Sparsemax: C(q) = max_{p in simplex} <q,p> - (L/2)||p||^2
struct CostFunctionSpec {
  CostFamily family = CostFamily::Softmax;
  double L = 1.0;
  std::size_t dimension = 0;

  /// Throws invalid_input unless L > 0 and dimension >= 2.
  void validate() const;
};

CostFunctionSpec make_softmax(std::size_t dimension, double L = 1.0);
CostFunctionSpec make_sparsemax(std::size_t dimension, double L = 1.0);

double cost(const CostFunctionSpec& spec, ConstVecRef q);
/// Instantaneous price map; always a simplex point.
Vec grad(const CostFunctionSpec& spec, ConstVecRef q);

/// Registered smoothness constant of C under `kind`, if any.
///   Softmax:   L for l2 and linf.
///   Sparsemax: 1/L for l2.
std::optional<double> registered_smoothness(const CostFunctionSpec& spec, NormKind kind) noexcept;

/// Smoothness constant used for the quadratic fee. Unregistered l1 requests
/// are served with the family's l2 constant only when `allow_experimental`
/// is set; every other unregistered pair throws unsupported_norm.
double smoothness(const CostFunctionSpec& spec, NormKind kind, bool allow_experimental = false);

/// True when smoothness(spec, kind, true) would come from the experimental
/// override instead of the registry.
bool is_experimental(const CostFunctionSpec& spec, NormKind kind) noexcept;

double bregman(const CostFunctionSpec& spec, ConstVecRef x, ConstVecRef y);
double line_integral_price(const CostFunctionSpec& spec, ConstVecRef q, ConstVecRef r,
                           double tol);

enum class RegularizerFamily { NegEntropy, SquaredL2 };

/// The conjugate pair of a cost function:
///   NegEntropy: (1/L) sum p_i log p_i on the relative interior of the simplex
///   SquaredL2:  (L/2) ||p||^2 on the closed simplex
struct RegularizerSpec {
  RegularizerFamily family = RegularizerFamily::NegEntropy;
  double L = 1.0;
};

RegularizerSpec regularizer_of(const CostFunctionSpec& spec) noexcept;

/// Value of the regularizer at p. Throws domain_error if p is off the
/// simplex, or on its boundary for the entropy family.
double conjugate_value(const RegularizerSpec& spec, ConstVecRef p);

/// Maximum of the regularizer over the simplex (attained at vertices).
double regularizer_max(const RegularizerSpec& spec, std::size_t dimension);
/// Minimum of the regularizer over the simplex (attained at the barycenter).
double regularizer_min(const RegularizerSpec& spec, std::size_t dimension);

/// DCFMM worst-case loss bound: regularizer_max - regularizer_min.
double dcfmm_loss_bound(const CostFunctionSpec& spec);

/// A state whose price equals the belief: (1/L) log(mu) for softmax (mu must
/// be interior), L*mu for sparsemax. Any shift along the ones vector is an
/// equally valid choice.
Vec state_for_price(const CostFunctionSpec& spec, ConstVecRef mu);

}  // namespace sqpm
