#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "svp/geometry.hpp"

namespace svp {

enum class CoefficientKind { constant, axial_step, oscillation };

std::string to_string(CoefficientKind kind);

/// Scalar coefficient a(x) as a function of the axial distance p_k(x).
struct Coefficient {
  CoefficientKind kind = CoefficientKind::constant;
  double value = 1.0;    // constant kind
  double step_at = 0.0;  // axial_step: nu1 below, nu2 at or above
  double omega = 1.0;    // oscillation frequency

  double operator()(double pk, double nu1, double nu2) const;
};

class StructureOperator {
 public:
  /// Throws std::invalid_argument unless p > 1 and 0 < nu1 <= nu2, and the
  /// constant coefficient lies in [nu1, nu2].
  StructureOperator(double p, double nu1, double nu2, Coefficient coefficient = {});

  static StructureOperator constant(double p, double a = 1.0) {
    return StructureOperator(p, a, a, Coefficient{CoefficientKind::constant, a});
  }

  double p() const { return p_; }
  double nu1() const { return nu1_; }
  double nu2() const { return nu2_; }
  const Coefficient& coefficient() const { return coefficient_; }

  double a(double pk) const { return coefficient_(pk, nu1_, nu2_); }

  /// A(x, xi) = a |xi|^{p-2} xi, with A(x, 0) = 0.
  Vec3 evaluate(double pk, const Vec3& xi) const;
  /// Phi(x, xi) = a |xi|^p / p.
  double potential(double pk, const Vec3& xi) const;

 private:
  double p_;
  double nu1_;
  double nu2_;
  Coefficient coefficient_;
};

struct StructureReport {
  std::size_t samples = 0;
  double worst_lower_ellipticity = 0.0;  // min of <xi,A> / (nu1 |xi|^p) - 1
  double worst_upper_ellipticity = 0.0;  // min of 1 - |A| / (nu2 |xi|^{p-1})
  double worst_homogeneity = 0.0;        // max relative error
  double worst_potential_gradient = 0.0; // max relative finite-difference error
  double worst_monotonicity = 0.0;       // min of <A(xi)-A(eta), xi-eta>
  bool pass = true;
};

StructureReport check_structure(const StructureOperator& op, std::size_t sample_count,
                                std::uint64_t seed, int dim = 3);

}  // namespace svp
