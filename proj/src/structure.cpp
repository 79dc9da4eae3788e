#include "svp/structure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace svp {

namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void require_finite(const Vec3& xi, double pk) {
  if (!std::isfinite(pk) || !std::isfinite(xi[0]) || !std::isfinite(xi[1]) || !std::isfinite(xi[2]))
    throw std::invalid_argument("structure: non-finite input");
}

}  // namespace

std::string to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::constant: return "constant";
    case CoefficientKind::axial_step: return "axial_step";
    case CoefficientKind::oscillation: return "oscillation";
  }
  return "constant";
}

double Coefficient::operator()(double pk, double nu1, double nu2) const {
  switch (kind) {
    case CoefficientKind::constant: return value;
    case CoefficientKind::axial_step: return pk < step_at ? nu1 : nu2;
    case CoefficientKind::oscillation: return 0.5 * (nu1 + nu2) + 0.5 * (nu2 - nu1) * std::sin(omega * pk);
  }
  return value;
}

StructureOperator::StructureOperator(double p, double nu1, double nu2, Coefficient coefficient)
    : p_(p), nu1_(nu1), nu2_(nu2), coefficient_(coefficient) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("structure: p must exceed 1");
  if (!(nu1 > 0.0 && nu1 <= nu2) || !std::isfinite(nu2))
    throw std::invalid_argument("structure: need 0 < nu1 <= nu2");
  if (coefficient_.kind == CoefficientKind::constant &&
      (coefficient_.value < nu1 || coefficient_.value > nu2))
    throw std::invalid_argument("structure: constant coefficient outside [nu1, nu2]");
}

Vec3 StructureOperator::evaluate(double pk, const Vec3& xi) const {
  require_finite(xi, pk);
  const double r = norm(xi);
  if (r == 0.0) return {0.0, 0.0, 0.0};
  const double s = a(pk) * std::pow(r, p_ - 2.0);
  return {s * xi[0], s * xi[1], s * xi[2]};
}

double StructureOperator::potential(double pk, const Vec3& xi) const {
  require_finite(xi, pk);
  return a(pk) * std::pow(norm(xi), p_) / p_;
}

StructureReport check_structure(const StructureOperator& op, std::size_t sample_count,
                                std::uint64_t seed, int dim) {
  if (sample_count == 0) throw std::invalid_argument("check_structure: need at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> log_mag(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> axial(0.0, 10.0);

  auto random_vector = [&](double magnitude) {
    Vec3 v{};
    do {
      for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] = unit(rng);
    } while (norm(v) < 1e-3);
    const double scale = magnitude / norm(v);
    for (double& c : v) c *= scale;
    return v;
  };

  const double p = op.p();
  const double rel_tol = 1e-12;
  StructureReport rep;
  rep.samples = sample_count;
  rep.worst_lower_ellipticity = INFINITY;
  rep.worst_upper_ellipticity = INFINITY;
  rep.worst_monotonicity = INFINITY;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double pk = axial(rng);
    const Vec3 xi = random_vector(std::exp(log_mag(rng)));
    const Vec3 eta = random_vector(std::exp(log_mag(rng)));
    double lambda = std::exp(log_mag(rng));
    if (unit(rng) < 0.0) lambda = -lambda;

    const Vec3 A = op.evaluate(pk, xi);
    const double r = norm(xi);
    rep.worst_lower_ellipticity =
        std::min(rep.worst_lower_ellipticity, dot(xi, A) / (op.nu1() * std::pow(r, p)) - 1.0);
    rep.worst_upper_ellipticity =
        std::min(rep.worst_upper_ellipticity, 1.0 - norm(A) / (op.nu2() * std::pow(r, p - 1.0)));

    const Vec3 scaled{lambda * xi[0], lambda * xi[1], lambda * xi[2]};
    const Vec3 lhs = op.evaluate(pk, scaled);
    const double factor = lambda * std::pow(std::abs(lambda), p - 2.0);
    const Vec3 rhs{factor * A[0], factor * A[1], factor * A[2]};
    const Vec3 diff{lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]};
    rep.worst_homogeneity = std::max(rep.worst_homogeneity, norm(diff) / norm(rhs));

    const double h = 1e-5;
    const Vec3 e = random_vector(1.0);
    const Vec3 xp{xi[0] + h * e[0], xi[1] + h * e[1], xi[2] + h * e[2]};
    const Vec3 xm{xi[0] - h * e[0], xi[1] - h * e[1], xi[2] - h * e[2]};
    const double fd = (op.potential(pk, xp) - op.potential(pk, xm)) / (2.0 * h);
    const double exact = dot(A, e);
    rep.worst_potential_gradient =
        std::max(rep.worst_potential_gradient, std::abs(fd - exact) / std::max(norm(A), 1e-300));

    const Vec3 B = op.evaluate(pk, eta);
    const Vec3 dA{A[0] - B[0], A[1] - B[1], A[2] - B[2]};
    const Vec3 dx{xi[0] - eta[0], xi[1] - eta[1], xi[2] - eta[2]};
    rep.worst_monotonicity = std::min(rep.worst_monotonicity, dot(dA, dx));
  }
  rep.pass = rep.worst_lower_ellipticity >= -rel_tol && rep.worst_upper_ellipticity >= -rel_tol &&
             rep.worst_homogeneity <= rel_tol && rep.worst_potential_gradient <= 1e-6 &&
             rep.worst_monotonicity >= 0.0;
  return rep;
}

}  // namespace svp
