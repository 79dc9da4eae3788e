#pragma once

// Oracles and fixtures shared by the unit tests and the acceptance binary.
// Everything here is computed independently of the library internals.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "svp/field.hpp"
#include "svp/geometry.hpp"

namespace svp::testing {

inline constexpr double kPi = std::numbers::pi;

inline Mesh interval_mesh(double length, std::size_t cells) {
  MeshAxis ax;
  for (std::size_t i = 0; i <= cells; ++i) ax.nodes.push_back(length * static_cast<double>(i) / cells);
  return Mesh({ax});
}

inline Mesh square_mesh(double length, std::size_t cells) {
  MeshAxis ax;
  for (std::size_t i = 0; i <= cells; ++i) ax.nodes.push_back(length * static_cast<double>(i) / cells);
  return Mesh({ax, ax});
}

/// Q1 stiffness and consistent mass of a uniform 1-D grid, assembled by hand.
inline void interval_matrices(double length, std::size_t cells, Eigen::MatrixXd& k, Eigen::MatrixXd& m) {
  const std::size_t n = cells + 1;
  const double h = length / static_cast<double>(cells);
  k = Eigen::MatrixXd::Zero(n, n);
  m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < cells; ++e) {
    k(e, e) += 1.0 / h;
    k(e + 1, e + 1) += 1.0 / h;
    k(e, e + 1) -= 1.0 / h;
    k(e + 1, e) -= 1.0 / h;
    m(e, e) += h / 3.0;
    m(e + 1, e + 1) += h / 3.0;
    m(e, e + 1) += h / 6.0;
    m(e + 1, e) += h / 6.0;
  }
}

/// Eigenvalues of the dense generalized problem restricted to the kept nodes.
inline Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m,
                                         const std::vector<std::size_t>& keep) {
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd kk(n, n), mm(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      kk(i, j) = k(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)]),
                   static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]));
      mm(i, j) = m(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(i)]),
                   static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)]));
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kk, mm);
  return es.eigenvalues();
}

/// Dirichlet, one-end and Neumann eigenvalue of the discrete 1-D Laplacian.
inline double interval_dirichlet(double length, std::size_t cells) {
  Eigen::MatrixXd k, m;
  interval_matrices(length, cells, k, m);
  std::vector<std::size_t> keep;
  for (std::size_t i = 1; i < cells; ++i) keep.push_back(i);
  return dense_eigenvalues(k, m, keep)(0);
}

inline double interval_one_end(double length, std::size_t cells) {
  Eigen::MatrixXd k, m;
  interval_matrices(length, cells, k, m);
  std::vector<std::size_t> keep;
  for (std::size_t i = 1; i <= cells; ++i) keep.push_back(i);
  return dense_eigenvalues(k, m, keep)(0);
}

inline double interval_neumann(double length, std::size_t cells) {
  Eigen::MatrixXd k, m;
  interval_matrices(length, cells, k, m);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i <= cells; ++i) keep.push_back(i);
  return dense_eigenvalues(k, m, keep)(1);  // (0) is the constant mode
}

/// First Dirichlet eigenvalue of -(|u'|^{p-2} u')' on (0, L) by nonlinear
/// inverse iteration. Each step solves the 1-D p-Poisson problem exactly up
/// to quadrature: the flux is c - G(x) with G a primitive of the right side
/// and c fixed by u(L) = 0.
inline double p_laplace_interval_oracle(double p, double length, std::size_t cells, int iterations = 400) {
  const double h = length / static_cast<double>(cells);
  auto psi = [p](double t) { return std::copysign(std::pow(std::abs(t), 1.0 / (p - 1.0)), t); };
  std::vector<double> u(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) u[i] = std::sin(kPi * static_cast<double>(i) / cells);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> g(cells + 1), prim(cells);  // primitive at cell midpoints
    for (std::size_t i = 0; i <= cells; ++i) g[i] = std::copysign(std::pow(std::abs(u[i]), p - 1.0), u[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      prim[i] = acc + 0.25 * h * (g[i] + 0.5 * (g[i] + g[i + 1]));
      acc += 0.5 * h * (g[i] + g[i + 1]);
    }
    auto end_value = [&](double c) {
      double s = 0.0;
      for (std::size_t i = 0; i < cells; ++i) s += h * psi(c - prim[i]);
      return s;
    };
    double lo = -1.0, hi = 1.0;
    while (end_value(lo) > 0.0) lo *= 2.0;
    while (end_value(hi) < 0.0) hi *= 2.0;
    for (int b = 0; b < 200; ++b) {
      const double mid = 0.5 * (lo + hi);
      (end_value(mid) > 0.0 ? hi : lo) = mid;
    }
    const double c = 0.5 * (lo + hi);
    std::vector<double> v(cells + 1, 0.0);
    for (std::size_t i = 0; i < cells; ++i) v[i + 1] = v[i] + h * psi(c - prim[i]);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      num += h * std::pow(std::abs((v[i + 1] - v[i]) / h), p);
      // Simpson on the linear interpolant.
      const double a = std::abs(v[i]), b = std::abs(0.5 * (v[i] + v[i + 1])), d = std::abs(v[i + 1]);
      den += h / 6.0 * (std::pow(a, p) + 4.0 * std::pow(b, p) + std::pow(d, p));
    }
    const double scale = std::pow(den, -1.0 / p);
    for (std::size_t i = 0; i <= cells; ++i) u[i] = v[i] * scale;
    const double next = num / den;
    if (it > 10 && std::abs(next - lambda) <= 1e-14 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

/// (p - 1) (pi_p / L)^p with pi_p = 2 pi / (p sin(pi / p)).
inline double p_laplace_interval_closed_form(double p, double length) {
  const double pi_p = 2.0 * kPi / (p * std::sin(kPi / p));
  return (p - 1.0) * std::pow(pi_p / length, p);
}

/// Strip [0,1] x [-B, B] with a closed-form solution as cap data.
struct StripCase {
  std::shared_ptr<const Mesh> mesh;
  ScalarField field;
  std::function<double(const Vec3&)> exact;
};

inline StripCase solve_strip(double half_length, LateralCondition lateral, double h,
                             std::function<double(const Vec3&)> exact, const StructureOperator& op,
                             const SolverSettings& settings = {}) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(CanonicalDomain::strip(1.0, half_length, lateral), h));
  BoundarySpec bc{exact, exact, "", ""};
  ScalarField f = solve(mesh, op, bc, settings);
  return {mesh, std::move(f), std::move(exact)};
}

/// cos(pi x1) cosh(pi s): harmonic, Neumann on x1 = 0, 1.
inline double cosh_neumann(const Vec3& x) { return std::cos(kPi * x[0]) * std::cosh(kPi * x[1]); }
/// sin(pi x1) cosh(pi s): harmonic, zero on x1 = 0, 1.
inline double cosh_dirichlet(const Vec3& x) { return std::sin(kPi * x[0]) * std::cosh(kPi * x[1]); }

/// Closed-form energy of the cosh modes on [0,1] x [a, b] (p = 2).
inline double cosh_mode_energy(double a, double b) {
  // |grad f|^2 integrated over x1 gives pi^2 / 2 (sinh^2 + cosh^2) = pi^2 / 2 cosh(2 pi s).
  return kPi * kPi / 2.0 * (std::sinh(2.0 * kPi * b) - std::sinh(2.0 * kPi * a)) / (2.0 * kPi);
}

inline double max_nodal_error(const ScalarField& f, const std::function<double(const Vec3&)>& exact) {
  double err = 0.0;
  for (std::size_t i = 0; i < f.mesh().node_count(); ++i)
    err = std::max(err, std::abs(f[i] - exact(f.mesh().node_point(i))));
  return err;
}

}  // namespace svp::testing
