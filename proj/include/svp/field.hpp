#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "svp/geometry.hpp"
#include "svp/structure.hpp"

namespace svp {

using CapFunction = std::function<double(const Vec3&)>;

/// Cap data on the two axial ends. Lateral conditions come from the domain.
struct BoundarySpec {
  CapFunction g_low;
  CapFunction g_high;
  std::string low_text;
  std::string high_text;

  static BoundarySpec constant(double low, double high);
};

struct SolverSettings {
  double eps_reg_relative = 1e-8;  // times the cap-data scale
  double tol_energy = 1e-10;
  int max_outer = 200;
  double theta = 1.0;
  double linear_tol = 1e-13;
  std::size_t direct_limit = 20000;

  void validate() const;
};

struct SolverDiagnostics {
  int outer_iterations = 0;
  double final_energy = 0.0;
  double eps_reg = 0.0;
  bool converged = true;
  std::string linear_solver;
  std::vector<double> energy_history;  // regularized energy of each accepted iterate
};

/// Nodal values on a mesh plus the data they were computed from.
class ScalarField {
 public:
  ScalarField(std::shared_ptr<const Mesh> mesh, StructureOperator op, std::vector<double> values);

  /// Interpolates fn at the nodes.
  static ScalarField from_function(std::shared_ptr<const Mesh> mesh, StructureOperator op,
                                   const std::function<double(const Vec3&)>& fn);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const StructureOperator& op() const { return op_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }

  SolverDiagnostics diagnostics;

 private:
  std::shared_ptr<const Mesh> mesh_;
  StructureOperator op_;
  std::vector<double> values_;
};

/// p_k at a mesh point (centered axial value plus the midline for layers,
/// the radius for radial meshes).
double axial_value(const Mesh& mesh, const Vec3& x);

/// Nodes carrying Dirichlet data: caps and Dirichlet-zero lateral faces.
std::vector<char> dirichlet_mask(const Mesh& mesh);

/// Minimizes the discrete p-energy by damped Kacanov iteration.
ScalarField solve(std::shared_ptr<const Mesh> mesh, const StructureOperator& op,
                  const BoundarySpec& bc, const SolverSettings& settings = {});

/// Gradient of the field at a quadrature point of element e.
Vec3 field_gradient(const ScalarField& f, std::size_t e, const QuadraturePoint& qp);
double field_value(const ScalarField& f, std::size_t e, const QuadraturePoint& qp);

struct WeakResidual {
  double definition1 = 0.0;  // test functions phi
  double definition2 = 0.0;  // test functions phi * f
};

/// Normalized weak residual over Delta(t, tau) with interior nodal hats.
WeakResidual weak_residual(const ScalarField& f, double t, double tau);

enum class Side { below, above };
std::string to_string(Side side);

enum class FluxWeight { one, f, f_minus_c };

struct FluxResult {
  double value = 0.0;
  Side side = Side::below;
  std::size_t line = 0;
};

/// Integral over sigma(tau) of w <A(x, grad f), grad p_k>, computed from the
/// adjacent element layer on the given side.
FluxResult flux_integral(const ScalarField& f, double tau, FluxWeight weight, double c = 0.0,
                         std::optional<Side> side = std::nullopt);

/// Face quadrature point on an axial grid line.
struct SectionPoint {
  Vec3 x{};
  double weight = 0.0;
  double value = 0.0;
  Vec3 grad_below{};
  Vec3 grad_above{};
  bool has_below = false;
  bool has_above = false;

  Vec3 grad_mean() const;
  const Vec3& grad(Side side) const { return side == Side::below ? grad_below : grad_above; }
};

std::vector<SectionPoint> section_points(const ScalarField& f, std::size_t line);

/// Writes node coordinates and values as CSV.
std::string field_csv(const ScalarField& f);

}  // namespace svp
