#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "svp/field.hpp"
#include "svp/format.hpp"

namespace svp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 gradient_of(const Mesh& mesh, const std::vector<double>& values, std::size_t e,
                 const QuadraturePoint& qp) {
  const auto nodes = mesh.element_nodes(e);
  Vec3 g{};
  for (int a = 0; a < mesh.nodes_per_element(); ++a) {
    const double v = values[nodes[static_cast<std::size_t>(a)]];
    const auto& dphi = qp.grad[static_cast<std::size_t>(a)];
    g[0] += v * dphi[0];
    g[1] += v * dphi[1];
    g[2] += v * dphi[2];
  }
  return g;
}

class LinearSolver {
 public:
  LinearSolver(std::size_t unknowns, const SolverSettings& settings)
      : direct_(unknowns < settings.direct_limit) {
    if (!direct_) {
      cg_.setTolerance(settings.linear_tol);
      cg_.setMaxIterations(static_cast<Eigen::Index>(std::max<std::size_t>(1000, 20 * unknowns)));
    }
  }

  std::string name() const { return direct_ ? "sparse-ldlt" : "cg-jacobi"; }

  Eigen::VectorXd solve(const SpMat& A, const Eigen::VectorXd& b, const Eigen::VectorXd& guess) {
    if (direct_) {
      if (!analyzed_) {
        ldlt_.analyzePattern(A);
        analyzed_ = true;
      }
      ldlt_.factorize(A);
      if (ldlt_.info() != Eigen::Success) throw std::runtime_error("solve: singular linear system");
      Eigen::VectorXd x = ldlt_.solve(b);
      // One step of iterative refinement.
      x += ldlt_.solve(b - A * x);
      return x;
    }
    cg_.compute(A);
    Eigen::VectorXd x = cg_.solveWithGuess(b, guess);
    if (cg_.info() == Eigen::NumericalIssue) throw std::runtime_error("solve: singular linear system");
    return x;
  }

 private:
  bool direct_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg_;
};

}  // namespace

BoundarySpec BoundarySpec::constant(double low, double high) {
  BoundarySpec bc;
  bc.g_low = [low](const Vec3&) { return low; };
  bc.g_high = [high](const Vec3&) { return high; };
  bc.low_text = format_double(low);
  bc.high_text = format_double(high);
  return bc;
}

void SolverSettings::validate() const {
  if (!(eps_reg_relative >= 0.0) || !(tol_energy > 0.0) || max_outer < 1 || !(linear_tol > 0.0))
    throw std::invalid_argument("solver settings: tolerances must be positive");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("solver settings: theta must be in (0, 1]");
}

ScalarField::ScalarField(std::shared_ptr<const Mesh> mesh, StructureOperator op, std::vector<double> values)
    : mesh_(std::move(mesh)), op_(op), values_(std::move(values)) {
  if (!mesh_) throw std::invalid_argument("field: null mesh");
  if (values_.size() != mesh_->node_count()) throw std::invalid_argument("field: value count mismatch");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("field: non-finite value");
}

ScalarField ScalarField::from_function(std::shared_ptr<const Mesh> mesh, StructureOperator op,
                                       const std::function<double(const Vec3&)>& fn) {
  std::vector<double> v(mesh->node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(mesh->node_point(i));
  return ScalarField(std::move(mesh), op, std::move(v));
}

double axial_value(const Mesh& mesh, const Vec3& x) {
  const double axial = x[static_cast<std::size_t>(mesh.axial_axis())];
  if (!mesh.domain()) return axial;
  const auto& d = *mesh.domain();
  return d.axial_kind == AxialKind::layer ? axial + d.center() : axial;
}

std::vector<char> dirichlet_mask(const Mesh& mesh) {
  std::vector<char> mask(mesh.node_count(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = (is_cap_node(mesh, i) || is_dirichlet_zero_node(mesh, i)) ? 1 : 0;
  return mask;
}

Vec3 field_gradient(const ScalarField& f, std::size_t e, const QuadraturePoint& qp) {
  return gradient_of(f.mesh(), f.values(), e, qp);
}

double field_value(const ScalarField& f, std::size_t e, const QuadraturePoint& qp) {
  const auto nodes = f.mesh().element_nodes(e);
  double v = 0.0;
  for (int a = 0; a < f.mesh().nodes_per_element(); ++a)
    v += qp.shape[static_cast<std::size_t>(a)] * f[nodes[static_cast<std::size_t>(a)]];
  return v;
}

ScalarField solve(std::shared_ptr<const Mesh> mesh_ptr, const StructureOperator& op, const BoundarySpec& bc,
                  const SolverSettings& settings) {
  settings.validate();
  const Mesh& mesh = *mesh_ptr;
  if (!mesh.domain()) throw std::invalid_argument("solve: mesh was not built from a domain");
  if (!bc.g_low || !bc.g_high) throw std::invalid_argument("solve: missing cap data");

  const std::size_t n = mesh.node_count();
  const auto mask = dirichlet_mask(mesh);
  std::vector<double> values(n, 0.0);
  double cap_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_cap_node(mesh, i)) continue;
    const Vec3 x = mesh.node_point(i);
    const bool low = mesh.node_index(i)[static_cast<std::size_t>(mesh.axial_axis())] == 0;
    const double g = low ? bc.g_low(x) : bc.g_high(x);
    if (!std::isfinite(g)) throw std::invalid_argument("solve: cap data not finite");
    values[i] = g;
    cap_scale = std::max(cap_scale, std::abs(g));
  }
  if (cap_scale == 0.0) cap_scale = 1.0;
  const double eps = settings.eps_reg_relative * cap_scale;
  const double p = op.p();

  std::vector<Eigen::Index> free_index(n, -1);
  Eigen::Index n_free = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!mask[i]) free_index[i] = n_free++;

  SolverDiagnostics diag;
  diag.eps_reg = eps;

  auto energy = [&](const std::vector<double>& v) {
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e)
      for (const auto& qp : mesh.quadrature(e)) {
        const Vec3 g = gradient_of(mesh, v, e, qp);
        total += qp.weight * op.a(axial_value(mesh, qp.x)) * std::pow(dot(g, g) + eps * eps, 0.5 * p) / p;
      }
    return total;
  };

  if (n_free == 0) {
    ScalarField field(mesh_ptr, op, std::move(values));
    diag.final_energy = energy(field.values());
    diag.energy_history.push_back(diag.final_energy);
    diag.linear_solver = "none";
    field.diagnostics = diag;
    return field;
  }

  LinearSolver linear(static_cast<std::size_t>(n_free), settings);
  diag.linear_solver = linear.name();

  // Solves the weighted linear problem with coefficient frozen from `lagged`
  // (or a(x) alone when lagged is null).
  auto linear_step = [&](const std::vector<double>* lagged) {
    std::vector<Eigen::Triplet<double>> triplets;
    const int npe = mesh.nodes_per_element();
    triplets.reserve(mesh.element_count() * static_cast<std::size_t>(npe * npe));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
    std::vector<double> local(static_cast<std::size_t>(npe * npe));
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      std::fill(local.begin(), local.end(), 0.0);
      for (const auto& qp : mesh.quadrature(e)) {
        double c = qp.weight * op.a(axial_value(mesh, qp.x));
        if (lagged) {
          const Vec3 g = gradient_of(mesh, *lagged, e, qp);
          c *= std::pow(dot(g, g) + eps * eps, 0.5 * (p - 2.0));
        }
        for (int a = 0; a < npe; ++a)
          for (int b = 0; b < npe; ++b)
            local[static_cast<std::size_t>(a * npe + b)] +=
                c * dot(qp.grad[static_cast<std::size_t>(a)], qp.grad[static_cast<std::size_t>(b)]);
      }
      const auto nodes = mesh.element_nodes(e);
      for (int a = 0; a < npe; ++a) {
        const Eigen::Index ia = free_index[nodes[static_cast<std::size_t>(a)]];
        if (ia < 0) continue;
        for (int b = 0; b < npe; ++b) {
          const std::size_t nb = nodes[static_cast<std::size_t>(b)];
          const double k = local[static_cast<std::size_t>(a * npe + b)];
          if (free_index[nb] >= 0) triplets.emplace_back(ia, free_index[nb], k);
          else rhs[ia] -= k * values[nb];
        }
      }
    }
    SpMat A(n_free, n_free);
    A.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::VectorXd guess(n_free);
    for (std::size_t i = 0; i < n; ++i)
      if (free_index[i] >= 0) guess[free_index[i]] = values[i];
    const Eigen::VectorXd x = linear.solve(A, rhs, guess);
    std::vector<double> out = values;
    for (std::size_t i = 0; i < n; ++i)
      if (free_index[i] >= 0) out[i] = x[free_index[i]];
    return out;
  };

  values = linear_step(nullptr);
  double E = energy(values);
  diag.energy_history.push_back(E);
  diag.outer_iterations = 1;
  diag.converged = true;

  if (p != 2.0) {
    diag.converged = false;
    for (int it = 1; it < settings.max_outer; ++it) {
      const std::vector<double> target = linear_step(&values);
      ++diag.outer_iterations;
      double theta = settings.theta;
      std::vector<double> trial(n);
      double E_trial = E;
      bool accepted = false;
      while (theta >= 1e-8) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = values[i] + theta * (target[i] - values[i]);
        E_trial = energy(trial);
        if (E_trial <= E * (1.0 + 1e-14)) {
          accepted = true;
          break;
        }
        theta *= 0.5;
      }
      if (!accepted) {
        // No damped step lowers the energy: stationary up to rounding.
        diag.converged = true;
        break;
      }
      const double decrease = (E - E_trial) / std::max(std::abs(E_trial), 1e-300);
      values.swap(trial);
      E = E_trial;
      diag.energy_history.push_back(E);
      if (decrease < settings.tol_energy) {
        diag.converged = true;
        break;
      }
    }
  }
  diag.final_energy = E;
  ScalarField field(mesh_ptr, op, std::move(values));
  field.diagnostics = diag;
  return field;
}

WeakResidual weak_residual(const ScalarField& f, double t, double tau) {
  const Mesh& mesh = f.mesh();
  const Slab s = slab(mesh, t, tau);
  const auto mask = dirichlet_mask(mesh);
  const std::size_t ax = static_cast<std::size_t>(mesh.axial_axis());
  std::vector<double> r1(mesh.node_count(), 0.0), r2(mesh.node_count(), 0.0);
  double scale1 = 0.0, scale2 = 0.0;
  std::vector<double> s1(mesh.node_count(), 0.0), s2(mesh.node_count(), 0.0);
  for (std::size_t e : s.elements) {
    const auto nodes = mesh.element_nodes(e);
    for (const auto& qp : mesh.quadrature(e)) {
      const Vec3 g = field_gradient(f, e, qp);
      const double v = field_value(f, e, qp);
      const Vec3 A = f.op().evaluate(axial_value(mesh, qp.x), g);
      const double nA = norm(A);
      for (int a = 0; a < mesh.nodes_per_element(); ++a) {
        const std::size_t node = nodes[static_cast<std::size_t>(a)];
        const std::size_t line = mesh.node_index(node)[ax];
        if (mask[node] || line <= s.first_line || line >= s.last_line) continue;
        const Vec3& dphi = qp.grad[static_cast<std::size_t>(a)];
        const double phi = qp.shape[static_cast<std::size_t>(a)];
        r1[node] += qp.weight * dot(A, dphi);
        s1[node] += qp.weight * nA * norm(dphi);
        const Vec3 dprod{v * dphi[0] + phi * g[0], v * dphi[1] + phi * g[1], v * dphi[2] + phi * g[2]};
        r2[node] += qp.weight * dot(A, dprod);
        s2[node] += qp.weight * nA * (std::abs(v) * norm(dphi) + phi * norm(g));
      }
    }
  }
  WeakResidual res;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    res.definition1 = std::max(res.definition1, std::abs(r1[i]));
    res.definition2 = std::max(res.definition2, std::abs(r2[i]));
    scale1 = std::max(scale1, s1[i]);
    scale2 = std::max(scale2, s2[i]);
  }
  res.definition1 = scale1 > 0.0 ? res.definition1 / scale1 : 0.0;
  res.definition2 = scale2 > 0.0 ? res.definition2 / scale2 : 0.0;
  return res;
}

std::string to_string(Side side) { return side == Side::below ? "below" : "above"; }

FluxResult flux_integral(const ScalarField& f, double tau, FluxWeight weight, double c,
                         std::optional<Side> side) {
  const Mesh& mesh = f.mesh();
  FluxResult out;
  out.line = mesh.aligned_line(tau);
  out.side = side.value_or(out.line == 0 ? Side::above : Side::below);
  if (out.side == Side::below && out.line == 0) throw std::invalid_argument("flux: no layer below");
  if (out.side == Side::above && out.line + 1 == mesh.axial_lines())
    throw std::invalid_argument("flux: no layer above");

  const std::size_t layer = out.side == Side::below ? out.line - 1 : out.line;
  const int section_bit = out.side == Side::below ? 1 : 0;
  const int ax = mesh.axial_axis();
  const std::size_t per_layer = mesh.elements_per_layer();
  double total = 0.0;
  for (std::size_t b = 0; b < per_layer; ++b) {
    const std::size_t e = layer * per_layer + b;
    const auto nodes = mesh.element_nodes(e);
    for (const auto& qp : mesh.quadrature(e)) {
      const Vec3 A = f.op().evaluate(axial_value(mesh, qp.x), field_gradient(f, e, qp));
      Vec3 gpi{};
      for (int a = 0; a < mesh.nodes_per_element(); ++a) {
        if (((a >> ax) & 1) != section_bit) continue;
        const double fv = f[nodes[static_cast<std::size_t>(a)]];
        const double w = weight == FluxWeight::one ? 1.0 : weight == FluxWeight::f ? fv : fv - c;
        const Vec3& dphi = qp.grad[static_cast<std::size_t>(a)];
        gpi[0] += w * dphi[0];
        gpi[1] += w * dphi[1];
        gpi[2] += w * dphi[2];
      }
      total += qp.weight * dot(A, gpi);
    }
  }
  out.value = out.side == Side::below ? total : -total;
  return out;
}

Vec3 SectionPoint::grad_mean() const {
  if (has_below && has_above)
    return {0.5 * (grad_below[0] + grad_above[0]), 0.5 * (grad_below[1] + grad_above[1]),
            0.5 * (grad_below[2] + grad_above[2])};
  return has_below ? grad_below : grad_above;
}

std::vector<SectionPoint> section_points(const ScalarField& f, std::size_t line) {
  static const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  const Mesh& mesh = f.mesh();
  if (line >= mesh.axial_lines()) throw std::out_of_range("section_points: line out of range");
  const int ax = mesh.axial_axis();
  const std::size_t per_layer = mesh.elements_per_layer();
  const bool below = line > 0;
  const bool above = line + 1 < mesh.axial_lines();
  const int nf = 1 << ax;
  std::vector<SectionPoint> pts;
  pts.reserve(per_layer * static_cast<std::size_t>(nf));
  for (std::size_t b = 0; b < per_layer; ++b) {
    const std::size_t e_below = below ? (line - 1) * per_layer + b : 0;
    const std::size_t e_above = above ? line * per_layer + b : 0;
    for (int q = 0; q < nf; ++q) {
      std::array<double, 3> xi{};
      for (int a = 0; a < ax; ++a) xi[static_cast<std::size_t>(a)] = g[(q >> a) & 1];
      SectionPoint sp;
      std::array<double, 3> xi_b = xi, xi_a = xi;
      xi_b[static_cast<std::size_t>(ax)] = 1.0;
      xi_a[static_cast<std::size_t>(ax)] = 0.0;
      const std::size_t e_ref = below ? e_below : e_above;
      const QuadraturePoint ref = mesh.local_point(e_ref, below ? xi_b : xi_a);
      sp.x = ref.x;
      sp.value = field_value(f, e_ref, ref);
      const auto cell = mesh.element_index(e_ref);
      double w = 1.0;
      for (int a = 0; a < ax; ++a)
        w *= 0.5 * mesh.axis(a).cell_width(cell[static_cast<std::size_t>(a)]);
      sp.weight = w * mesh.point_weight(sp.x);
      if (below) {
        sp.has_below = true;
        sp.grad_below = field_gradient(f, e_below, mesh.local_point(e_below, xi_b));
      }
      if (above) {
        sp.has_above = true;
        sp.grad_above = field_gradient(f, e_above, mesh.local_point(e_above, xi_a));
      }
      pts.push_back(sp);
    }
  }
  return pts;
}

std::string field_csv(const ScalarField& f) {
  const Mesh& mesh = f.mesh();
  std::ostringstream os;
  os << "# field snapshot: node coordinates (mesh frame) and nodal value\n";
  for (int a = 0; a < mesh.dim(); ++a) os << 'x' << (a + 1) << ',';
  os << "value\n";
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const Vec3 x = mesh.node_point(i);
    for (int a = 0; a < mesh.dim(); ++a) os << format_double(x[static_cast<std::size_t>(a)]) << ',';
    os << format_double(f[i]) << '\n';
  }
  return os.str();
}

}  // namespace svp
