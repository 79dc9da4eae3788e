#include "svp/frequency.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace svp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Sparse maps from nodal values to values and gradient components at every
/// quadrature point of a mesh.
struct QuadratureOps {
  int dim = 0;
  SpMat B;
  std::vector<SpMat> G;
  Vec w;

  explicit QuadratureOps(const Mesh& mesh) : dim(mesh.dim()) {
    const int npe = mesh.nodes_per_element();
    const std::size_t nq = mesh.element_count() * static_cast<std::size_t>(npe);
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    std::vector<Eigen::Triplet<double>> tb;
    std::vector<std::vector<Eigen::Triplet<double>>> tg(static_cast<std::size_t>(dim));
    tb.reserve(nq * static_cast<std::size_t>(npe));
    for (auto& t : tg) t.reserve(nq * static_cast<std::size_t>(npe));
    w.resize(static_cast<Eigen::Index>(nq));
    Eigen::Index row = 0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const auto nodes = mesh.element_nodes(e);
      for (const auto& qp : mesh.quadrature(e)) {
        w[row] = qp.weight;
        for (int a = 0; a < npe; ++a) {
          const auto col = static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]);
          tb.emplace_back(row, col, qp.shape[static_cast<std::size_t>(a)]);
          for (int d = 0; d < dim; ++d)
            tg[static_cast<std::size_t>(d)].emplace_back(
                row, col, qp.grad[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)]);
        }
        ++row;
      }
    }
    B.resize(row, n);
    B.setFromTriplets(tb.begin(), tb.end());
    G.resize(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
      G[static_cast<std::size_t>(d)].resize(row, n);
      G[static_cast<std::size_t>(d)].setFromTriplets(tg[static_cast<std::size_t>(d)].begin(),
                                                     tg[static_cast<std::size_t>(d)].end());
    }
  }

  Vec grad_norm2(const Vec& u) const {
    Vec s = Vec::Zero(B.rows());
    for (const auto& g : G) s += (g * u).cwiseAbs2();
    return s;
  }

  double numerator(const Vec& u) const {
    const Vec s = grad_norm2(u);
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) total += w[i] * std::pow(s[i], 0.5 * p_cache);
    return total;
  }

  double p_cache = 2.0;
};

double power_sum(const Vec& v, const Vec& w, double p, double c) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) total += w[i] * std::pow(std::abs(v[i] - c), p);
  return total;
}

/// Quotient evaluation and gradients for one problem.
class Quotient {
 public:
  Quotient(const Mesh& mesh, double p, FrequencyKind kind) : ops_(mesh), p_(p), kind_(kind) {
    ops_.p_cache = p;
  }

  const QuadratureOps& ops() const { return ops_; }

  double constant(const Vec& u) const {
    if (kind_ != FrequencyKind::second) return 0.0;
    const Vec v = ops_.B * u;
    return optimal_constant(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
                            std::span<const double>(ops_.w.data(), static_cast<std::size_t>(ops_.w.size())), p_);
  }

  double numerator(const Vec& u) const { return ops_.numerator(u); }

  double denominator(const Vec& u, double c) const { return power_sum(ops_.B * u, ops_.w, p_, c); }

  Vec numerator_gradient(const Vec& u) const {
    const Vec s = ops_.grad_norm2(u);
    Vec coef(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      coef[i] = s[i] > 0.0 ? p_ * ops_.w[i] * std::pow(s[i], 0.5 * (p_ - 2.0)) : 0.0;
    Vec out = Vec::Zero(u.size());
    for (const auto& g : ops_.G) out += g.transpose() * coef.cwiseProduct(g * u);
    return out;
  }

  Vec denominator_gradient(const Vec& u, double c) const {
    const Vec v = ops_.B * u;
    Vec coef(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double d = v[i] - c;
      coef[i] = d == 0.0 ? 0.0 : p_ * ops_.w[i] * std::pow(std::abs(d), p_ - 1.0) * (d > 0 ? 1.0 : -1.0);
    }
    return ops_.B.transpose() * coef;
  }

  double value(const Vec& u, double* c_out = nullptr) const {
    const double c = constant(u);
    if (c_out) *c_out = c;
    const double den = denominator(u, c);
    return den > 0.0 ? numerator(u) / den : INFINITY;
  }

  /// Shift (second kind) and scale to unit denominator.
  void normalize(Vec& u) const {
    if (kind_ == FrequencyKind::second) u.array() -= constant(u);
    const double den = denominator(u, 0.0);
    if (den > 0.0) u /= std::pow(den, 1.0 / p_);
  }

 private:
  QuadratureOps ops_;
  double p_;
  FrequencyKind kind_;
};

/// Lowest eigenpair of K x = lambda M x on free nodes by block shift-invert
/// subspace iteration with Rayleigh-Ritz. Constants are deflated when
/// `neumann` is set.
Vec lowest_eigenvector(const SpMat& K, const SpMat& M, bool neumann, std::uint64_t seed, double* value) {
  const Eigen::Index n = K.rows();
  const Eigen::Index block = std::min<Eigen::Index>(n - (neumann ? 1 : 0), 6);
  if (block < 1) throw std::invalid_argument("frequency: too few free nodes");
  double shift = 0.0;
  if (neumann) shift = 1e-6 * (K.diagonal().sum() / M.diagonal().sum());
  SpMat S = K + shift * M;
  Eigen::SimplicialLDLT<SpMat> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("frequency: factorization failed");

  const Vec ones = Vec::Ones(n);
  const Vec M1 = M * ones;
  const double one_norm = ones.dot(M1);
  auto deflate = [&](Eigen::MatrixXd& X) {
    if (!neumann) return;
    for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j) -= (X.col(j).dot(M1) / one_norm) * ones;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = dist(rng);
  deflate(X);

  Eigen::VectorXd ritz_old = Eigen::VectorXd::Constant(block, INFINITY);
  Eigen::VectorXd ritz = ritz_old;
  for (int it = 0; it < 2000; ++it) {
    Eigen::MatrixXd Y = ldlt.solve(M * X);
    deflate(Y);
    const Eigen::MatrixXd Kr = Y.transpose() * (K * Y);
    Eigen::MatrixXd Mr = Y.transpose() * (M * Y);
    Mr = 0.5 * (Mr + Mr.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Kr + Kr.transpose()), Mr);
    X = Y * es.eigenvectors();
    ritz = es.eigenvalues();
    const Eigen::Index watch = std::min<Eigen::Index>(block, 2);
    double change = 0.0;
    for (Eigen::Index j = 0; j < watch; ++j)
      change = std::max(change, std::abs(ritz[j] - ritz_old[j]) / std::max(std::abs(ritz[j]), 1e-300));
    ritz_old = ritz;
    if (it >= 3 && change < 1e-14) break;
  }
  if (value) *value = ritz[0];
  Vec x = X.col(0);
  if (x.sum() < 0.0) x = -x;
  return x;
}

}  // namespace

std::string to_string(FrequencyKind kind) {
  switch (kind) {
    case FrequencyKind::first: return "first";
    case FrequencyKind::second: return "second";
    case FrequencyKind::third: return "third";
  }
  return "first";
}

double optimal_constant(std::span<const double> u, std::span<const double> w, double p) {
  if (u.size() != w.size()) throw std::invalid_argument("optimal_constant: size mismatch");
  if (u.empty()) return 0.0;
  const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) return lo;
  auto objective = [&](double c) {
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) total += w[i] * std::pow(std::abs(u[i] - c), p);
    return total;
  };
  const double tol = std::max(1e-12 * (hi - lo),
                              4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)));
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - r * (hi - lo);
  double b = lo + r * (hi - lo);
  double fa = objective(a), fb = objective(b);
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - r * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + r * (hi - lo);
      fb = objective(b);
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::size_t> boundary_nodes(const Mesh& mesh) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const auto idx = mesh.node_index(i);
    for (int a = 0; a < mesh.dim(); ++a) {
      const auto& ax = mesh.axis(a);
      if (ax.periodic) continue;
      if (idx[static_cast<std::size_t>(a)] == 0 || idx[static_cast<std::size_t>(a)] + 1 == ax.nodes.size()) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

double rayleigh_quotient(const Mesh& mesh, double p, FrequencyKind kind, std::span<const double> u,
                         double* c_out) {
  if (u.size() != mesh.node_count()) throw std::invalid_argument("rayleigh_quotient: size mismatch");
  Quotient q(mesh, p, kind);
  const Vec v = Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(u.size()));
  return q.value(v, c_out);
}

FrequencyResult minimize_quotient(const Mesh& mesh, double p, FrequencyKind kind, std::vector<std::size_t> pinned,
                                  const FrequencySettings& settings) {
  if (!(p > 1.0)) throw std::invalid_argument("frequency: p must exceed 1");
  FrequencyResult result;
  result.kind = kind;
  if (kind == FrequencyKind::second) pinned.clear();
  std::sort(pinned.begin(), pinned.end());
  pinned.erase(std::unique(pinned.begin(), pinned.end()), pinned.end());
  result.pinned = pinned;

  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  if (kind != FrequencyKind::second && pinned.empty()) {
    result.degenerate = true;
    result.flag = "degenerate: empty Dirichlet set, constants are admissible";
    result.u.assign(mesh.node_count(), 0.0);
    result.value = 0.0;
    return result;
  }
  std::vector<char> is_pinned(mesh.node_count(), 0);
  for (std::size_t i : pinned) is_pinned.at(i) = 1;
  std::vector<Eigen::Index> free_nodes;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!is_pinned[static_cast<std::size_t>(i)]) free_nodes.push_back(i);
  if (free_nodes.empty()) throw std::invalid_argument("frequency: empty interior");
  const auto nf = static_cast<Eigen::Index>(free_nodes.size());

  Quotient quotient(mesh, p, kind);
  const auto& ops = quotient.ops();

  // Restriction to free nodes.
  SpMat R(nf, n);
  {
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index j = 0; j < nf; ++j) t.emplace_back(j, free_nodes[static_cast<std::size_t>(j)], 1.0);
    R.setFromTriplets(t.begin(), t.end());
  }
  SpMat K(n, n);
  for (const auto& g : ops.G) K += SpMat(g.transpose() * ops.w.asDiagonal() * g);
  const SpMat M = ops.B.transpose() * ops.w.asDiagonal() * ops.B;
  const SpMat Kf = R * K * R.transpose();
  const SpMat Mf = R * M * R.transpose();

  double lambda2 = 0.0;
  const Vec x0 = lowest_eigenvector(Kf, Mf, kind == FrequencyKind::second, settings.seed, &lambda2);
  const SpMat P = Kf + std::max(lambda2, 0.0) * Mf;
  Eigen::SimplicialLDLT<SpMat> precond(P);
  if (precond.info() != Eigen::Success) throw std::runtime_error("frequency: preconditioner failed");

  auto descend = [&](Vec u, int& iterations, double& residual) {
    quotient.normalize(u);
    double c = quotient.constant(u);
    double Rq = quotient.value(u);
    double alpha = 1.0;
    iterations = 0;
    for (; iterations < settings.max_iterations; ++iterations) {
      c = quotient.constant(u);
      const Vec gn = R * quotient.numerator_gradient(u);
      const Vec gd = R * quotient.denominator_gradient(u, c);
      const double den = quotient.denominator(u, c);
      const Vec grad = (gn - Rq * gd) / den;
      const Vec dir = -(R.transpose() * Vec(precond.solve(grad)));
      const double slope = (R * dir).dot(grad);
      if (!(slope < 0.0)) break;
      alpha = std::min(1.0, 2.0 * alpha);
      bool accepted = false;
      Vec trial;
      double Rt = Rq;
      while (alpha > 1e-20) {
        trial = u + alpha * dir;
        quotient.normalize(trial);
        Rt = quotient.value(trial);
        if (Rt <= Rq + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      const double decrease = (Rq - Rt) / std::max(std::abs(Rt), 1e-300);
      u = trial;
      Rq = Rt;
      if (decrease < settings.tol) {
        ++iterations;
        break;
      }
    }
    c = quotient.constant(u);
    const Vec gn = R * quotient.numerator_gradient(u);
    const Vec gd = R * quotient.denominator_gradient(u, c);
    const Vec r = gn - Rq * gd;
    const double rr = r.dot(precond.solve(r));
    const double nn = gn.dot(precond.solve(gn));
    residual = nn > 0.0 ? std::sqrt(std::max(rr, 0.0) / nn) : 0.0;
    return std::make_pair(u, Rq);
  };

  Vec start = R.transpose() * x0;
  int iterations = 0;
  double residual = 0.0;
  auto [best_u, best_value] = descend(start, iterations, residual);
  int best_iterations = iterations;
  double best_residual = residual;

  if (p != 2.0) {
    std::mt19937_64 rng(settings.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double amplitude = 0.1 * start.cwiseAbs().maxCoeff();
    for (int k = 0; k < settings.restarts; ++k) {
      Vec perturbed = start;
      for (Eigen::Index i = 0; i < nf; ++i) perturbed[free_nodes[static_cast<std::size_t>(i)]] += amplitude * noise(rng);
      auto [u, value] = descend(perturbed, iterations, residual);
      if (value < best_value) {
        best_u = u;
        best_value = value;
        best_iterations = iterations;
        best_residual = residual;
      }
    }
  }

  double c3 = 0.0;
  result.value = quotient.value(best_u, &c3);
  if (kind == FrequencyKind::second) result.c3 = c3;
  result.u.assign(best_u.data(), best_u.data() + best_u.size());
  result.iterations = best_iterations;
  result.residual = best_residual;
  return result;
}

FrequencyResult first_frequency(const SectionDescriptor& section, double p, const FrequencySettings& settings) {
  return minimize_quotient(section.section_mesh, p, FrequencyKind::first, section.boundary, settings);
}

FrequencyResult second_frequency(const SectionDescriptor& section, double p, const FrequencySettings& settings) {
  return minimize_quotient(section.section_mesh, p, FrequencyKind::second, {}, settings);
}

FrequencyResult third_frequency(const SectionDescriptor& section, double p, std::vector<std::size_t> pinned,
                                const FrequencySettings& settings) {
  return minimize_quotient(section.section_mesh, p, FrequencyKind::third, std::move(pinned), settings);
}

FrequencyResult third_frequency(const SectionDescriptor& section, double p, const FrequencySettings& settings) {
  return third_frequency(section, p, section.dirichlet_trace, settings);
}

std::vector<FrequencyStation> frequency_profile(const Mesh& mesh, double p, FrequencyKind kind,
                                                std::span<const double> stations,
                                                const FrequencySettings& settings) {
  std::vector<FrequencyStation> out;
  for (double tau : stations) {
    mesh.aligned_line(tau);
    const SectionDescriptor s = cross_section(mesh, tau);
    FrequencyStation st;
    st.tau = s.tau;
    switch (kind) {
      case FrequencyKind::first: st.result = first_frequency(s, p, settings); break;
      case FrequencyKind::second: st.result = second_frequency(s, p, settings); break;
      case FrequencyKind::third: st.result = third_frequency(s, p, settings); break;
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace svp
