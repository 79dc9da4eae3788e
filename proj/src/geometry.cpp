#include "svp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace svp {

std::string to_string(AxialKind kind) { return kind == AxialKind::layer ? "layer" : "radial"; }

std::string to_string(LateralCondition condition) {
  return condition == LateralCondition::neumann ? "neumann" : "dirichlet_zero";
}

void CanonicalDomain::validate() const {
  if (!(0 < k && k < n)) throw std::invalid_argument("domain: need 0 < k < n");
  if (n != 2 && n != 3) throw std::invalid_argument("domain: n must be 2 or 3");
  if (!(alpha > 0.0 && alpha < beta)) throw std::invalid_argument("domain: need 0 < alpha < beta");
  if (axial_kind == AxialKind::layer && n - k != 1)
    throw std::invalid_argument("domain: layer mode needs n - k = 1");
  if (axial_kind == AxialKind::radial && !(n == 3 && k == 1))
    throw std::invalid_argument("domain: radial mode needs n = 3, k = 1");
  const std::size_t base_axes = static_cast<std::size_t>(k);
  if (base.size() != base_axes) throw std::invalid_argument("domain: base needs one length per base axis");
  for (double l : base)
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("domain: base lengths must be positive");
  if (lateral.size() != base_axes)
    throw std::invalid_argument("domain: lateral partition needs one entry per base axis");
}

double CanonicalDomain::axial_min() const {
  return axial_kind == AxialKind::layer ? -beta_star() : alpha;
}

double CanonicalDomain::axial_max() const {
  return axial_kind == AxialKind::layer ? beta_star() : beta;
}

double CanonicalDomain::base_measure() const {
  double m = 1.0;
  for (double l : base) m *= l;
  return m;
}

int CanonicalDomain::mesh_dim() const { return axial_kind == AxialKind::layer ? n : 2; }

bool CanonicalDomain::has_dirichlet_zero() const {
  return std::any_of(lateral.begin(), lateral.end(), [](const LateralFaces& f) {
    return f.low == LateralCondition::dirichlet_zero || f.high == LateralCondition::dirichlet_zero;
  });
}

bool CanonicalDomain::all_dirichlet_zero() const {
  return std::all_of(lateral.begin(), lateral.end(), [](const LateralFaces& f) {
    return f.low == LateralCondition::dirichlet_zero && f.high == LateralCondition::dirichlet_zero;
  });
}

CanonicalDomain CanonicalDomain::strip(double width, double half_length, LateralCondition lateral) {
  CanonicalDomain d;
  d.n = 2;
  d.k = 1;
  d.base = {width};
  d.axial_kind = AxialKind::layer;
  d.alpha = 1.0;
  d.beta = 1.0 + 2.0 * half_length;
  d.lateral = {LateralFaces{lateral, lateral}};
  d.validate();
  return d;
}

CanonicalDomain CanonicalDomain::layer3(double l1, double l2, double half_length,
                                        LateralCondition lateral) {
  CanonicalDomain d;
  d.n = 3;
  d.k = 2;
  d.base = {l1, l2};
  d.axial_kind = AxialKind::layer;
  d.alpha = 1.0;
  d.beta = 1.0 + 2.0 * half_length;
  d.lateral = {LateralFaces{lateral, lateral}, LateralFaces{lateral, lateral}};
  d.validate();
  return d;
}

CanonicalDomain CanonicalDomain::radial(double width, double r_min, double r_max,
                                        LateralCondition lateral) {
  CanonicalDomain d;
  d.n = 3;
  d.k = 1;
  d.base = {width};
  d.axial_kind = AxialKind::radial;
  d.alpha = r_min;
  d.beta = r_max;
  d.lateral = {LateralFaces{lateral, lateral}};
  d.validate();
  return d;
}

double axial_distance(const CanonicalDomain& domain, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(domain.n))
    throw std::invalid_argument("axial_distance: point has wrong dimension");
  double s = 0.0;
  for (std::size_t j = static_cast<std::size_t>(domain.k); j < x.size(); ++j) s += x[j] * x[j];
  return std::sqrt(s);
}

double shifted_axial_distance(const CanonicalDomain& domain, std::span<const double> x) {
  return axial_distance(domain, x) - domain.center();
}

double MeshAxis::cell_width(std::size_t i) const {
  if (periodic && i + 1 == nodes.size()) return period - nodes[i] + nodes[0];
  return nodes[i + 1] - nodes[i];
}

Mesh::Mesh(std::vector<MeshAxis> axes, std::optional<int> radial_axis)
    : axes_(std::move(axes)), radial_axis_(radial_axis) {
  if (axes_.empty() || axes_.size() > 3) throw std::invalid_argument("mesh: dimension must be 1..3");
  node_count_ = 1;
  element_count_ = 1;
  std::size_t stride = 1;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const auto& ax = axes_[a];
    if (ax.periodic ? ax.nodes.size() < 3 : ax.nodes.size() < 2)
      throw std::invalid_argument("mesh: axis has too few nodes");
    node_stride_[a] = stride;
    stride *= ax.nodes.size();
    node_count_ *= ax.nodes.size();
    element_count_ *= ax.cells();
  }
  if (radial_axis_ && (*radial_axis_ < 0 || *radial_axis_ >= dim()))
    throw std::invalid_argument("mesh: radial axis out of range");

  const int ax = axial_axis();
  slices_.assign(nodes_along(ax), {});
  for (std::size_t id = 0; id < node_count_; ++id) {
    slices_[node_index(id)[static_cast<std::size_t>(ax)]].push_back(id);
  }
}

std::size_t Mesh::node_id(const std::array<std::size_t, 3>& index) const {
  std::size_t id = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) id += index[a] * node_stride_[a];
  return id;
}

std::array<std::size_t, 3> Mesh::node_index(std::size_t id) const {
  std::array<std::size_t, 3> idx{};
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = id % axes_[a].nodes.size();
    id /= axes_[a].nodes.size();
  }
  return idx;
}

Vec3 Mesh::node_point(std::size_t id) const {
  const auto idx = node_index(id);
  Vec3 x{};
  for (std::size_t a = 0; a < axes_.size(); ++a) x[a] = axes_[a].nodes[idx[a]];
  return x;
}

std::array<std::size_t, 3> Mesh::element_index(std::size_t e) const {
  std::array<std::size_t, 3> idx{};
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const std::size_t c = axes_[a].cells();
    idx[a] = e % c;
    e /= c;
  }
  return idx;
}

std::array<std::size_t, 8> Mesh::element_nodes(std::size_t e) const {
  const auto cell = element_index(e);
  std::array<std::size_t, 8> nodes{};
  for (int local = 0; local < nodes_per_element(); ++local) {
    std::array<std::size_t, 3> idx{};
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      std::size_t i = cell[a] + ((local >> a) & 1);
      if (axes_[a].periodic) i %= axes_[a].nodes.size();
      idx[a] = i;
    }
    nodes[static_cast<std::size_t>(local)] = node_id(idx);
  }
  return nodes;
}

double Mesh::point_weight(const Vec3& x) const {
  if (!radial_axis_) return 1.0;
  return 2.0 * std::numbers::pi * x[static_cast<std::size_t>(*radial_axis_)];
}

QuadraturePoint Mesh::local_point(std::size_t e, const std::array<double, 3>& xi) const {
  const auto cell = element_index(e);
  const int d = dim();
  QuadraturePoint qp;
  Vec3 width{};
  double volume = 1.0;
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const auto& ax = axes_[ua];
    width[ua] = ax.cell_width(cell[ua]);
    qp.x[ua] = ax.cell_lo(cell[ua]) + xi[ua] * width[ua];
    volume *= width[ua];
  }
  qp.weight = volume * point_weight(qp.x);
  for (int local = 0; local < nodes_per_element(); ++local) {
    double value = 1.0;
    Vec3 grad{};
    for (int b = 0; b < d; ++b) grad[static_cast<std::size_t>(b)] = 1.0;
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const bool upper = (local >> a) & 1;
      const double phi = upper ? xi[ua] : 1.0 - xi[ua];
      const double dphi = (upper ? 1.0 : -1.0) / width[ua];
      value *= phi;
      for (int b = 0; b < d; ++b) grad[static_cast<std::size_t>(b)] *= (b == a) ? dphi : phi;
    }
    qp.shape[static_cast<std::size_t>(local)] = value;
    qp.grad[static_cast<std::size_t>(local)] = grad;
  }
  return qp;
}

std::vector<QuadraturePoint> Mesh::quadrature(std::size_t e) const {
  static const double g[2] = {0.5 - 0.5 / std::numbers::sqrt3, 0.5 + 0.5 / std::numbers::sqrt3};
  const int d = dim();
  const int nq = 1 << d;
  const double scale = std::ldexp(1.0, -d);
  std::vector<QuadraturePoint> qps;
  qps.reserve(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) {
    std::array<double, 3> xi{};
    for (int a = 0; a < d; ++a) xi[static_cast<std::size_t>(a)] = g[(q >> a) & 1];
    qps.push_back(local_point(e, xi));
    qps.back().weight *= scale;
  }
  return qps;
}

std::size_t Mesh::elements_per_layer() const {
  return element_count_ / cells_along(axial_axis());
}

std::span<const std::size_t> Mesh::slice(std::size_t line) const {
  return slices_.at(line);
}

std::size_t Mesh::nearest_line(double tau) const {
  const auto& nodes = axis(axial_axis()).nodes;
  const double h = axial_spacing();
  if (!std::isfinite(tau) || tau < nodes.front() - 1e-9 * h || tau > nodes.back() + 1e-9 * h)
    throw std::out_of_range("axial value outside the meshed range");
  auto it = std::lower_bound(nodes.begin(), nodes.end(), tau);
  if (it == nodes.end()) return nodes.size() - 1;
  std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (j > 0 && std::abs(nodes[j - 1] - tau) <= std::abs(nodes[j] - tau)) --j;
  return j;
}

std::size_t Mesh::aligned_line(double tau, double tol) const {
  const std::size_t j = nearest_line(tau);
  if (std::abs(axial_coordinate(j) - tau) > tol * axial_spacing())
    throw std::invalid_argument("axial value is not on a grid line");
  return j;
}

double Mesh::axial_spacing() const {
  const auto& ax = axis(axial_axis());
  return (ax.nodes.back() - ax.nodes.front()) / static_cast<double>(ax.cells());
}

std::vector<double> Mesh::actual_spacing() const {
  std::vector<double> h;
  for (const auto& ax : axes_) {
    const double length = ax.periodic ? ax.period : ax.nodes.back() - ax.nodes.front();
    h.push_back(length / static_cast<double>(ax.cells()));
  }
  return h;
}

namespace {

std::size_t cell_count(double length, double h) {
  const double ratio = length / h;
  const double rounded = std::round(ratio);
  if (rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-12 * ratio) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(ratio));
}

MeshAxis uniform_axis(double lo, double hi, std::size_t cells) {
  MeshAxis ax;
  ax.nodes.resize(cells + 1);
  const double step = (hi - lo) / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i) ax.nodes[i] = lo + static_cast<double>(i) * step;
  ax.nodes.back() = hi;
  return ax;
}

}  // namespace

Mesh build_mesh(const CanonicalDomain& domain, double h) {
  domain.validate();
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("build_mesh: spacing must be positive");
  std::vector<MeshAxis> axes;
  for (double l : domain.base) axes.push_back(uniform_axis(0.0, l, cell_count(l, h)));
  const double lo = domain.axial_min();
  const double hi = domain.axial_max();
  axes.push_back(uniform_axis(lo, hi, cell_count(hi - lo, h)));
  // Exact zero on the midline when it is a grid line.
  auto& axial = axes.back().nodes;
  if (domain.axial_kind == AxialKind::layer && axial.size() % 2 == 1) axial[axial.size() / 2] = 0.0;

  std::optional<int> radial;
  if (domain.axial_kind == AxialKind::radial) radial = 1;
  Mesh mesh(std::move(axes), radial);
  mesh.domain_ = domain;
  mesh.requested_h_ = h;
  return mesh;
}

bool is_cap_node(const Mesh& mesh, std::size_t node) {
  const auto idx = mesh.node_index(node);
  const std::size_t j = idx[static_cast<std::size_t>(mesh.axial_axis())];
  return j == 0 || j + 1 == mesh.axial_lines();
}

bool is_dirichlet_zero_node(const Mesh& mesh, std::size_t node) {
  if (!mesh.domain()) return false;
  const auto& domain = *mesh.domain();
  const auto idx = mesh.node_index(node);
  for (std::size_t b = 0; b < domain.lateral.size(); ++b) {
    const std::size_t last = mesh.nodes_along(static_cast<int>(b)) - 1;
    if (idx[b] == 0 && domain.lateral[b].low == LateralCondition::dirichlet_zero) return true;
    if (idx[b] == last && domain.lateral[b].high == LateralCondition::dirichlet_zero) return true;
  }
  return false;
}

SectionDescriptor cross_section(const Mesh& mesh, double tau) {
  if (!mesh.domain()) throw std::invalid_argument("cross_section: mesh has no domain");
  const auto& domain = *mesh.domain();
  const std::size_t line = mesh.nearest_line(tau);
  const double snapped = mesh.axial_coordinate(line);

  std::vector<MeshAxis> axes;
  for (int b = 0; b < domain.k; ++b) axes.push_back(mesh.axis(b));
  if (domain.axial_kind == AxialKind::radial) {
    const double circumference = 2.0 * std::numbers::pi * snapped;
    const double h = mesh.actual_spacing().front();
    const auto cells = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(circumference / h - 1e-9)));
    MeshAxis circle;
    circle.periodic = true;
    circle.period = circumference;
    circle.nodes.resize(cells);
    for (std::size_t i = 0; i < cells; ++i)
      circle.nodes[i] = circumference * static_cast<double>(i) / static_cast<double>(cells);
    axes.push_back(std::move(circle));
  }

  SectionDescriptor s{tau, snapped, std::abs(snapped - tau), line,
                      std::vector<std::size_t>(mesh.slice(line).begin(), mesh.slice(line).end()),
                      Mesh(std::move(axes)), {}, {}};
  const Mesh& sm = s.section_mesh;
  for (std::size_t id = 0; id < sm.node_count(); ++id) {
    const auto idx = sm.node_index(id);
    bool on_boundary = false;
    bool pinned = false;
    for (std::size_t b = 0; b < domain.lateral.size(); ++b) {
      const std::size_t last = sm.nodes_along(static_cast<int>(b)) - 1;
      if (idx[b] == 0) {
        on_boundary = true;
        pinned |= domain.lateral[b].low == LateralCondition::dirichlet_zero;
      }
      if (idx[b] == last) {
        on_boundary = true;
        pinned |= domain.lateral[b].high == LateralCondition::dirichlet_zero;
      }
    }
    if (on_boundary) s.boundary.push_back(id);
    if (pinned) s.dirichlet_trace.push_back(id);
  }
  return s;
}

Slab slab(const Mesh& mesh, double t, double tau) {
  if (!(t < tau)) throw std::invalid_argument("slab: need t < tau");
  Slab result;
  result.first_line = mesh.nearest_line(t);
  result.last_line = mesh.nearest_line(tau);
  const std::size_t per_layer = mesh.elements_per_layer();
  for (std::size_t layer = result.first_line; layer < result.last_line; ++layer)
    for (std::size_t e = 0; e < per_layer; ++e) result.elements.push_back(layer * per_layer + e);
  return result;
}

}  // namespace svp
