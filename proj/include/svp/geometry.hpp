#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace svp {

using Vec3 = std::array<double, 3>;

enum class AxialKind { layer, radial };
enum class LateralCondition { neumann, dirichlet_zero };

std::string to_string(AxialKind kind);
std::string to_string(LateralCondition condition);

struct LateralFaces {
  LateralCondition low = LateralCondition::neumann;
  LateralCondition high = LateralCondition::neumann;
};

/// Canonical cylindrical domain D0 x (axial range).
///
/// Layer mode (n - k = 1) uses the centered axial coordinate
/// s = p_k(x) - (alpha + beta) / 2 in (-beta*, beta*). Radial mode (n = 3,
/// k = 1) is the axisymmetric reduction to the (x1, r) half plane with
/// r = p_1(x) in (alpha, beta).
struct CanonicalDomain {
  int n = 2;
  int k = 1;
  std::vector<double> base;  // side lengths of D0, one per base axis
  AxialKind axial_kind = AxialKind::layer;
  double alpha = 1.0;
  double beta = 3.0;
  std::vector<LateralFaces> lateral;  // one entry per base axis

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  double beta_star() const { return 0.5 * (beta - alpha); }
  double center() const { return 0.5 * (alpha + beta); }
  double axial_min() const;
  double axial_max() const;
  double base_measure() const;
  int mesh_dim() const;
  bool has_dirichlet_zero() const;
  bool all_dirichlet_zero() const;

  /// n = 2, k = 1 strip [0, width] x [-half_length, half_length].
  static CanonicalDomain strip(double width, double half_length,
                               LateralCondition lateral = LateralCondition::neumann);
  /// n = 3, k = 2 layer over the rectangle [0, l1] x [0, l2].
  static CanonicalDomain layer3(double l1, double l2, double half_length,
                                LateralCondition lateral = LateralCondition::neumann);
  /// n = 3, k = 1 axisymmetric shell [0, width] x {r_min < r < r_max}.
  static CanonicalDomain radial(double width, double r_min, double r_max,
                                LateralCondition lateral = LateralCondition::neumann);
};

/// p_k(x): Euclidean norm of the trailing n - k coordinates.
double axial_distance(const CanonicalDomain& domain, std::span<const double> x);
/// p*_k(x) = p_k(x) - (alpha + beta) / 2.
double shifted_axial_distance(const CanonicalDomain& domain, std::span<const double> x);

struct MeshAxis {
  std::vector<double> nodes;  // periodic axes store one node per cell
  bool periodic = false;
  double period = 0.0;

  std::size_t cells() const { return periodic ? nodes.size() : nodes.size() - 1; }
  double cell_lo(std::size_t i) const { return nodes[i]; }
  double cell_width(std::size_t i) const;
};

struct QuadraturePoint {
  Vec3 x{};
  double weight = 0.0;
  std::array<double, 8> shape{};
  std::array<Vec3, 8> grad{};
};

/// Tensor-product mesh of Q1 elements in one to three dimensions. Axis 0
/// varies fastest, so the elements of one axial layer (last axis) are
/// contiguous. Quadrature is the tensor two-point Gauss rule; an optional
/// radial axis multiplies every weight by 2*pi*r.
class Mesh {
 public:
  Mesh(std::vector<MeshAxis> axes, std::optional<int> radial_axis = std::nullopt);

  int dim() const { return static_cast<int>(axes_.size()); }
  const MeshAxis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  std::optional<int> radial_axis() const { return radial_axis_; }

  std::size_t node_count() const { return node_count_; }
  std::size_t element_count() const { return element_count_; }
  std::size_t nodes_along(int a) const { return axis(a).nodes.size(); }
  std::size_t cells_along(int a) const { return axis(a).cells(); }
  int nodes_per_element() const { return 1 << dim(); }

  std::size_t node_id(const std::array<std::size_t, 3>& index) const;
  std::array<std::size_t, 3> node_index(std::size_t id) const;
  Vec3 node_point(std::size_t id) const;
  std::array<std::size_t, 3> element_index(std::size_t e) const;
  std::array<std::size_t, 8> element_nodes(std::size_t e) const;

  double point_weight(const Vec3& x) const;
  std::vector<QuadraturePoint> quadrature(std::size_t e) const;
  /// Shape data at local coordinates xi in [0,1]^dim; weight is the element
  /// volume times the radial factor.
  QuadraturePoint local_point(std::size_t e, const std::array<double, 3>& xi) const;

  // Axial structure: the last axis.
  int axial_axis() const { return dim() - 1; }
  std::size_t axial_lines() const { return nodes_along(axial_axis()); }
  double axial_coordinate(std::size_t line) const { return axis(axial_axis()).nodes[line]; }
  std::size_t elements_per_layer() const;
  std::span<const std::size_t> slice(std::size_t line) const;
  /// Nearest axial grid line; throws std::out_of_range outside the axial range.
  std::size_t nearest_line(double tau) const;
  /// Grid line at tau within tol * spacing; throws otherwise.
  std::size_t aligned_line(double tau, double tol = 1e-6) const;
  double axial_spacing() const;

  /// Domain the mesh was built from (volume meshes only).
  const std::optional<CanonicalDomain>& domain() const { return domain_; }
  double requested_spacing() const { return requested_h_; }
  std::vector<double> actual_spacing() const;

 private:
  friend Mesh build_mesh(const CanonicalDomain& domain, double h);

  std::vector<MeshAxis> axes_;
  std::optional<int> radial_axis_;
  std::size_t node_count_ = 0;
  std::size_t element_count_ = 0;
  std::array<std::size_t, 3> node_stride_{};
  std::vector<std::vector<std::size_t>> slices_;
  std::optional<CanonicalDomain> domain_;
  double requested_h_ = 0.0;
};

/// Structured mesh over D0 x axial range with spacing h (counts rounded up
/// when h does not divide a length).
Mesh build_mesh(const CanonicalDomain& domain, double h);

/// Node classification on a volume mesh.
bool is_cap_node(const Mesh& mesh, std::size_t node);
bool is_dirichlet_zero_node(const Mesh& mesh, std::size_t node);

struct SectionDescriptor {
  double requested = 0.0;
  double tau = 0.0;
  double snap_distance = 0.0;
  std::size_t line = 0;
  std::vector<std::size_t> volume_nodes;  // nodes of sigma(tau) in the volume mesh
  Mesh section_mesh;                      // base mesh (layer) or base x circle (radial)
  std::vector<std::size_t> dirichlet_trace;  // section nodes in Z (the set P)
  std::vector<std::size_t> boundary;         // section nodes on the boundary of O
};

/// Section sigma*(tau) at the nearest axial grid line.
SectionDescriptor cross_section(const Mesh& mesh, double tau);

struct Slab {
  std::size_t first_line = 0;  // snapped t
  std::size_t last_line = 0;   // snapped tau
  std::vector<std::size_t> elements;
};

/// Elements of Delta*(t, tau) after snapping both ends to grid lines.
Slab slab(const Mesh& mesh, double t, double tau);

}  // namespace svp
