#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "svp/geometry.hpp"

using namespace svp;

namespace {

double total_weight(const Mesh& mesh) {
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (const auto& qp : mesh.quadrature(e)) s += qp.weight;
  return s;
}

}  // namespace

TEST(Domain, StripFactory) {
  const auto d = CanonicalDomain::strip(1.0, 3.0);
  EXPECT_EQ(d.n, 2);
  EXPECT_EQ(d.k, 1);
  EXPECT_DOUBLE_EQ(d.beta_star(), 3.0);
  EXPECT_DOUBLE_EQ(d.axial_min(), -3.0);
  EXPECT_DOUBLE_EQ(d.axial_max(), 3.0);
  EXPECT_EQ(d.mesh_dim(), 2);
  EXPECT_FALSE(d.has_dirichlet_zero());
}

TEST(Domain, ValidationRejectsBadData) {
  auto d = CanonicalDomain::strip(1.0, 3.0);
  d.beta = d.alpha;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  auto r = CanonicalDomain::radial(1.0, 1.0, 3.0);
  r.n = 2;
  EXPECT_THROW(r.validate(), std::invalid_argument);
  EXPECT_THROW((void)CanonicalDomain::strip(-1.0, 3.0), std::invalid_argument);
}

TEST(Domain, ShiftedDistance) {
  const auto d = CanonicalDomain::layer3(1.0, 1.0, 2.0);
  const double x[] = {0.2, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(axial_distance(d, x), 4.0);
  EXPECT_DOUBLE_EQ(shifted_axial_distance(d, x), 4.0 - d.center());
  const auto r = CanonicalDomain::radial(1.0, 1.0, 3.0);
  EXPECT_DOUBLE_EQ(axial_distance(r, x), 5.0);
}

TEST(Mesh, CountsAndLayers) {
  const Mesh m = build_mesh(CanonicalDomain::strip(1.0, 3.0), 0.25);
  EXPECT_EQ(m.nodes_along(0), 5u);
  EXPECT_EQ(m.axial_lines(), 25u);
  EXPECT_EQ(m.element_count(), 4u * 24u);
  EXPECT_EQ(m.elements_per_layer(), 4u);
  EXPECT_DOUBLE_EQ(m.axial_coordinate(12), 0.0);
  EXPECT_EQ(m.slice(3).size(), 5u);
  EXPECT_EQ(m.aligned_line(-2.5), 2u);
  EXPECT_THROW((void)m.aligned_line(0.1), std::exception);
  EXPECT_THROW((void)m.nearest_line(9.0), std::out_of_range);
}

TEST(Mesh, NonDividingSpacingRoundsUp) {
  const Mesh m = build_mesh(CanonicalDomain::strip(1.0, 1.0), 0.3);
  EXPECT_EQ(m.cells_along(0), 4u);
  EXPECT_LE(m.actual_spacing()[0], 0.3);
  EXPECT_DOUBLE_EQ(m.requested_spacing(), 0.3);
}

TEST(Mesh, QuadratureIntegratesVolume) {
  EXPECT_NEAR(total_weight(build_mesh(CanonicalDomain::strip(1.0, 3.0), 0.25)), 6.0, 1e-12);
  EXPECT_NEAR(total_weight(build_mesh(CanonicalDomain::layer3(1.0, 0.5, 1.0), 0.25)), 1.0, 1e-12);
  // Shell [0,1] x {1 < r < 3}: volume pi (9 - 1) exactly, since 2 pi r is linear.
  EXPECT_NEAR(total_weight(build_mesh(CanonicalDomain::radial(1.0, 1.0, 3.0), 0.25)), 8.0 * std::numbers::pi,
              1e-12);
}

TEST(Mesh, ShapeFunctionsPartitionUnity) {
  const Mesh m = build_mesh(CanonicalDomain::layer3(1.0, 1.0, 1.0), 0.5);
  for (std::size_t e = 0; e < m.element_count(); ++e)
    for (const auto& qp : m.quadrature(e)) {
      double s = 0.0;
      Vec3 g{};
      for (int a = 0; a < m.nodes_per_element(); ++a) {
        s += qp.shape[static_cast<std::size_t>(a)];
        for (int d = 0; d < 3; ++d) g[static_cast<std::size_t>(d)] += qp.grad[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
      }
      EXPECT_NEAR(s, 1.0, 1e-14);
      for (double v : g) EXPECT_NEAR(v, 0.0, 1e-12);
    }
}

TEST(Mesh, CapAndLateralNodes) {
  const Mesh m = build_mesh(CanonicalDomain::strip(1.0, 1.0, LateralCondition::dirichlet_zero), 0.5);
  std::size_t caps = 0, lateral = 0;
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    caps += is_cap_node(m, i) ? 1 : 0;
    lateral += is_dirichlet_zero_node(m, i) ? 1 : 0;
  }
  EXPECT_EQ(caps, 6u);
  EXPECT_EQ(lateral, 2u * 5u);  // corners count on both
}

TEST(Section, LayerSectionIsTheBase) {
  const Mesh m = build_mesh(CanonicalDomain::layer3(1.0, 2.0, 1.0, LateralCondition::dirichlet_zero), 0.25);
  const auto s = cross_section(m, 0.5);
  EXPECT_DOUBLE_EQ(s.tau, 0.5);
  EXPECT_EQ(s.section_mesh.dim(), 2);
  EXPECT_EQ(s.section_mesh.node_count(), 5u * 9u);
  EXPECT_EQ(s.volume_nodes.size(), s.section_mesh.node_count());
  EXPECT_EQ(s.dirichlet_trace.size(), 2u * 5u + 2u * 9u - 4u);
}

TEST(Section, RadialSectionIsPeriodicCircle) {
  const Mesh m = build_mesh(CanonicalDomain::radial(1.0, 1.0, 3.0), 0.25);
  const auto s = cross_section(m, 2.0);
  ASSERT_EQ(s.section_mesh.dim(), 2);
  EXPECT_TRUE(s.section_mesh.axis(1).periodic);
  EXPECT_GE(s.section_mesh.cells_along(1), static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * 2.0 / 0.25)));
  EXPECT_NEAR(total_weight(s.section_mesh), 2.0 * std::numbers::pi * 2.0, 1e-9);
}

TEST(Slab, ElementsBetweenLines) {
  const Mesh m = build_mesh(CanonicalDomain::strip(1.0, 2.0), 0.5);
  const Slab s = slab(m, -1.0, 0.5);
  EXPECT_EQ(s.first_line, 2u);
  EXPECT_EQ(s.last_line, 5u);
  EXPECT_EQ(s.elements.size(), 3u * m.elements_per_layer());
  EXPECT_THROW((void)slab(m, 0.5, 0.5), std::invalid_argument);
}
