#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "support.hpp"
#include "svp/field.hpp"

using namespace svp;
using namespace svp::testing;

namespace {

double linear(const Vec3& x) { return x[1]; }

}  // namespace

class LinearField : public ::testing::TestWithParam<double> {};

TEST_P(LinearField, NeumannStripReproducesTheAxialCoordinate) {
  const double p = GetParam();
  const auto c = solve_strip(2.0, LateralCondition::neumann, 0.125, linear, StructureOperator::constant(p, 1.0));
  EXPECT_TRUE(c.field.diagnostics.converged);
  EXPECT_LE(max_nodal_error(c.field, c.exact), 1e-12);
  const FluxResult flux = flux_integral(c.field, 0.5, FluxWeight::one);
  EXPECT_NEAR(flux.value, 1.0, 1e-12);  // |D0| = 1, |grad f| = 1
  const WeakResidual r = weak_residual(c.field, -1.0, 1.0);
  EXPECT_LE(r.definition1, 1e-10);
  EXPECT_LE(r.definition2, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Powers, LinearField, ::testing::Values(1.5, 2.0, 3.0, 4.0));

TEST(Solver, ConstantCapsGiveConstantField) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(CanonicalDomain::strip(1.0, 1.0), 0.25));
  const ScalarField f = solve(mesh, StructureOperator::constant(3.0, 1.0), BoundarySpec::constant(2.0, 2.0));
  for (double v : f.values()) EXPECT_NEAR(v, 2.0, 1e-13);
}

TEST(Solver, DirichletLateralIsZero) {
  const auto c = solve_strip(1.0, LateralCondition::dirichlet_zero, 0.125, cosh_dirichlet,
                             StructureOperator::constant(2.0, 1.0));
  const Mesh& m = c.field.mesh();
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    if (is_cap_node(m, i)) {
      EXPECT_NEAR(c.field[i], cosh_dirichlet(m.node_point(i)), 1e-14);
    } else if (is_dirichlet_zero_node(m, i)) {
      EXPECT_EQ(c.field[i], 0.0);
    }
  }
}

TEST(Solver, CoshDirichletConvergesAtSecondOrder) {
  double err[3];
  const double hs[3] = {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0};
  for (int i = 0; i < 3; ++i) {
    const auto c = solve_strip(1.0, LateralCondition::dirichlet_zero, hs[i], cosh_dirichlet,
                               StructureOperator::constant(2.0, 1.0));
    err[i] = max_nodal_error(c.field, c.exact);
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
  EXPECT_GE(std::log2(err[1] / err[2]), 1.9);
}

TEST(Solver, EnergyHistoryIsNonIncreasing) {
  const auto c = solve_strip(1.0, LateralCondition::neumann, 0.125,
                             [](const Vec3& x) { return std::cos(kPi * x[0]) * (1.0 + x[1]); },
                             StructureOperator::constant(3.0, 1.0));
  const auto& hist = c.field.diagnostics.energy_history;
  ASSERT_GE(hist.size(), 2u);
  for (std::size_t i = 1; i < hist.size(); ++i) EXPECT_LE(hist[i], hist[i - 1] * (1.0 + 1e-12));
}

TEST(Solver, ZeroFluxOfTheCoshModeAcrossSections) {
  // The cosh mode has zero net flux through every section.
  const auto c = solve_strip(1.0, LateralCondition::neumann, 1.0 / 32.0, cosh_neumann,
                             StructureOperator::constant(2.0, 1.0));
  EXPECT_NEAR(flux_integral(c.field, 0.5, FluxWeight::one).value, 0.0, 1e-9);
}

TEST(Solver, RejectsBadSettings) {
  SolverSettings s;
  s.theta = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.max_outer = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Solver, FieldCsvHasHeaderAndOneRowPerNode) {
  const auto c = solve_strip(1.0, LateralCondition::neumann, 0.5, linear, StructureOperator::constant(2.0, 1.0));
  const std::string csv = field_csv(c.field);
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (!header) {
      EXPECT_EQ(line, "x1,x2,value");
      header = true;
    } else {
      ++rows;
    }
  }
  EXPECT_EQ(rows, c.field.mesh().node_count());
}
