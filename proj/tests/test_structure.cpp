#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "svp/structure.hpp"

using namespace svp;

TEST(Structure, RejectsInvalidParameters) {
  EXPECT_THROW(StructureOperator(1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(StructureOperator(2.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(StructureOperator(2.0, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(StructureOperator(2.0, 1.0, 2.0, Coefficient{CoefficientKind::constant, 3.0}), std::invalid_argument);
}

TEST(Structure, ZeroGradientMapsToZero) {
  const auto op = StructureOperator::constant(1.5, 2.0);
  const Vec3 z{};
  const Vec3 a = op.evaluate(0.3, z);
  for (double v : a) EXPECT_EQ(v, 0.0);
}

TEST(Structure, CoefficientKinds) {
  const Coefficient step{CoefficientKind::axial_step, 1.0, 2.0, 1.0};
  EXPECT_EQ(step(1.99, 1.0, 3.0), 1.0);
  EXPECT_EQ(step(2.0, 1.0, 3.0), 3.0);
  const Coefficient osc{CoefficientKind::oscillation, 1.0, 0.0, 5.0};
  for (double pk = 0.0; pk < 3.0; pk += 0.1) {
    const double a = osc(pk, 1.0, 3.0);
    EXPECT_GE(a, 1.0);
    EXPECT_LE(a, 3.0);
  }
}

TEST(Structure, PotentialIsEnergyDensity) {
  const auto op = StructureOperator::constant(3.0, 2.0);
  const Vec3 xi{1.0, 2.0, 2.0};
  EXPECT_NEAR(op.potential(0.0, xi), 2.0 * 27.0 / 3.0, 1e-12);
}

TEST(Structure, PropertySuitePassesForEveryKind) {
  for (double p : {1.2, 1.5, 2.0, 3.0, 6.0}) {
    for (const Coefficient& c : {Coefficient{CoefficientKind::constant, 1.5},
                                 Coefficient{CoefficientKind::axial_step, 1.0, 2.0},
                                 Coefficient{CoefficientKind::oscillation, 1.0, 0.0, 3.0}}) {
      const StructureOperator op(p, 1.0, 2.0, c);
      const StructureReport r = check_structure(op, 2000, 17);
      EXPECT_TRUE(r.pass) << "p = " << p << " kind " << to_string(c.kind);
      EXPECT_LE(r.worst_homogeneity, 1e-12);
      EXPECT_GE(r.worst_lower_ellipticity, -1e-12);
      EXPECT_GE(r.worst_upper_ellipticity, -1e-12);
      EXPECT_LE(r.worst_potential_gradient, 1e-6);
      EXPECT_GE(r.worst_monotonicity, 0.0);
    }
  }
}

TEST(Structure, HomogeneityByHand) {
  const StructureOperator op(2.5, 1.0, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 xi{u(rng), u(rng), u(rng)};
    const double t = 0.1 + std::abs(u(rng));
    const Vec3 a = op.evaluate(0.0, xi);
    const Vec3 b = op.evaluate(0.0, {t * xi[0], t * xi[1], t * xi[2]});
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(b[d], std::pow(t, 1.5) * a[d], 1e-12 * (1.0 + std::abs(b[d])));
  }
}

TEST(Structure, SamplingIsDeterministic) {
  const StructureOperator op(3.0, 1.0, 2.0, Coefficient{CoefficientKind::oscillation, 1.0, 0.0, 2.0});
  const auto a = check_structure(op, 500, 9);
  const auto b = check_structure(op, 500, 9);
  EXPECT_EQ(a.worst_homogeneity, b.worst_homogeneity);
  EXPECT_EQ(a.worst_potential_gradient, b.worst_potential_gradient);
}
