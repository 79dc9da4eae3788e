#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "svp/asymptotics.hpp"

using namespace svp;
using namespace svp::testing;

namespace {

SectionMassProfile mass_profile(double a, double b, int n, double (*m)(double)) {
  SectionMassProfile out;
  for (int i = 0; i <= n; ++i) {
    const double t = a + (b - a) * i / n;
    out.tau.push_back(t);
    out.mass.push_back(m(t));
  }
  return out;
}

}  // namespace

TEST(Cutoff, Constants) {
  EXPECT_DOUBLE_EQ(c7_constant(2.0, 1.0, 1.0), 8.0);
  EXPECT_DOUBLE_EQ(c8_constant(2.0, 1.0, 1.0), 4.0);
  EXPECT_NEAR(c7_constant(3.0, 1.0, 2.0), 2.0 * 27.0 * 8.0, 1e-10);
}

TEST(Cutoff, ConstantMassGivesLinearCutoff) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto mass = mass_profile(0.5, 2.0, 60, [](double) { return 3.0; });
    const CutoffResult r = optimal_cutoff(mass, 0.5, 2.0, p);
    EXPECT_NEAR(r.a, std::pow(1.5, 1.0 - p) * 3.0, 1e-12) << p;
    for (std::size_t i = 0; i < r.tau.size(); ++i) EXPECT_NEAR(r.psi[i], (2.0 - r.tau[i]) / 1.5, 1e-12);
    EXPECT_NEAR(r.numeric_a, r.a, 5e-3 * r.a);
  }
}

TEST(Cutoff, LinearMassGivesLogarithmicCutoff) {
  const auto mass = mass_profile(1.0, 2.0, 400, [](double t) { return t; });
  const CutoffResult r = optimal_cutoff(mass, 1.0, 2.0, 2.0);
  EXPECT_NEAR(r.a, 1.0 / std::log(2.0), 1e-4);
  for (std::size_t i = 0; i < r.tau.size(); ++i)
    EXPECT_NEAR(r.psi[i], 1.0 - std::log(r.tau[i]) / std::log(2.0), 1e-4);
  EXPECT_NEAR(r.numeric_a, r.a, 5e-3 * r.a);
  EXPECT_DOUBLE_EQ(r.psi.front(), 1.0);
  EXPECT_DOUBLE_EQ(r.psi.back(), 0.0);
}

TEST(Cutoff, NumericMinimizerAgreesOnAnExponentialMass) {
  for (double p : {1.5, 2.0, 4.0}) {
    const auto mass = mass_profile(0.0, 2.0, 200, [](double t) { return std::exp(3.0 * t); });
    const CutoffResult r = optimal_cutoff(mass, 0.0, 2.0, p);
    EXPECT_NEAR(r.numeric_a, r.a, 5e-3 * r.a) << p;
    EXPECT_LE(r.numeric_a, r.a * (1.0 + 5e-3));
  }
}

TEST(Cutoff, ZeroMassIsDegenerate) {
  const auto mass = mass_profile(0.0, 1.0, 10, [](double) { return 0.0; });
  const CutoffResult r = optimal_cutoff(mass, 0.0, 1.0, 2.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.a, 0.0);
}

TEST(CutoffBound, HoldsOnTheCoshMode) {
  const StripCase c = solve_strip(2.0, LateralCondition::neumann, 1.0 / 32.0, cosh_neumann,
                                  StructureOperator::constant(2.0, 1.0));
  for (auto [t1, t2] : {std::pair{0.25, 1.0}, std::pair{0.5, 1.75}}) {
    const CutoffBoundResult r = cutoff_bound(c.field, 0.0, t1, t2);
    EXPECT_TRUE(r.check.pass) << t1 << " " << t2 << " margin " << r.check.margin;
    EXPECT_FALSE(r.degenerate);
    EXPECT_DOUBLE_EQ(r.c7, 8.0);
  }
}

TEST(CutoffBound, ConstantFieldIsDegenerate) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(CanonicalDomain::strip(1.0, 2.0), 0.125));
  const ScalarField f = solve(mesh, StructureOperator::constant(2.0, 1.0), BoundarySpec::constant(2.0, 2.0));
  const CutoffBoundResult r = cutoff_bound(f, 2.0, 0.5, 1.5);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.check.pass);
}

TEST(CutoffBound, RejectsBadWindows) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(CanonicalDomain::strip(1.0, 2.0), 0.125));
  const ScalarField f = solve(mesh, StructureOperator::constant(2.0, 1.0), BoundarySpec::constant(1.0, 1.0));
  EXPECT_THROW((void)cutoff_bound(f, 0.0, 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW((void)cutoff_bound(f, 0.0, 0.0, 0.5), std::invalid_argument);
}

TEST(Pl, FormNamesRoundTrip) {
  for (PlForm f : {PlForm::star_i, PlForm::star_ii, PlForm::star_dirichlet, PlForm::eq7_12, PlForm::eq10_39})
    EXPECT_EQ(pl_form_from_string(to_string(f)), f);
  EXPECT_THROW((void)pl_form_from_string("starIII"), std::invalid_argument);
}

TEST(Pl, RejectsShortOrUnorderedFamilies) {
  PlFamily fam{CanonicalDomain::strip(1.0, 3.0), StructureOperator::constant(2.0, 1.0),
               BoundarySpec::constant(1.0, 1.0), {}, 0.25};
  PlSettings s;
  s.truncations = {3.0, 4.0};
  EXPECT_THROW((void)pl_check(fam, PlForm::star_i, s), std::invalid_argument);
  s.truncations = {3.0, 5.0, 4.0};
  EXPECT_THROW((void)pl_check(fam, PlForm::star_i, s), std::invalid_argument);
  s.truncations = {3.0, 4.0, 5.0};
  EXPECT_THROW((void)pl_check(fam, PlForm::eq7_12, s), std::invalid_argument);  // radial form on a layer
}

TEST(Pl, ConstantCapsForceTriviality) {
  PlFamily fam{CanonicalDomain::strip(1.0, 3.0), StructureOperator::constant(2.0, 1.0),
               BoundarySpec::constant(1.0, 1.0), {}, 0.25};
  PlSettings s;
  s.truncations = {2.0, 2.5, 3.0};
  const PlReport r = pl_check(fam, PlForm::star_i, s);
  EXPECT_TRUE(r.forces_triviality);
  EXPECT_EQ(r.verdict, "bound → 0: theorem forces triviality (f ≡ const)");
}
