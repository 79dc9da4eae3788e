#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "support.hpp"
#include "svp/energetics.hpp"

using namespace svp;
using namespace svp::testing;

namespace {

const StripCase& cosh_case() {
  static const StripCase c = solve_strip(2.0, LateralCondition::neumann, 1.0 / 32.0, cosh_neumann,
                                         StructureOperator::constant(2.0, 1.0));
  return c;
}

const StripCase& cosh_dirichlet_case() {
  static const StripCase c = solve_strip(2.0, LateralCondition::dirichlet_zero, 1.0 / 32.0, cosh_dirichlet,
                                         StructureOperator::constant(2.0, 1.0));
  return c;
}

}  // namespace

TEST(RateProfile, ConstantAndInterpolated) {
  const RateProfile c = RateProfile::constant(2.0);
  EXPECT_DOUBLE_EQ(c.at(-5.0), 2.0);
  EXPECT_DOUBLE_EQ(c.integrate(-1.0, 2.0), 6.0);
  const RateProfile r{{0.0, 1.0, 2.0}, {1.0, 3.0, 3.0}};
  EXPECT_DOUBLE_EQ(r.at(0.5), 2.0);
  EXPECT_DOUBLE_EQ(r.integrate(0.0, 2.0), 2.0 + 3.0);
  EXPECT_DOUBLE_EQ(r.integrate(0.5, 1.0), 0.5 * (2.0 + 3.0) * 0.5);
}

TEST(Energy, FitLogSlopeRecoversExponent) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(0.3 * i);
    y.push_back(4.0 * std::exp(2.5 * x.back()));
  }
  double r2 = 0.0;
  EXPECT_NEAR(fit_log_slope(x, y, &r2), 2.5, 1e-12);
  EXPECT_NEAR(r2, 1.0, 1e-12);
}

TEST(Energy, CoshModeMatchesClosedForm) {
  const ScalarField& f = cosh_case().field;
  for (auto [a, b] : {std::pair{-1.0, 1.0}, std::pair{0.0, 2.0}, std::pair{-2.0, -0.5}}) {
    const double exact = cosh_mode_energy(a, b);
    EXPECT_NEAR(energy(f, a, b), exact, 1e-2 * exact) << a << " " << b;
  }
}

TEST(Energy, IsAdditiveOverSlabsAndZeroOnAPoint) {
  const ScalarField& f = cosh_case().field;
  EXPECT_EQ(energy(f, 0.5, 0.5), 0.0);
  EXPECT_NEAR(energy(f, -1.0, 0.25) + energy(f, 0.25, 1.5), energy(f, -1.0, 1.5), 1e-10 * energy(f, -1.0, 1.5));
  const auto layers = layer_energies(f);
  EXPECT_NEAR(std::accumulate(layers.begin(), layers.end(), 0.0), energy(f, -2.0, 2.0), 1e-10 * energy(f, -2.0, 2.0));
}

TEST(Energy, SectionEnergyConvergesAtSecondOrder) {
  const StripCase coarse = solve_strip(2.0, LateralCondition::neumann, 1.0 / 16.0, cosh_neumann,
                                       StructureOperator::constant(2.0, 1.0));
  const ScalarField& fine = cosh_case().field;
  for (double s : {0.0, 0.75, 1.5}) {
    const double exact = kPi * kPi / 2.0 * std::cosh(2.0 * kPi * s);
    const double e_coarse = std::abs(section_energy(coarse.field, s) - exact);
    const double e_fine = std::abs(section_energy(fine, s) - exact);
    EXPECT_LE(e_fine, 2e-2 * exact) << s;
    EXPECT_GE(std::log2(e_coarse / e_fine), 1.9) << s;
  }
}

TEST(Energy, ProfileDerivativeIsTheSectionEnergy) {
  const ScalarField& f = cosh_case().field;
  std::vector<double> stations;
  for (double s = -1.5; s <= 1.5 + 1e-12; s += 0.25) stations.push_back(s);
  const EnergyProfile prof = energy_profile(f, -2.0, stations, std::pair{0.5, 1.5});
  for (std::size_t i = 1; i + 1 < stations.size(); ++i)
    EXPECT_NEAR(prof.dIdtau[i], prof.section_energy[i], 2e-2 * prof.section_energy[i]);
  ASSERT_TRUE(prof.slope.has_value());
  EXPECT_NEAR(*prof.slope, 2.0 * kPi, 2e-2 * 2.0 * kPi);
  EXPECT_FALSE(prof.slope_flagged);
}

TEST(Check, NeumannPassesOnTheCoshMode) {
  const ScalarField& f = cosh_case().field;
  const RateProfile mu = RateProfile::constant(kPi);
  for (auto [t, t1, t2] : {std::tuple{-2.0, -1.5, 0.0}, std::tuple{-1.0, 0.0, 1.0}, std::tuple{0.0, 0.5, 1.75}}) {
    const InequalityCheck chk = svp_check_neumann(f, mu, t, t1, t2);
    EXPECT_TRUE(chk.pass) << t << " " << t1 << " " << t2 << " margin " << chk.margin;
  }
}

TEST(Check, DirichletPassesOnTheCoshMode) {
  const ScalarField& f = cosh_dirichlet_case().field;
  const RateProfile lambda = RateProfile::constant(kPi);
  for (auto [t, t1, t2] : {std::tuple{-2.0, -1.0, 0.5}, std::tuple{0.0, 0.5, 1.75}}) {
    const InequalityCheck chk = svp_check_dirichlet(f, lambda, t, t1, t2);
    EXPECT_TRUE(chk.pass) << t << " " << t1 << " " << t2 << " margin " << chk.margin;
  }
  EXPECT_THROW((void)svp_check_neumann(f, lambda, 0.0, 0.5, 1.0), std::invalid_argument);
}

TEST(Check, SymmetricPassesOnTheCoshMode) {
  const RateProfile mu = RateProfile::constant(kPi);
  EXPECT_TRUE(svp_symmetric_check(cosh_case().field, mu, 0.5, 1.5).pass);
  EXPECT_TRUE(svp_symmetric_check(cosh_dirichlet_case().field, mu, 0.25, 1.75).pass);
}

TEST(Check, OrderIsEnforced) {
  EXPECT_THROW((void)svp_check_neumann(cosh_case().field, RateProfile::constant(kPi), 0.5, 0.25, 1.0),
               std::invalid_argument);
}

TEST(Check, ConstantFieldIsExactlyBalanced) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(CanonicalDomain::strip(1.0, 2.0), 0.125));
  const ScalarField f = solve(mesh, StructureOperator::constant(3.0, 1.0), BoundarySpec::constant(1.0, 1.0));
  const InequalityCheck chk = svp_symmetric_check(f, RateProfile::constant(kPi), 0.5, 1.5);
  EXPECT_TRUE(chk.pass);
  EXPECT_GT(chk.tol_round, 0.0);
  EXPECT_LT(chk.tol_round, 1e-20);
}

TEST(Check, CalibrationUsesTwiceTheDrift) {
  InequalityCheck coarse, fine;
  coarse.set(1.0, 1.5);
  fine.set(1.0, 1.4);
  calibrate(coarse, fine);
  EXPECT_NEAR(coarse.tol_disc, 0.2, 1e-12);
  EXPECT_TRUE(coarse.pass);
}

// Property: a field with nonzero net axial flux breaks the one-sided Neumann
// estimate. f = s grows linearly, so I(t, tau) cannot dominate an exponential.
TEST(Check, LinearFieldViolatesTheNeumannEstimate) {
  const auto c = solve_strip(2.0, LateralCondition::neumann, 0.125, [](const Vec3& x) { return x[1]; },
                             StructureOperator::constant(2.0, 1.0));
  const InequalityCheck chk = svp_check_neumann(c.field, RateProfile::constant(kPi), -1.0, 0.0, 1.0);
  EXPECT_FALSE(chk.pass);
  EXPECT_NEAR(chk.lhs, 1.0, 1e-10);                        // I(-1, 0) = 1
  EXPECT_NEAR(chk.rhs, 2.0 * std::exp(-kPi), 1e-10);       // I(-1, 1) e^{-pi}
}
