#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "svp/frequency.hpp"

using namespace svp;
using namespace svp::testing;

namespace {

FrequencyResult interval(double length, std::size_t cells, double p, FrequencyKind kind,
                         std::vector<std::size_t> pinned) {
  return minimize_quotient(interval_mesh(length, cells), p, kind, std::move(pinned));
}

}  // namespace

TEST(Frequency, OptimalConstantOfSymmetricDataIsTheMidpoint) {
  const std::vector<double> u{-1.0, 0.0, 3.0}, w{1.0, 1.0, 1.0};
  EXPECT_NEAR(optimal_constant(u, w, 2.0), 2.0 / 3.0, 1e-6);  // mean, to golden-section accuracy
  EXPECT_NEAR(optimal_constant(u, w, 1.0 + 1e-9), 0.0, 1e-3);  // near the median
  const std::vector<double> flat{2.0, 2.0};
  EXPECT_EQ(optimal_constant(flat, std::vector<double>{1.0, 1.0}, 3.0), 2.0);
}

TEST(Frequency, FirstKindMatchesDenseOracle) {
  const std::size_t cells = 64;
  const FrequencyResult r = interval(1.0, cells, 2.0, FrequencyKind::first, {0, cells});
  EXPECT_NEAR(r.value, interval_dirichlet(1.0, cells), 1e-8 * r.value);
  EXPECT_NEAR(r.value, kPi * kPi, 5e-3 * kPi * kPi);
}

TEST(Frequency, ThirdKindWithOnePinnedEndMatchesDenseOracle) {
  const std::size_t cells = 64;
  const FrequencyResult r = interval(1.0, cells, 2.0, FrequencyKind::third, {0});
  EXPECT_NEAR(r.value, interval_one_end(1.0, cells), 1e-8 * r.value);
  EXPECT_NEAR(r.value, kPi * kPi / 4.0, 5e-3 * kPi * kPi / 4.0);
}

TEST(Frequency, SecondKindMatchesDenseOracle) {
  const std::size_t cells = 64;
  const FrequencyResult r = interval(1.0, cells, 2.0, FrequencyKind::second, {});
  EXPECT_NEAR(r.value, interval_neumann(1.0, cells), 1e-8 * r.value);
  ASSERT_TRUE(r.c3.has_value());
  EXPECT_NEAR(*r.c3, 0.0, 1e-6);
}

TEST(Frequency, SecondKindOnTheSquare) {
  const FrequencyResult r = minimize_quotient(square_mesh(1.0, 32), 2.0, FrequencyKind::second, {});
  EXPECT_NEAR(r.value, kPi * kPi, 1e-2 * kPi * kPi);
}

TEST(Frequency, PEqualsThreeMatchesInverseIteration) {
  const std::size_t cells = 128;
  const FrequencyResult r = interval(1.0, cells, 3.0, FrequencyKind::first, {0, cells});
  const double oracle = p_laplace_interval_oracle(3.0, 1.0, cells);
  EXPECT_NEAR(r.value, oracle, 1e-2 * oracle);
  EXPECT_NEAR(oracle, p_laplace_interval_closed_form(3.0, 1.0), 1e-2 * oracle);
}

TEST(Frequency, OracleReproducesTheLinearCase) {
  EXPECT_NEAR(p_laplace_interval_oracle(2.0, 1.0, 256), kPi * kPi, 1e-3 * kPi * kPi);
  EXPECT_NEAR(p_laplace_interval_closed_form(2.0, 1.0), kPi * kPi, 1e-12);
}

class Scaling : public ::testing::TestWithParam<double> {};

TEST_P(Scaling, DilationScalesTheQuotientByLToTheMinusP) {
  const double p = GetParam();
  const std::size_t cells = 32;
  for (FrequencyKind kind : {FrequencyKind::first, FrequencyKind::second}) {
    const std::vector<std::size_t> pinned =
        kind == FrequencyKind::first ? std::vector<std::size_t>{0, cells} : std::vector<std::size_t>{};
    const double unit = interval(1.0, cells, p, kind, pinned).value;
    const double wide = interval(2.5, cells, p, kind, pinned).value;
    EXPECT_NEAR(wide * std::pow(2.5, p), unit, 1e-8 * unit) << to_string(kind);
  }
}

INSTANTIATE_TEST_SUITE_P(Powers, Scaling, ::testing::Values(1.5, 2.0, 3.0));

TEST(Frequency, QuotientIsScaleInvariant) {
  const Mesh m = interval_mesh(1.0, 16);
  std::vector<double> u(17);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(kPi * i / 16.0) + 0.1 * i;
  const double q = rayleigh_quotient(m, 3.0, FrequencyKind::second, u);
  for (double& v : u) v = -7.0 * v + 4.0;
  EXPECT_NEAR(rayleigh_quotient(m, 3.0, FrequencyKind::second, u), q, 1e-9 * q);
}

TEST(Frequency, SectionsOfALayerAreAllTheBase) {
  const Mesh m = build_mesh(CanonicalDomain::strip(1.0, 2.0), 1.0 / 32.0);
  const std::vector<double> stations{-1.5, 0.0, 1.5};
  const auto profile = frequency_profile(m, 2.0, FrequencyKind::second, stations);
  ASSERT_EQ(profile.size(), 3u);
  for (const auto& st : profile) EXPECT_NEAR(st.result.value, profile[0].result.value, 1e-10 * profile[0].result.value);
}

TEST(Frequency, RadialSecondFrequencyFollowsTheCircle) {
  // Section at radius tau is [0,1] x circle of length 2 pi tau: mu = min(pi^2, 1/tau^2).
  const Mesh m = build_mesh(CanonicalDomain::radial(1.0, 0.5, 3.0), 1.0 / 16.0);
  const std::vector<double> stations{0.5, 1.0, 2.0, 3.0};
  const auto profile = frequency_profile(m, 2.0, FrequencyKind::second, stations);
  for (const auto& st : profile) {
    const double expect = std::min(kPi * kPi, 1.0 / (st.tau * st.tau));
    EXPECT_NEAR(st.result.value, expect, 1e-2 * expect) << "tau " << st.tau;
  }
}
