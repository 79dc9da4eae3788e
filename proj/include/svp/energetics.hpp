#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "svp/field.hpp"
#include "svp/frequency.hpp"

namespace svp {

/// Axial samples of a decay rate q(tau) (mu^{1/p} or lambda^{1/p}). A single
/// sample is treated as a constant profile.
struct RateProfile {
  std::vector<double> tau;
  std::vector<double> rate;

  static RateProfile constant(double q) { return {{0.0}, {q}}; }
  /// q = value^{1/p} at every station.
  static RateProfile from_frequencies(const std::vector<FrequencyStation>& stations, double p);

  double at(double s) const;
  /// Trapezoid integral over [a, b] using the samples inside and linear
  /// interpolation at the ends.
  double integrate(double a, double b) const;
};

/// Energy per axial element layer, indexed by layer.
std::vector<double> layer_energies(const ScalarField& f);

/// I(t, tau): integral of |grad f|^p over Delta(t, tau). Zero when t == tau.
double energy(const ScalarField& f, double t, double tau);

/// Section integral of |grad f|^p with the two-sided mean gradient.
double section_energy(const ScalarField& f, double tau);

/// Optimal constant of the trace of f on sigma(tau) (section quadrature).
double section_optimal_constant(const ScalarField& f, double tau);

/// Integral over sigma(tau) of |f - C| |A(x, grad f)| with the one-sided gradient.
double c1_integral(const ScalarField& f, double tau, double c, Side side);

struct EnergyProfile {
  double t = 0.0;
  std::vector<double> stations;
  std::vector<double> I;               // I(t, tau_j); NaN below t
  std::vector<double> I2;              // I2(-tau_j, tau_j) in layer mode; NaN otherwise
  std::vector<double> section_energy;
  std::vector<double> dIdtau;          // central difference of the slab energy
  std::vector<double> C1;              // with C = optimal constant on sigma(tau_j), side above
  std::vector<double> C2;              // flux with weight f, side above (side below on the top line)
  std::vector<double> C2tilde;         // minus the flux with weight f, side below
  std::optional<double> slope;         // fitted slope of log I2 over the window
  double slope_r2 = 0.0;
  bool slope_flagged = false;          // fit is not convincingly exponential
};

EnergyProfile energy_profile(const ScalarField& f, double t, std::span<const double> stations,
                             std::optional<std::pair<double, double>> slope_window = std::nullopt);

/// Least-squares slope of log(y) against x; r2 receives the coefficient of determination.
double fit_log_slope(std::span<const double> x, std::span<const double> y, double* r2 = nullptr);

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tol_disc = 0.0;
  double tol_round = 0.0;  // roundoff floor kept through calibration
  bool pass = true;
  std::vector<std::pair<std::string, double>> details;

  void set(double l, double r);
  void set_tolerance(double tol);
  void set_round(double tol);
};

/// Energy of a gradient at roundoff level: total volume times
/// (64 eps max|f| / h_min)^p, scaled by nu2.
double rounding_floor(const ScalarField& f);

/// Sets tol_disc on `coarse` to twice the margin drift against `fine`, with a
/// rounding floor.
void calibrate(InequalityCheck& coarse, const InequalityCheck& fine);

InequalityCheck svp_check_neumann(const ScalarField& f, const RateProfile& mu_rate, double t, double tau1,
                                  double tau2);
InequalityCheck svp_check_dirichlet(const ScalarField& f, const RateProfile& lambda_rate, double t,
                                    double tau1, double tau2);
InequalityCheck svp_symmetric_check(const ScalarField& f, const RateProfile& rate, double tau1, double tau2);

}  // namespace svp
