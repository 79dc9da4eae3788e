#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svp/energetics.hpp"
#include "svp/field.hpp"
#include "svp/frequency.hpp"

namespace svp {

/// C7 = 2 p^p (nu2 / nu1)^p; C8 = C7 / 2.
double c7_constant(double p, double nu1, double nu2);
double c8_constant(double p, double nu1, double nu2);

struct SectionMassProfile {
  std::vector<double> tau;
  std::vector<double> mass;  // integral over sigma(tau) of |f - C|^p
  double c = 0.0;
};

SectionMassProfile section_mass(const ScalarField& f, double c, std::span<const double> stations);

/// Grid stations of the mesh inside [a, b].
std::vector<double> stations_between(const Mesh& mesh, double a, double b);

struct CutoffResult {
  double a = 0.0;               // [int m^{1/(1-p)}]^{1-p}, trapezoid in log space
  std::vector<double> tau;      // stations in [tau', tau'']
  std::vector<double> psi;      // realizing cutoff, psi(tau') = 1, psi(tau'') = 0
  double numeric_a = 0.0;       // minimized piecewise-linear functional
  int numeric_iterations = 0;
  bool degenerate = false;      // zero mass inside the window
};

CutoffResult optimal_cutoff(const SectionMassProfile& mass, double tau1, double tau2, double p,
                            int sub_stations = 256);

struct CutoffBoundResult {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double c = 0.0;
  double a1 = 0.0;  // window [-tau'', -tau']
  double a2 = 0.0;  // window [tau', tau'']
  double c7 = 0.0;
  bool degenerate = false;
  InequalityCheck check;
};

CutoffBoundResult cutoff_bound(const ScalarField& f, double c, double tau1, double tau2);

enum class PlForm { star_i, star_ii, star_dirichlet, eq7_12, eq10_39 };

std::string to_string(PlForm form);
PlForm pl_form_from_string(const std::string& name);

/// A family of truncated problems sharing operator, cap data and mesh spacing.
struct PlFamily {
  CanonicalDomain domain;  // beta (or beta*) is replaced per truncation
  StructureOperator op = StructureOperator::constant(2.0, 1.0);
  BoundarySpec bc;
  SolverSettings solver;
  double h = 1.0 / 32.0;
};

struct PlSettings {
  std::vector<double> truncations;  // layer: half-length beta*; radial: outer radius beta
  double tau_inner = 0.5;           // tau' (layer) or tau0 (radial)
  double window = 1.0;
  int rate_stations = 5;            // radial forms: stations for the rate integral
  FrequencySettings frequency;
};

struct PlRow {
  double truncation = 0.0;
  double tau_outer = 0.0;   // tau'' (layer) or tau' (radial)
  double rhs = 0.0;
  double lhs = 0.0;         // measured inner energy
  double a = 0.0;
  double rate_integral = 0.0;
  double c = 0.0;
  bool degenerate = false;
  int outer_iterations = 0;
  bool converged = true;
};

struct PlReport {
  PlForm form = PlForm::star_i;
  std::vector<PlRow> rows;
  std::optional<double> rhs_slope;
  std::optional<double> lhs_slope;
  bool forces_triviality = false;
  std::string verdict;
  std::string note;
};

PlReport pl_check(const PlFamily& family, PlForm form, const PlSettings& settings);

}  // namespace svp
