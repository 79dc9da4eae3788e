#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svp/energetics.hpp"
#include "svp/field.hpp"

namespace svp {

enum class NormKind { w1p, lp, sup };

std::string to_string(NormKind kind);

/// Data for the bound-inversion predictor: outer half-width, decay rate and
/// optional embedding constants.
struct ZonePredictor {
  double tau_outer = 0.0;
  RateProfile rate;
  std::optional<double> c5;
  std::optional<double> c6;
};

struct ZoneReport {
  NormKind norm = NormKind::w1p;
  double s = 0.0;
  double measured = 0.0;        // largest symmetric half-width with the predicate
  bool full_band = false;
  double deviation = 0.0;       // measured deviation at `measured`
  std::optional<double> best_constant;
  std::optional<double> predicted;            // bound inversion
  std::optional<double> predicted_station;    // snapped down to a grid station
  std::optional<double> predicted_corrected;  // sup norm: power-corrected form
  std::optional<double> c5;
  std::optional<double> c6;
  double s_root = 0.0;   // s^{1/p}
  double s_power = 0.0;  // s^p
  std::string verdict;
};

/// Symmetric half-widths tau' = 0, h, 2h, ... whose mirror line exists.
std::vector<double> zone_stations(const Mesh& mesh);

/// Deviation of f from its best constant on Delta(-tau', tau').
double w1p_deviation(const ScalarField& f, double tau);
double lp_deviation(const ScalarField& f, double tau, double* best_c = nullptr);
double sup_deviation(const ScalarField& f, double tau, double* best_c = nullptr);

ZoneReport w1p_zone(const ScalarField& f, double s, const std::optional<ZonePredictor>& predictor = std::nullopt);
ZoneReport lp_zone(const ScalarField& f, double s, const std::optional<ZonePredictor>& predictor = std::nullopt);
ZoneReport sup_zone(const ScalarField& f, double s, const std::optional<ZonePredictor>& predictor = std::nullopt);
ZoneReport zone(NormKind kind, const ScalarField& f, double s,
                const std::optional<ZonePredictor>& predictor = std::nullopt);

/// Largest tau' with e_outer * max(one-sided decay factors) < s. Throws when
/// e_outer <= s (the whole band is already a zone).
double predict_zone(double e_outer, const RateProfile& rate, double s, double tau_outer, double nu1, double nu2);

}  // namespace svp
