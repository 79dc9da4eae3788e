#include "svp/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace svp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double layer_range_energy(const ScalarField& f, std::size_t first_layer, std::size_t last_layer) {
  const Mesh& mesh = f.mesh();
  const double p = f.op().p();
  const std::size_t per_layer = mesh.elements_per_layer();
  double total = 0.0;
  for (std::size_t layer = first_layer; layer < last_layer; ++layer)
    for (std::size_t b = 0; b < per_layer; ++b) {
      const std::size_t e = layer * per_layer + b;
      for (const auto& qp : mesh.quadrature(e)) total += qp.weight * std::pow(norm(field_gradient(f, e, qp)), p);
    }
  return total;
}

bool is_layer(const Mesh& mesh) { return mesh.domain() && mesh.domain()->axial_kind == AxialKind::layer; }

}  // namespace

RateProfile RateProfile::from_frequencies(const std::vector<FrequencyStation>& stations, double p) {
  RateProfile r;
  for (const auto& s : stations) {
    r.tau.push_back(s.tau);
    r.rate.push_back(std::pow(s.result.value, 1.0 / p));
  }
  return r;
}

double RateProfile::at(double s) const {
  if (rate.empty()) throw std::invalid_argument("rate profile: empty");
  if (rate.size() == 1) return rate.front();
  if (s <= tau.front()) return rate.front();
  if (s >= tau.back()) return rate.back();
  const auto it = std::upper_bound(tau.begin(), tau.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - tau.begin());
  const double w = (s - tau[j - 1]) / (tau[j] - tau[j - 1]);
  return (1.0 - w) * rate[j - 1] + w * rate[j];
}

double RateProfile::integrate(double a, double b) const {
  if (b < a) return -integrate(b, a);
  if (rate.size() == 1) return rate.front() * (b - a);
  if (a < tau.front() - 1e-9 || b > tau.back() + 1e-9)
    throw std::invalid_argument("rate profile: integration range not covered by stations");
  std::vector<double> nodes{a};
  for (double s : tau)
    if (s > a && s < b) nodes.push_back(s);
  nodes.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    total += 0.5 * (at(nodes[i]) + at(nodes[i + 1])) * (nodes[i + 1] - nodes[i]);
  return total;
}

std::vector<double> layer_energies(const ScalarField& f) {
  const std::size_t layers = f.mesh().axial_lines() - 1;
  std::vector<double> out(layers);
  for (std::size_t j = 0; j < layers; ++j) out[j] = layer_range_energy(f, j, j + 1);
  return out;
}

double energy(const ScalarField& f, double t, double tau) {
  if (tau < t) throw std::invalid_argument("energy: need t <= tau");
  const std::size_t i0 = f.mesh().aligned_line(t);
  const std::size_t i1 = f.mesh().aligned_line(tau);
  return layer_range_energy(f, i0, i1);
}

double section_energy(const ScalarField& f, double tau) {
  const std::size_t line = f.mesh().aligned_line(tau);
  const double p = f.op().p();
  double total = 0.0;
  for (const auto& sp : section_points(f, line)) total += sp.weight * std::pow(norm(sp.grad_mean()), p);
  return total;
}

double section_optimal_constant(const ScalarField& f, double tau) {
  const auto pts = section_points(f, f.mesh().aligned_line(tau));
  std::vector<double> v, w;
  for (const auto& sp : pts) {
    v.push_back(sp.value);
    w.push_back(sp.weight);
  }
  return optimal_constant(v, w, f.op().p());
}

double c1_integral(const ScalarField& f, double tau, double c, Side side) {
  const Mesh& mesh = f.mesh();
  const std::size_t line = mesh.aligned_line(tau);
  double total = 0.0;
  for (const auto& sp : section_points(f, line)) {
    const bool has = side == Side::below ? sp.has_below : sp.has_above;
    const Vec3& g = has ? sp.grad(side) : sp.grad_mean();
    total += sp.weight * std::abs(sp.value - c) * norm(f.op().evaluate(axial_value(mesh, sp.x), g));
  }
  return total;
}

double fit_log_slope(std::span<const double> x, std::span<const double> y, double* r2) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(y[i]) && y[i] > 0.0) {
      xs.push_back(x[i]);
      ys.push_back(std::log(y[i]));
    }
  if (xs.size() < 2) throw std::invalid_argument("fit: need at least two positive samples");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit: degenerate abscissae");
  const double slope = sxy / sxx;
  if (r2) *r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return slope;
}

EnergyProfile energy_profile(const ScalarField& f, double t, std::span<const double> stations,
                             std::optional<std::pair<double, double>> slope_window) {
  const Mesh& mesh = f.mesh();
  for (std::size_t i = 1; i < stations.size(); ++i)
    if (!(stations[i] > stations[i - 1])) throw std::invalid_argument("energy_profile: stations must increase");
  const auto layers = layer_energies(f);
  std::vector<double> prefix(layers.size() + 1, 0.0);
  for (std::size_t j = 0; j < layers.size(); ++j) prefix[j + 1] = prefix[j] + layers[j];
  auto slab_energy = [&](std::size_t a, std::size_t b) { return prefix[b] - prefix[a]; };

  EnergyProfile prof;
  prof.t = t;
  const std::size_t t_line = mesh.aligned_line(t);
  const double h = mesh.axial_spacing();
  const bool layer_mode = is_layer(mesh);
  for (double tau : stations) {
    const std::size_t line = mesh.aligned_line(tau);
    prof.stations.push_back(mesh.axial_coordinate(line));
    prof.I.push_back(line >= t_line ? slab_energy(t_line, line) : kNaN);
    double i2 = kNaN;
    if (layer_mode && tau >= 0.0) {
      const std::size_t mirror = mesh.axial_lines() - 1 - line;
      if (mirror <= line) i2 = slab_energy(mirror, line);
    }
    prof.I2.push_back(i2);
    prof.section_energy.push_back(section_energy(f, tau));
    const bool below = line > 0;
    const bool above = line + 1 < mesh.axial_lines();
    double d = kNaN;
    if (below && above) d = (layers[line - 1] + layers[line]) / (2.0 * h);
    else if (below) d = layers[line - 1] / h;
    else if (above) d = layers[line] / h;
    prof.dIdtau.push_back(d);
    const Side c_side = above ? Side::above : Side::below;
    prof.C1.push_back(c1_integral(f, tau, section_optimal_constant(f, tau), c_side));
    prof.C2.push_back(flux_integral(f, tau, FluxWeight::f, 0.0, c_side).value);
    prof.C2tilde.push_back(below ? -flux_integral(f, tau, FluxWeight::f, 0.0, Side::below).value : kNaN);
  }
  if (slope_window) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < prof.stations.size(); ++i) {
      const double s = prof.stations[i];
      if (s >= slope_window->first - 1e-12 && s <= slope_window->second + 1e-12) {
        xs.push_back(s);
        ys.push_back(prof.I2[i]);
      }
    }
    if (xs.size() < 2) throw std::invalid_argument("energy_profile: fewer than two stations in slope window");
    prof.slope = fit_log_slope(xs, ys, &prof.slope_r2);
    prof.slope_flagged = prof.slope_r2 < 0.9999;
  }
  return prof;
}

double rounding_floor(const ScalarField& f) {
  const Mesh& mesh = f.mesh();
  double hmin = INFINITY;
  for (double w : mesh.actual_spacing()) hmin = std::min(hmin, w);
  double fmax = 0.0;
  for (double v : f.values()) fmax = std::max(fmax, std::abs(v));
  double volume = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (const auto& qp : mesh.quadrature(e)) volume += qp.weight;
  const double g = 64.0 * std::numeric_limits<double>::epsilon() * fmax / hmin;
  return f.op().nu2() * volume * std::pow(g, f.op().p()) * (1.0 + fmax);
}

void InequalityCheck::set_round(double tol) {
  tol_round = tol;
  set_tolerance(std::max(tol_disc, tol));
}

void InequalityCheck::set(double l, double r) {
  lhs = l;
  rhs = r;
  margin = r - l;
  pass = margin >= -tol_disc;
}

void InequalityCheck::set_tolerance(double tol) {
  tol_disc = tol;
  pass = margin >= -tol_disc;
}

void calibrate(InequalityCheck& coarse, const InequalityCheck& fine) {
  const double drift = std::abs(coarse.margin - fine.margin);
  const double floor = std::max(1e-12 * (std::abs(coarse.lhs) + std::abs(coarse.rhs)), coarse.tol_round);
  coarse.set_tolerance(std::max(2.0 * drift, floor));
  coarse.details.emplace_back("margin_fine", fine.margin);
}

namespace {

std::size_t check_line_side_above(const Mesh& mesh, double t) { return mesh.aligned_line(t); }

void require_order(double t, double tau1, double tau2) {
  if (!(t <= tau1 && tau1 <= tau2)) throw std::invalid_argument("check: need t <= tau' <= tau''");
}

}  // namespace

InequalityCheck svp_check_neumann(const ScalarField& f, const RateProfile& mu_rate, double t, double tau1,
                                  double tau2) {
  require_order(t, tau1, tau2);
  const Mesh& mesh = f.mesh();
  if (mesh.domain() && mesh.domain()->has_dirichlet_zero())
    throw std::invalid_argument("svp_check_neumann: field has a Dirichlet-zero lateral set");
  const std::size_t line = check_line_side_above(mesh, t);
  const Side side = line + 1 < mesh.axial_lines() ? Side::above : Side::below;
  const double nu1 = f.op().nu1(), nu2 = f.op().nu2();
  const double c = section_optimal_constant(f, t);
  const double c1 = c1_integral(f, t, c, side);
  const double i1 = energy(f, t, tau1);
  const double i2 = energy(f, t, tau2);
  const double integral = mu_rate.integrate(tau1, tau2);
  const double factor = std::exp(-(nu1 / nu2) * integral);

  InequalityCheck chk;
  chk.name = "svp_neumann";
  chk.set(i1 - c1 / nu1, (i2 - c1 / nu1) * factor);
  chk.set_round(rounding_floor(f));
  chk.details = {{"t", t},
                 {"tau1", tau1},
                 {"tau2", tau2},
                 {"I_tau1", i1},
                 {"I_tau2", i2},
                 {"C", c},
                 {"C1", c1},
                 {"rate_integral", integral},
                 {"factor", factor},
                 {"literal_form_margin", (i2 + c1 / nu1) * factor - (i1 + c1 / nu1)}};
  return chk;
}

InequalityCheck svp_check_dirichlet(const ScalarField& f, const RateProfile& lambda_rate, double t,
                                    double tau1, double tau2) {
  require_order(t, tau1, tau2);
  const Mesh& mesh = f.mesh();
  if (mesh.domain() && !mesh.domain()->has_dirichlet_zero())
    throw std::invalid_argument("svp_check_dirichlet: field has no Dirichlet-zero lateral set");
  const std::size_t line = check_line_side_above(mesh, t);
  const Side side = line + 1 < mesh.axial_lines() ? Side::above : Side::below;
  const double nu1 = f.op().nu1(), nu2 = f.op().nu2();
  const double c2 = flux_integral(f, t, FluxWeight::f, 0.0, side).value;
  const double i1 = energy(f, t, tau1);
  const double i2 = energy(f, t, tau2);
  const double integral = lambda_rate.integrate(tau1, tau2);
  const double factor = std::exp(-(nu1 / nu2) * integral);

  InequalityCheck chk;
  chk.name = "svp_dirichlet";
  chk.set(i1 + c2 / nu1, (i2 + c2 / nu1) * factor);
  chk.set_round(rounding_floor(f));
  chk.details = {{"t", t},           {"tau1", tau1},  {"tau2", tau2},
                 {"I_tau1", i1},     {"I_tau2", i2},  {"C2", c2},
                 {"rate_integral", integral}, {"factor", factor}};
  return chk;
}

InequalityCheck svp_symmetric_check(const ScalarField& f, const RateProfile& rate, double tau1, double tau2) {
  const Mesh& mesh = f.mesh();
  if (!is_layer(mesh)) throw std::invalid_argument("svp_symmetric_check: layer mode only");
  if (!(0.0 <= tau1 && tau1 <= tau2)) throw std::invalid_argument("svp_symmetric_check: need 0 <= tau' <= tau''");
  const double nu1 = f.op().nu1(), nu2 = f.op().nu2();
  const double inner = tau1 > 0.0 ? energy(f, -tau1, tau1) : 0.0;
  const double outer = tau2 > 0.0 ? energy(f, -tau2, tau2) : 0.0;
  const double f_minus = std::exp(-(nu1 / nu2) * rate.integrate(-tau2, -tau1));
  const double f_plus = std::exp(-(nu1 / nu2) * rate.integrate(tau1, tau2));

  InequalityCheck chk;
  chk.name = "svp_symmetric";
  chk.set(inner, outer * std::max(f_minus, f_plus));
  chk.set_round(rounding_floor(f));
  chk.details = {{"tau1", tau1},       {"tau2", tau2},         {"I2_inner", inner},
                 {"I2_outer", outer},  {"factor_minus", f_minus}, {"factor_plus", f_plus}};
  return chk;
}

}  // namespace svp
