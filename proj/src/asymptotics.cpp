#include "svp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <stdexcept>

namespace svp {

namespace {

constexpr double kStationTol = 1e-9;

double logsumexp(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

bool is_layer(const Mesh& mesh) { return mesh.domain() && mesh.domain()->axial_kind == AxialKind::layer; }

// Tridiagonal solve: a sub, b diag, c super, d rhs (overwritten).
void thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

// min over piecewise-linear psi of sum coef_i |psi_{i+1} - psi_i|^p with
// psi_0 = 1, psi_N = 0, by damped Newton on the interior values.
double minimize_cutoff_functional(const std::vector<double>& coef, double p, int* iterations) {
  const std::size_t intervals = coef.size();
  std::vector<double> psi(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) psi[i] = 1.0 - static_cast<double>(i) / intervals;
  auto functional = [&](const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < intervals; ++i) s += coef[i] * std::pow(std::abs(u[i + 1] - u[i]), p);
    return s;
  };
  double value = functional(psi);
  int it = 0;
  if (intervals < 2) {
    if (iterations) *iterations = 0;
    return value;
  }
  const std::size_t n = intervals - 1;
  for (; it < 500; ++it) {
    std::vector<double> dphi(intervals), ddphi(intervals);
    for (std::size_t i = 0; i < intervals; ++i) {
      const double d = psi[i + 1] - psi[i];
      const double ad = std::max(std::abs(d), 1e-300);
      dphi[i] = coef[i] * p * std::pow(ad, p - 1.0) * (d < 0.0 ? -1.0 : 1.0);
      ddphi[i] = coef[i] * p * (p - 1.0) * std::pow(ad, p - 2.0);
    }
    std::vector<double> g(n), a(n, 0.0), b(n), c(n, 0.0);
    double gnorm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // Interior node j + 1 touches intervals j and j + 1.
      g[j] = dphi[j] - dphi[j + 1];
      b[j] = ddphi[j] + ddphi[j + 1];
      if (j > 0) a[j] = -ddphi[j];
      if (j + 1 < n) c[j] = -ddphi[j + 1];
      gnorm = std::max(gnorm, std::abs(g[j]));
    }
    std::vector<double> step = g;
    thomas(a, b, c, step);
    double slope = 0.0;
    for (std::size_t j = 0; j < n; ++j) slope += g[j] * step[j];
    // Keep every increment on its side of zero; the minimizer is strictly monotone.
    double t = 1.0;
    for (std::size_t i = 0; i < intervals; ++i) {
      const double s_hi = i + 1 <= n ? step[i] : 0.0;  // step of psi_{i+1}
      const double s_lo = i >= 1 ? step[i - 1] : 0.0;  // step of psi_i
      const double d = psi[i + 1] - psi[i];
      const double rate = -(s_hi - s_lo);
      if (d != 0.0 && rate * d < 0.0) t = std::min(t, 0.99 * std::abs(d) / std::abs(rate));
    }
    double trial_value = value;
    std::vector<double> trial(psi);
    bool accepted = false;
    for (int ls = 0; ls < 60 && !accepted; ++ls) {
      for (std::size_t j = 0; j < n; ++j) trial[j + 1] = psi[j + 1] - t * step[j];
      trial_value = functional(trial);
      accepted = trial_value <= value - 1e-4 * t * slope && trial_value < value;
      if (!accepted) t *= 0.5;
    }
    if (!accepted) break;
    const double decrease = value - trial_value;
    psi.swap(trial);
    value = trial_value;
    if (decrease <= 1e-15 * value || gnorm == 0.0) {
      ++it;
      break;
    }
  }
  if (iterations) *iterations = it;
  return value;
}

double mass_at(const SectionMassProfile& mass, double s) {
  const auto& t = mass.tau;
  if (s <= t.front()) return mass.mass.front();
  if (s >= t.back()) return mass.mass.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  const double w = (s - t[j - 1]) / (t[j] - t[j - 1]);
  const double a = mass.mass[j - 1], b = mass.mass[j];
  // Geometric interpolation between positive samples: exact for exponential mass.
  if (a > 0.0 && b > 0.0) return a * std::pow(b / a, w);
  return (1.0 - w) * a + w * b;
}

}  // namespace

double c7_constant(double p, double nu1, double nu2) { return 2.0 * std::pow(p, p) * std::pow(nu2 / nu1, p); }

double c8_constant(double p, double nu1, double nu2) { return 0.5 * c7_constant(p, nu1, nu2); }

std::vector<double> stations_between(const Mesh& mesh, double a, double b) {
  std::vector<double> out;
  const double h = mesh.axial_spacing();
  for (std::size_t line = 0; line < mesh.axial_lines(); ++line) {
    const double s = mesh.axial_coordinate(line);
    if (s >= a - 1e-6 * h && s <= b + 1e-6 * h) out.push_back(s);
  }
  return out;
}

SectionMassProfile section_mass(const ScalarField& f, double c, std::span<const double> stations) {
  SectionMassProfile prof;
  prof.c = c;
  const double p = f.op().p();
  // Differences at rounding level of the data count as exact zeros.
  double scale = std::abs(c);
  for (double v : f.values()) scale = std::max(scale, std::abs(v));
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  for (double tau : stations) {
    const std::size_t line = f.mesh().aligned_line(tau);
    double m = 0.0;
    for (const auto& sp : section_points(f, line)) {
      const double d = std::abs(sp.value - c);
      if (d > noise) m += sp.weight * std::pow(d, p);
    }
    if (!prof.tau.empty() && !(tau > prof.tau.back())) throw std::invalid_argument("section_mass: stations must increase");
    prof.tau.push_back(tau);
    prof.mass.push_back(m);
  }
  return prof;
}

CutoffResult optimal_cutoff(const SectionMassProfile& mass, double tau1, double tau2, double p, int sub_stations) {
  if (!(p > 1.0)) throw std::invalid_argument("optimal_cutoff: p must exceed 1");
  if (!(tau1 < tau2)) throw std::invalid_argument("optimal_cutoff: need tau' < tau''");
  CutoffResult res;
  std::vector<double> m;
  for (std::size_t i = 0; i < mass.tau.size(); ++i)
    if (mass.tau[i] >= tau1 - kStationTol && mass.tau[i] <= tau2 + kStationTol) {
      res.tau.push_back(mass.tau[i]);
      m.push_back(mass.mass[i]);
    }
  if (res.tau.size() < 2 || std::abs(res.tau.front() - tau1) > 1e-6 || std::abs(res.tau.back() - tau2) > 1e-6)
    throw std::invalid_argument("optimal_cutoff: mass profile does not cover [tau', tau'']");
  for (double v : m)
    if (!(v > 0.0)) {
      res.degenerate = true;
      res.psi.assign(res.tau.size(), 0.0);
      res.psi.front() = 1.0;
      return res;
    }

  // g = m^{1/(1-p)} in log space.
  const double e = 1.0 / (1.0 - p);
  std::vector<double> lg(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) lg[i] = e * std::log(m[i]);
  std::vector<double> terms;
  std::vector<double> cumulative{-INFINITY};
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double lh = std::log(0.5 * (res.tau[i + 1] - res.tau[i]));
    terms.push_back(lh + lg[i]);
    terms.push_back(lh + lg[i + 1]);
    cumulative.push_back(logsumexp(terms));
  }
  const double log_total = cumulative.back();
  res.a = std::exp((1.0 - p) * log_total);
  for (double lc : cumulative) res.psi.push_back(1.0 - std::exp(lc - log_total));
  res.psi.back() = 0.0;

  // Cross-check: minimize over piecewise-linear psi on a uniform sub-grid
  // with the mass interpolated between stations.
  const int n = std::max(sub_stations, 1);
  const double delta = (tau2 - tau1) / n;
  std::vector<double> coef(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double mbar = 0.5 * (mass_at(mass, tau1 + i * delta) + mass_at(mass, tau1 + (i + 1) * delta));
    coef[static_cast<std::size_t>(i)] = mbar * std::pow(delta, 1.0 - p);
  }
  // Rescale so the Newton iteration sees O(1) numbers.
  const double scale = *std::max_element(coef.begin(), coef.end());
  for (double& v : coef) v /= scale;
  res.numeric_a = scale * minimize_cutoff_functional(coef, p, &res.numeric_iterations);
  return res;
}

CutoffBoundResult cutoff_bound(const ScalarField& f, double c, double tau1, double tau2) {
  const Mesh& mesh = f.mesh();
  if (!is_layer(mesh)) throw std::invalid_argument("cutoff_bound: layer mode only");
  if (!(0.0 < tau1 && tau1 < tau2)) throw std::invalid_argument("cutoff_bound: need 0 < tau' < tau''");
  const double p = f.op().p();
  CutoffBoundResult res;
  res.tau1 = tau1;
  res.tau2 = tau2;
  res.c = c;
  res.c7 = c7_constant(p, f.op().nu1(), f.op().nu2());
  const auto right = stations_between(mesh, tau1, tau2);
  const auto left = stations_between(mesh, -tau2, -tau1);
  const auto a2 = optimal_cutoff(section_mass(f, c, right), tau1, tau2, p);
  const auto a1 = optimal_cutoff(section_mass(f, c, left), -tau2, -tau1, p);
  res.a1 = a1.a;
  res.a2 = a2.a;
  res.check.name = "cutoff_bound";
  res.check.set(energy(f, -tau1, tau1), res.c7 * std::max(res.a1, res.a2));
  res.check.set_round(rounding_floor(f));
  res.degenerate = a1.degenerate || a2.degenerate || res.check.rhs <= res.check.tol_round;
  res.check.details = {{"tau1", tau1}, {"tau2", tau2}, {"C", c},         {"A1", res.a1},
                       {"A2", res.a2}, {"C7", res.c7}, {"degenerate", res.degenerate ? 1.0 : 0.0}};
  return res;
}

std::string to_string(PlForm form) {
  switch (form) {
    case PlForm::star_i: return "starI";
    case PlForm::star_ii: return "starII";
    case PlForm::star_dirichlet: return "starDirichlet";
    case PlForm::eq7_12: return "eq7.12";
    case PlForm::eq10_39: return "eq10.39";
  }
  return "starI";
}

PlForm pl_form_from_string(const std::string& name) {
  for (PlForm f : {PlForm::star_i, PlForm::star_ii, PlForm::star_dirichlet, PlForm::eq7_12, PlForm::eq10_39})
    if (to_string(f) == name) return f;
  throw std::invalid_argument("unknown PL form '" + name + "'");
}

namespace {

bool radial_form(PlForm form) { return form == PlForm::eq7_12 || form == PlForm::eq10_39; }
bool zero_constant_form(PlForm form) { return form != PlForm::star_i && form != PlForm::eq7_12; }

CanonicalDomain truncated(const CanonicalDomain& base, double truncation, bool radial) {
  CanonicalDomain d = base;
  d.beta = radial ? truncation : d.alpha + 2.0 * truncation;
  d.validate();
  return d;
}

// Optimal constant of the trace over all stations of the windows.
double window_constant(const ScalarField& f, const std::vector<std::vector<double>>& windows) {
  std::vector<double> v, w;
  for (const auto& stations : windows)
    for (double tau : stations)
      for (const auto& sp : section_points(f, f.mesh().aligned_line(tau))) {
        v.push_back(sp.value);
        w.push_back(sp.weight);
      }
  return optimal_constant(v, w, f.op().p());
}

std::vector<double> grid_stations(const Mesh& mesh, double a, double b, int count) {
  const auto all = stations_between(mesh, a, b);
  if (count < 2 || all.size() <= static_cast<std::size_t>(count)) return all;
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const std::size_t idx = static_cast<std::size_t>(std::llround(static_cast<double>(i) * (all.size() - 1) / (count - 1)));
    if (out.empty() || all[idx] > out.back()) out.push_back(all[idx]);
  }
  return out;
}

PlRow run_truncation(const PlFamily& family, PlForm form, const PlSettings& settings, double truncation) {
  const bool radial = radial_form(form);
  const CanonicalDomain domain = truncated(family.domain, truncation, radial);
  auto mesh = std::make_shared<const Mesh>(build_mesh(domain, family.h));
  const ScalarField f = solve(mesh, family.op, family.bc, family.solver);
  const double p = family.op.p();
  const double k = family.op.nu1() / family.op.nu2();

  PlRow row;
  row.truncation = truncation;
  row.outer_iterations = f.diagnostics.outer_iterations;
  row.converged = f.diagnostics.converged;
  const double floor = rounding_floor(f);

  if (!radial) {
    const double outer = truncation - settings.window;
    const double inner = settings.tau_inner;
    if (!(0.0 < inner && inner < outer)) throw std::invalid_argument("pl_check: need 0 < tau' < tau'' = truncation - window");
    row.tau_outer = outer;
    const auto right = stations_between(*mesh, outer, truncation);
    const auto left = stations_between(*mesh, -truncation, -outer);
    row.c = zero_constant_form(form) ? 0.0 : window_constant(f, {left, right});
    const auto a2 = optimal_cutoff(section_mass(f, row.c, right), outer, truncation, p);
    const auto a1 = optimal_cutoff(section_mass(f, row.c, left), -truncation, -outer, p);
    row.a = std::max(a1.a, a2.a);
    row.degenerate = a1.degenerate || a2.degenerate;
    double factor = 0.0;
    if (form == PlForm::star_ii) {
      auto st = grid_stations(*mesh, inner, outer, settings.rate_stations);
      std::vector<double> both;
      for (auto it = st.rbegin(); it != st.rend(); ++it) both.push_back(-*it);
      both.insert(both.end(), st.begin(), st.end());
      const auto rate = RateProfile::from_frequencies(
          frequency_profile(*mesh, p, FrequencyKind::third, both, settings.frequency), p);
      const double ip = rate.integrate(inner, outer), im = rate.integrate(-outer, -inner);
      row.rate_integral = std::min(ip, im);
      factor = std::max(std::exp(-k * ip), std::exp(-k * im));
    } else {
      const SectionDescriptor mid = cross_section(*mesh, 0.0);
      const FrequencyResult fr = form == PlForm::star_i ? second_frequency(mid, p, settings.frequency)
                                                        : first_frequency(mid, p, settings.frequency);
      row.rate_integral = std::pow(fr.value, 1.0 / p) * (outer - inner);
      factor = std::exp(-k * row.rate_integral);
    }
    row.rhs = c7_constant(p, family.op.nu1(), family.op.nu2()) * row.a * factor;
    row.lhs = energy(f, -inner, inner);
  } else {
    const double tau0 = settings.tau_inner;
    const double tau1 = truncation - settings.window;
    if (!(domain.alpha < tau0 && tau0 < tau1))
      throw std::invalid_argument("pl_check: need alpha < tau0 < tau' = truncation - window");
    row.tau_outer = tau1;
    const auto window = stations_between(*mesh, tau1, truncation);
    row.c = zero_constant_form(form) ? 0.0 : window_constant(f, {window});
    const auto a = optimal_cutoff(section_mass(f, row.c, window), tau1, truncation, p);
    row.a = a.a;
    row.degenerate = a.degenerate;
    const auto st = grid_stations(*mesh, tau0, tau1, std::max(settings.rate_stations, 2));
    const FrequencyKind kind = form == PlForm::eq7_12 ? FrequencyKind::second : FrequencyKind::third;
    const auto rate = RateProfile::from_frequencies(frequency_profile(*mesh, p, kind, st, settings.frequency), p);
    row.rate_integral = rate.integrate(tau0, tau1);
    row.rhs = c8_constant(p, family.op.nu1(), family.op.nu2()) * row.a * std::exp(-k * row.rate_integral);
    row.lhs = energy(f, domain.alpha, tau0);
  }
  if (row.rhs <= floor) {
    row.rhs = 0.0;
    row.degenerate = true;
  }
  return row;
}

}  // namespace

PlReport pl_check(const PlFamily& family, PlForm form, const PlSettings& settings) {
  if (settings.truncations.size() < 3) throw std::invalid_argument("pl_check: need at least three truncations");
  for (std::size_t i = 1; i < settings.truncations.size(); ++i)
    if (!(settings.truncations[i] > settings.truncations[i - 1]))
      throw std::invalid_argument("pl_check: truncations must increase");
  const bool radial = radial_form(form);
  if (radial != (family.domain.axial_kind == AxialKind::radial))
    throw std::invalid_argument("pl_check: form " + to_string(form) + " does not match the domain mode");
  if (form == PlForm::star_dirichlet && !family.domain.all_dirichlet_zero())
    throw std::invalid_argument("pl_check: starDirichlet needs a fully Dirichlet-zero lateral boundary");
  if ((form == PlForm::star_ii || form == PlForm::eq10_39) && !family.domain.has_dirichlet_zero())
    throw std::invalid_argument("pl_check: form " + to_string(form) + " needs a Dirichlet-zero lateral set");
  if ((form == PlForm::star_i || form == PlForm::eq7_12) && family.domain.has_dirichlet_zero())
    throw std::invalid_argument("pl_check: form " + to_string(form) + " needs a Neumann lateral boundary");

  std::vector<std::future<PlRow>> jobs;
  for (double t : settings.truncations)
    jobs.push_back(std::async(std::launch::async, run_truncation, std::cref(family), form, std::cref(settings), t));
  PlReport rep;
  rep.form = form;
  for (auto& j : jobs) rep.rows.push_back(j.get());

  std::vector<double> x, y, ly;
  bool all_zero = true;
  for (const auto& r : rep.rows) {
    x.push_back(r.tau_outer);
    y.push_back(r.rhs);
    ly.push_back(r.lhs);
    if (r.rhs > 0.0) all_zero = false;
  }
  std::size_t positive = 0;
  for (double v : y) positive += v > 0.0 ? 1 : 0;
  if (positive >= 2) rep.rhs_slope = fit_log_slope(x, y);
  std::size_t lpos = 0;
  for (double v : ly) lpos += v > 0.0 ? 1 : 0;
  if (lpos >= 2) rep.lhs_slope = fit_log_slope(x, ly);

  rep.forces_triviality = all_zero || (rep.rhs_slope && *rep.rhs_slope < 0.0);
  const bool to_zero = form == PlForm::star_ii || form == PlForm::eq10_39;
  rep.verdict = rep.forces_triviality
                    ? std::string("bound → 0: theorem forces triviality ") + (to_zero ? "(f ≡ 0)" : "(f ≡ const)")
                    : "bound not decaying: no conclusion";
  rep.note = "surrogate: the unbounded-domain limit is replaced by the fitted trend of log RHS over increasing truncations";
  return rep;
}

}  // namespace svp
