#include "svp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "svp/asymptotics.hpp"
#include "svp/energetics.hpp"
#include "svp/format.hpp"
#include "svp/frequency.hpp"
#include "svp/svg.hpp"
#include "svp/zones.hpp"

namespace svp {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json check_json(const InequalityCheck& c) {
  json d = json::object();
  for (const auto& [k, v] : c.details) d[k] = num(v);
  return {{"name", c.name},         {"lhs", num(c.lhs)},           {"rhs", num(c.rhs)},
          {"margin", num(c.margin)}, {"tol_disc", num(c.tol_disc)}, {"tol_round", num(c.tol_round)},
          {"pass", c.pass},          {"details", d}};
}

json frequency_json(double tau, const FrequencyResult& r, double p) {
  json j{{"tau", tau},
         {"kind", to_string(r.kind)},
         {"value", num(r.value)},
         {"rate", num(std::pow(std::max(r.value, 0.0), 1.0 / p))},
         {"residual", num(r.residual)},
         {"iterations", r.iterations},
         {"degenerate", r.degenerate}};
  if (r.c3) j["c3"] = num(*r.c3);
  if (!r.flag.empty()) j["flag"] = r.flag;
  return j;
}

struct Csv {
  std::ostringstream out;
  Csv(std::initializer_list<std::string> comments, const std::string& header) {
    for (const auto& c : comments) out << "# " << c << "\n";
    out << header << "\n";
  }
  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      out << (first ? "" : ",") << c;
      first = false;
    }
    out << "\n";
  }
};

std::string fd(double v) { return format_double(v); }

// Everything produced by one pass over the tasks at one resolution.
struct Pass {
  const RunConfig& cfg;
  double h;
  std::uint64_t seed;
  const RunOptions& options;

  std::shared_ptr<const Mesh> mesh;
  std::optional<ScalarField> field;

  std::vector<InequalityCheck> checks;
  json tasks = json::array();
  std::map<std::string, std::string> files;
  bool nonconverged = false;
  int zone_failures = 0;

  Pass(const RunConfig& c, double h_, std::uint64_t s, const RunOptions& o) : cfg(c), h(h_), seed(s), options(o) {}

  FrequencySettings freq_settings() const {
    FrequencySettings fs;
    fs.seed = seed;
    return fs;
  }

  const Mesh& get_mesh() {
    if (!mesh) mesh = std::make_shared<const Mesh>(build_mesh(cfg.domain, h));
    return *mesh;
  }

  const ScalarField& get_field() {
    if (!field) {
      get_mesh();
      field = solve(mesh, cfg.op, cfg.boundary(), cfg.solver);
      if (!field->diagnostics.converged) nonconverged = true;
    }
    return *field;
  }

  bool layer() const { return cfg.domain.axial_kind == AxialKind::layer; }
  FrequencyKind rate_kind(const std::string& choice) const {
    if (choice == "mu") return FrequencyKind::second;
    if (choice == "lambda") return FrequencyKind::third;
    if (choice != "auto") throw ConfigError("rate must be auto, mu or lambda");
    return cfg.domain.has_dirichlet_zero() ? FrequencyKind::third : FrequencyKind::second;
  }

  FrequencyResult section_frequency(double tau, FrequencyKind kind) {
    const SectionDescriptor sec = cross_section(get_mesh(), tau);
    const double p = cfg.op.p();
    switch (kind) {
      case FrequencyKind::first: return first_frequency(sec, p, freq_settings());
      case FrequencyKind::second: return second_frequency(sec, p, freq_settings());
      case FrequencyKind::third: return third_frequency(sec, p, freq_settings());
    }
    return second_frequency(sec, p, freq_settings());
  }

  // Layer sections are congruent, so one midline solve gives the profile.
  RateProfile rate(FrequencyKind kind, std::span<const double> stations, json* info) {
    const double p = cfg.op.p();
    if (layer()) {
      const FrequencyResult r = section_frequency(0.0, kind);
      if (info) *info = frequency_json(0.0, r, p);
      return RateProfile::constant(std::pow(r.value, 1.0 / p));
    }
    const auto prof = frequency_profile(get_mesh(), p, kind, stations, freq_settings());
    if (info) {
      *info = json::array();
      for (const auto& s : prof) info->push_back(frequency_json(s.tau, s.result, p));
    }
    return RateProfile::from_frequencies(prof, p);
  }

  std::vector<double> default_stations() {
    const Mesh& m = get_mesh();
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.25 / m.axial_spacing())));
    std::vector<double> out;
    for (std::size_t line = 0; line < m.axial_lines(); line += stride) out.push_back(m.axial_coordinate(line));
    if (out.back() != m.axial_coordinate(m.axial_lines() - 1)) out.push_back(m.axial_coordinate(m.axial_lines() - 1));
    return out;
  }

  std::vector<double> aligned(const std::vector<double>& stations) {
    const Mesh& m = get_mesh();
    std::vector<double> out;
    for (double s : stations) {
      std::size_t line;
      try {
        line = m.aligned_line(s);
      } catch (const std::exception&) {
        throw ConfigError("station " + fd(s) + " is not a grid line at h = " + fd(h));
      }
      out.push_back(m.axial_coordinate(line));
    }
    return out;
  }

  int add_check(InequalityCheck c) {
    checks.push_back(std::move(c));
    return static_cast<int>(checks.size() - 1);
  }

  void run_task(const TaskConfig& t);
  void task_solve(const TaskConfig& t, json& j);
  void task_frequencies(const TaskConfig& t, json& j);
  void task_svp(const TaskConfig& t, json& j);
  void task_zones(const TaskConfig& t, json& j);
  void task_cutoff(const TaskConfig& t, json& j);
  void task_pl(const TaskConfig& t, json& j);
  void task_negative_control(const TaskConfig& t, json& j);
};

void Pass::run_task(const TaskConfig& t) {
  json j{{"kind", t.kind}, {"name", t.name}};
  if (t.kind == "solve") task_solve(t, j);
  else if (t.kind == "frequencies") task_frequencies(t, j);
  else if (t.kind == "svp") task_svp(t, j);
  else if (t.kind == "zones") task_zones(t, j);
  else if (t.kind == "cutoff") task_cutoff(t, j);
  else if (t.kind == "pl") task_pl(t, j);
  else if (t.kind == "negative_control") task_negative_control(t, j);
  tasks.push_back(std::move(j));
}

void Pass::task_solve(const TaskConfig& t, json& j) {
  const ScalarField& f = get_field();
  j["nodes"] = f.mesh().node_count();
  j["energy"] = num(f.diagnostics.final_energy);
  if (t.flag("field_csv", false) && cfg.wants("csv")) files[t.name + "_field.csv"] = field_csv(f);
}

void Pass::task_frequencies(const TaskConfig& t, json& j) {
  const std::string which = t.text("kind", "all");
  std::vector<FrequencyKind> kinds;
  if (which == "all") {
    kinds = {FrequencyKind::first, FrequencyKind::second};
    if (cfg.domain.has_dirichlet_zero()) kinds.push_back(FrequencyKind::third);
  } else if (which == "first") kinds = {FrequencyKind::first};
  else if (which == "second") kinds = {FrequencyKind::second};
  else if (which == "third") kinds = {FrequencyKind::third};
  else throw ConfigError("frequency kind must be first, second, third or all", t.line);
  const std::vector<double> fallback{layer() ? 0.0 : cfg.domain.center()};
  const auto stations = aligned(t.list("stations", fallback));
  const double p = cfg.op.p();
  j["results"] = json::object();
  for (FrequencyKind kind : kinds) {
    const auto prof = frequency_profile(get_mesh(), p, kind, stations, freq_settings());
    json arr = json::array();
    Csv csv({"frequency kind " + to_string(kind) + ", p = " + fd(p), "value: quotient infimum on the section",
             "residual: relative Euler-Lagrange residual; iterations: descent steps"},
            "tau,value,residual,iterations");
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : prof) {
      arr.push_back(frequency_json(s.tau, s.result, p));
      csv.row({fd(s.tau), fd(s.result.value), fd(s.result.residual), std::to_string(s.result.iterations)});
      lo = std::min(lo, s.result.value);
      hi = std::max(hi, s.result.value);
    }
    json entry{{"stations", arr}};
    if (prof.size() > 1) entry["relative_spread"] = num(hi > 0.0 ? (hi - lo) / hi : 0.0);
    j["results"][to_string(kind)] = entry;
    if (cfg.wants("csv")) files[t.name + "_" + to_string(kind) + ".csv"] = csv.out.str();
  }
}

void Pass::task_svp(const TaskConfig& t, json& j) {
  const ScalarField& f = get_field();
  const Mesh& m = f.mesh();
  const auto stations = t.has("stations") ? aligned(t.list("stations")) : default_stations();
  std::optional<std::pair<double, double>> window;
  if (t.has("slope_window")) {
    const auto w = t.list("slope_window");
    if (w.size() != 2) throw ConfigError("slope_window needs two values", t.line);
    window = std::make_pair(w[0], w[1]);
  }
  const double t0 = m.axial_coordinate(0);
  const EnergyProfile prof = energy_profile(f, t0, stations, window);
  const FrequencyKind kind = rate_kind(t.text("rate", "auto"));
  json rate_info;
  const RateProfile rate_profile = rate(kind, stations, &rate_info);
  const double p = cfg.op.p();
  const double k = cfg.op.nu1() / cfg.op.nu2();

  // Per-station frequency columns.
  std::vector<double> mu(stations.size(), kNaN), lambda(stations.size(), kNaN);
  const bool has_lambda = cfg.domain.has_dirichlet_zero();
  if (layer()) {
    const double mv = section_frequency(0.0, FrequencyKind::second).value;
    const double lv = has_lambda ? section_frequency(0.0, FrequencyKind::third).value : kNaN;
    std::fill(mu.begin(), mu.end(), mv);
    std::fill(lambda.begin(), lambda.end(), lv);
  } else {
    for (std::size_t i = 0; i < stations.size(); ++i) {
      mu[i] = section_frequency(stations[i], FrequencyKind::second).value;
      if (has_lambda) lambda[i] = section_frequency(stations[i], FrequencyKind::third).value;
    }
  }

  j["t"] = t0;
  j["rate_kind"] = to_string(kind);
  j["rate_source"] = rate_info;
  json table = json::array();
  Csv csv({"energy profile of the solved field, t = " + fd(t0) + ", p = " + fd(p),
           "I: energy of the slab from t to tau; sectionEnergy: section integral of |grad f|^p",
           "dIdtau: central difference of layer energies; C1: |f - C| |A| on the section with C optimal there",
           "C2: flux with weight f; mu, lambda: second and third frequencies of the section (nan if undefined)"},
          "tau,I,sectionEnergy,dIdtau,C1,C2,mu,lambda");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    table.push_back({{"tau", stations[i]},
                     {"I", num(prof.I[i])},
                     {"I2", num(prof.I2[i])},
                     {"sectionEnergy", num(prof.section_energy[i])},
                     {"dIdtau", num(prof.dIdtau[i])},
                     {"C1", num(prof.C1[i])},
                     {"C2", num(prof.C2[i])},
                     {"C2tilde", num(prof.C2tilde[i])},
                     {"mu", num(mu[i])},
                     {"lambda", num(lambda[i])}});
    csv.row({fd(stations[i]), fd(prof.I[i]), fd(prof.section_energy[i]), fd(prof.dIdtau[i]), fd(prof.C1[i]),
             fd(prof.C2[i]), fd(mu[i]), fd(lambda[i])});
  }
  j["profile"] = table;
  if (prof.slope) {
    j["slope"] = num(*prof.slope);
    j["slope_r2"] = num(prof.slope_r2);
    j["slope_flagged"] = prof.slope_flagged;
  }

  json ids = json::array();
  if (t.has("checks"))
    for (const auto& g : t.groups("checks", 3)) {
      const InequalityCheck c = cfg.domain.has_dirichlet_zero() ? svp_check_dirichlet(f, rate_profile, g[0], g[1], g[2])
                                                                : svp_check_neumann(f, rate_profile, g[0], g[1], g[2]);
      ids.push_back(add_check(c));
    }
  if (t.has("symmetric"))
    for (const auto& g : t.groups("symmetric", 2)) ids.push_back(add_check(svp_symmetric_check(f, rate_profile, g[0], g[1])));
  j["checks"] = ids;

  if (cfg.wants("csv")) files[t.name + ".csv"] = csv.out.str();
  if (cfg.wants("svg")) {
    PlotSeries measured{layer() ? "I2(-tau, tau)" : "I(t, tau)", {}, {}, false};
    PlotSeries bound{"decay envelope", {}, {}, true};
    const std::size_t last = stations.size() - 1;
    const double outer = layer() ? prof.I2[last] : prof.I[last];
    for (std::size_t i = 0; i < stations.size(); ++i) {
      const double s = stations[i];
      if (layer() && s <= 0.0) continue;
      measured.x.push_back(s);
      measured.y.push_back(layer() ? prof.I2[i] : prof.I[i]);
      bound.x.push_back(s);
      bound.y.push_back(outer * std::exp(-k * rate_profile.integrate(s, stations[last])));
    }
    files[t.name + "_energy.svg"] = semilog_svg("slab energy and decay envelope", "tau", "energy", {measured, bound});
  }
}

void Pass::task_zones(const TaskConfig& t, json& j) {
  if (!layer()) throw ConfigError("zones task needs a layer-mode domain", t.line);
  const ScalarField& f = get_field();
  std::vector<NormKind> norms;
  const std::string which = t.text("norms", "W1p Lp sup");
  std::istringstream ns(which);
  for (std::string w; ns >> w;) {
    if (w == "W1p") norms.push_back(NormKind::w1p);
    else if (w == "Lp") norms.push_back(NormKind::lp);
    else if (w == "sup") norms.push_back(NormKind::sup);
    else throw ConfigError("unknown norm '" + w + "'", t.line);
  }
  auto s_values = t.list("s");
  if (s_values.empty()) throw ConfigError("zones task needs 's'", t.line);
  std::sort(s_values.begin(), s_values.end());
  std::optional<ZonePredictor> pred;
  if (t.has("tau_outer")) {
    ZonePredictor zp;
    zp.tau_outer = aligned({t.number("tau_outer")}).front();
    json info;
    zp.rate = rate(rate_kind("auto"), std::vector<double>{0.0}, &info);
    j["rate_source"] = info;
    if (t.has("c5")) zp.c5 = t.number("c5");
    if (t.has("c6")) zp.c6 = t.number("c6");
    pred = zp;
  }
  Csv csv({"stagnation zones: measured half-width and bound-inversion prediction",
           "predicted_station is the prediction snapped down to a grid station; empty cells are not available"},
          "norm,s,measured,deviation,best_constant,predicted,predicted_station,predicted_corrected");
  json reports = json::array();
  json monotone = json::object();
  for (NormKind norm : norms) {
    double prev = -INFINITY;
    bool mono = true;
    for (double s : s_values) {
      const ZoneReport r = zone(norm, f, s, pred);
      if (r.measured < prev) mono = false;
      prev = r.measured;
      bool sound = true;
      if (r.predicted_station && norm != NormKind::sup) sound = *r.predicted_station <= r.measured + 1e-12;
      if (!sound) ++zone_failures;
      auto opt = [](const std::optional<double>& v) { return v ? num(*v) : json(nullptr); };
      json rj{{"norm", to_string(norm)},   {"s", s},
              {"s_root", num(r.s_root)},   {"s_power", num(r.s_power)},
              {"measured", r.measured},    {"full_band", r.full_band},
              {"deviation", num(r.deviation)}, {"best_constant", opt(r.best_constant)},
              {"predicted", opt(r.predicted)}, {"predicted_station", opt(r.predicted_station)},
              {"predicted_corrected", opt(r.predicted_corrected)}, {"c5", opt(r.c5)},
              {"c6", opt(r.c6)},           {"verdict", r.verdict}};
      if (r.predicted_station && norm != NormKind::sup) rj["sound"] = sound;
      reports.push_back(rj);
      auto cell = [](const std::optional<double>& v) { return v ? fd(*v) : std::string(); };
      csv.row({to_string(norm), fd(s), fd(r.measured), fd(r.deviation), cell(r.best_constant), cell(r.predicted),
               cell(r.predicted_station), cell(r.predicted_corrected)});
    }
    monotone[to_string(norm)] = mono;
  }
  j["reports"] = reports;
  j["monotone_in_s"] = monotone;
  if (cfg.wants("csv")) files[t.name + ".csv"] = csv.out.str();
}

void Pass::task_cutoff(const TaskConfig& t, json& j) {
  if (!layer()) throw ConfigError("cutoff task needs a layer-mode domain", t.line);
  const ScalarField& f = get_field();
  const std::string mode = t.text("constant", cfg.domain.has_dirichlet_zero() ? "zero" : "auto");
  double c = 0.0;
  if (mode == "auto") c = section_optimal_constant(f, 0.0);
  else if (mode != "zero") c = t.number("constant");
  if (cfg.domain.has_dirichlet_zero() && c != 0.0)
    throw ConfigError("cutoff with a Dirichlet-zero lateral set needs constant = zero", t.line);
  json ids = json::array();
  json results = json::array();
  for (const auto& g : t.groups("pairs", 2)) {
    const CutoffBoundResult r = cutoff_bound(f, c, g[0], g[1]);
    const int id = add_check(r.check);
    ids.push_back(id);
    results.push_back({{"tau1", r.tau1}, {"tau2", r.tau2}, {"C", r.c},        {"A1", num(r.a1)},
                       {"A2", num(r.a2)}, {"C7", r.c7},     {"degenerate", r.degenerate}, {"check", id}});
  }
  j["bounds"] = results;
  j["checks"] = ids;
}

void Pass::task_pl(const TaskConfig& t, json& j) {
  PlFamily fam;
  fam.domain = cfg.domain;
  fam.op = cfg.op;
  fam.bc = cfg.boundary();
  fam.solver = cfg.solver;
  fam.h = h;
  PlForm form;
  if (t.has("form")) {
    try {
      form = pl_form_from_string(t.text("form"));
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), t.line);
    }
  } else if (!layer()) {
    form = cfg.domain.has_dirichlet_zero() ? PlForm::eq10_39 : PlForm::eq7_12;
  } else {
    form = cfg.domain.all_dirichlet_zero() ? PlForm::star_dirichlet
           : cfg.domain.has_dirichlet_zero() ? PlForm::star_ii
                                              : PlForm::star_i;
  }
  PlSettings ps;
  ps.truncations = t.list("truncations");
  ps.tau_inner = t.number("tau_inner", 0.5);
  ps.window = t.number("window", 1.0);
  ps.rate_stations = static_cast<int>(t.number("rate_stations", 5));
  ps.frequency = freq_settings();
  const PlReport rep = pl_check(fam, form, ps);
  json rows = json::array();
  Csv csv({"truncated-family trend for form " + to_string(form),
           "rhs: bound evaluated at tau_outer; lhs: measured inner energy; rhs_slope: fitted slope of log rhs"},
          "truncation,tau_outer,rhs,lhs,rhs_slope");
  const double slope = rep.rhs_slope.value_or(kNaN);
  PlotSeries rhs{"bound (rhs)", {}, {}, false}, lhs{"inner energy (lhs)", {}, {}, true};
  for (const auto& r : rep.rows) {
    if (!r.converged) nonconverged = true;
    rows.push_back({{"truncation", r.truncation},
                    {"tau_outer", r.tau_outer},
                    {"rhs", num(r.rhs)},
                    {"lhs", num(r.lhs)},
                    {"A", num(r.a)},
                    {"rate_integral", num(r.rate_integral)},
                    {"C", num(r.c)},
                    {"degenerate", r.degenerate},
                    {"outer_iterations", r.outer_iterations},
                    {"converged", r.converged}});
    csv.row({fd(r.truncation), fd(r.tau_outer), fd(r.rhs), fd(r.lhs), fd(slope)});
    rhs.x.push_back(r.tau_outer);
    rhs.y.push_back(r.rhs);
    lhs.x.push_back(r.tau_outer);
    lhs.y.push_back(r.lhs);
  }
  j["form"] = to_string(form);
  j["rows"] = rows;
  j["rhs_slope"] = rep.rhs_slope ? num(*rep.rhs_slope) : json(nullptr);
  j["lhs_slope"] = rep.lhs_slope ? num(*rep.lhs_slope) : json(nullptr);
  j["forces_triviality"] = rep.forces_triviality;
  j["verdict"] = rep.verdict;
  j["note"] = rep.note;
  if (cfg.wants("csv")) files[t.name + ".csv"] = csv.out.str();
  if (cfg.wants("svg")) files[t.name + ".svg"] = semilog_svg("bound trend over truncations", "tau''", "value", {rhs, lhs});
}

void Pass::task_negative_control(const TaskConfig& t, json& j) {
  if (!layer()) throw ConfigError("negative_control task needs a layer-mode domain", t.line);
  const ScalarField& f = get_field();
  const double amplitude = t.number("amplitude", 1.0);
  const double tau1 = t.number("tau1"), tau2 = t.number("tau2");
  ScalarField noisy = f;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto mask = dirichlet_mask(f.mesh());
  for (std::size_t i = 0; i < noisy.values().size(); ++i)
    if (!mask[i]) noisy.values()[i] += amplitude * h * u(rng);
  const RateProfile r = rate(rate_kind("auto"), std::vector<double>{0.0}, nullptr);
  InequalityCheck c = svp_symmetric_check(noisy, r, tau1, tau2);
  c.name = "negative_control";
  j["amplitude"] = amplitude;
  j["expected"] = "violation";
  j["checks"] = json::array({add_check(c)});
}

Pass execute(const RunConfig& cfg, double h, std::uint64_t seed, const RunOptions& options,
             const std::set<std::string>& kinds) {
  Pass pass(cfg, h, seed, options);
  for (const auto& t : cfg.tasks) {
    if (!kinds.empty() && !kinds.count(t.kind)) continue;
    pass.run_task(t);
  }
  return pass;
}

void substitute_checks(json& node, const std::vector<InequalityCheck>& checks) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      if ((it.key() == "checks" || it.key() == "check")) {
        if (it.value().is_array()) {
          json arr = json::array();
          for (const auto& id : it.value()) arr.push_back(check_json(checks[id.get<std::size_t>()]));
          it.value() = arr;
          continue;
        }
        if (it.value().is_number_integer()) {
          it.value() = check_json(checks[it.value().get<std::size_t>()]);
          continue;
        }
      }
      substitute_checks(it.value(), checks);
    }
  } else if (node.is_array()) {
    for (auto& v : node) substitute_checks(v, checks);
  }
}

json solver_json(const SolverSettings& s) {
  return {{"eps_reg_relative", s.eps_reg_relative}, {"tol_energy", s.tol_energy}, {"max_outer", s.max_outer},
          {"theta", s.theta},                       {"linear_tol", s.linear_tol}, {"direct_limit", s.direct_limit}};
}

json diagnostics_json(const SolverDiagnostics& d) {
  return {{"outer_iterations", d.outer_iterations},
          {"final_energy", num(d.final_energy)},
          {"eps_reg", num(d.eps_reg)},
          {"converged", d.converged},
          {"linear_solver", d.linear_solver}};
}

void write_files(RunOutcome& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out.directory, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out.directory + "': " + ec.message());
  for (const auto& [name, content] : out.files) {
    std::ofstream f(fs::path(out.directory) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + name + "' in '" + out.directory + "'");
    f << content;
    if (!f) throw std::runtime_error("write failed for '" + name + "'");
  }
}

}  // namespace

std::string resolve_output_directory(const RunConfig& cfg, const RunOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (!cfg.output_directory.empty()) return cfg.output_directory;
  if (const char* env = std::getenv("SVP_LAB_OUT"); env && *env) return env;
  return "svp-lab-out";
}

RunOutcome run(const RunConfig& cfg, const RunOptions& options) {
  RunOutcome out;
  const std::uint64_t seed = options.seed.value_or(cfg.seed);
  const bool refine = options.refine || cfg.refine;
  out.directory = resolve_output_directory(cfg, options);

  json report;
  report["schema"] = "svp-lab-report 1";
  json echo = json::object();
  for (const auto& [block, entries] : cfg.echo) {
    json e = json::object();
    for (const auto& [k, v] : entries) e[k] = v;
    echo[block] = e;
  }
  report["config"] = echo;

  try {
    Pass coarse = execute(cfg, cfg.h, seed, options, options.only_kinds);
    json provenance{{"h", cfg.h}, {"seed", seed}, {"refine", refine}, {"solver", solver_json(cfg.solver)}};
    if (coarse.mesh) {
      json spacing = json::array();
      for (double w : coarse.mesh->actual_spacing()) spacing.push_back(w);
      provenance["h_actual"] = spacing;
    }
    if (coarse.field) provenance["eps_reg"] = num(coarse.field->diagnostics.eps_reg);
    provenance["tolerances"] = {{"tol_disc", refine ? "2 x |margin(h) - margin(h/2)|, floored" : "roundoff floor only"},
                                {"frequency_tol", FrequencySettings{}.tol}};

    bool nonconverged = coarse.nonconverged;
    if (refine && !coarse.checks.empty()) {
      std::set<std::string> kinds{"svp", "cutoff", "negative_control"};
      if (!options.only_kinds.empty()) {
        std::set<std::string> keep;
        for (const auto& k : kinds)
          if (options.only_kinds.count(k)) keep.insert(k);
        kinds = keep;
      }
      RunOptions fine_opts = options;
      Pass fine = execute(cfg, 0.5 * cfg.h, seed, fine_opts, kinds);
      nonconverged = nonconverged || fine.nonconverged;
      if (fine.checks.size() != coarse.checks.size())
        throw std::logic_error("refinement produced a different check set");
      for (std::size_t i = 0; i < coarse.checks.size(); ++i) calibrate(coarse.checks[i], fine.checks[i]);
      provenance["h_fine"] = 0.5 * cfg.h;
      if (fine.field) provenance["fine_solve"] = diagnostics_json(fine.field->diagnostics);
    }
    report["provenance"] = provenance;
    if (coarse.field) report["solve"] = diagnostics_json(coarse.field->diagnostics);
    substitute_checks(coarse.tasks, coarse.checks);
    report["tasks"] = coarse.tasks;

    int failed = 0;
    for (const auto& c : coarse.checks) failed += c.pass ? 0 : 1;
    if (nonconverged) out.exit_code = kExitNonConvergence;
    else if (failed > 0 || coarse.zone_failures > 0) out.exit_code = kExitCheckFailed;
    else out.exit_code = kExitOk;
    report["summary"] = {{"checks", coarse.checks.size()},
                         {"checks_failed", failed},
                         {"zone_soundness_failures", coarse.zone_failures},
                         {"nonconverged", nonconverged},
                         {"exit_code", out.exit_code}};
    out.files = std::move(coarse.files);
    if (out.exit_code == kExitNonConvergence) out.message = "solver did not converge";
    else if (out.exit_code == kExitCheckFailed)
      out.message = std::to_string(failed) + " check(s) violated, " + std::to_string(coarse.zone_failures) +
                    " zone prediction(s) unsound";
    else out.message = "all checks passed";
  } catch (const ConfigError& e) {
    out.exit_code = kExitConfigError;
    out.message = e.what();
  } catch (const std::invalid_argument& e) {
    out.exit_code = kExitConfigError;
    out.message = e.what();
  } catch (const std::out_of_range& e) {
    out.exit_code = kExitConfigError;
    out.message = e.what();
  }
  if (out.exit_code == kExitConfigError) report["error"] = out.message;
  out.report = report;
  if (cfg.wants("json") || out.exit_code == kExitConfigError) out.files["report.json"] = report.dump(2) + "\n";
  if (options.write_files) {
    try {
      write_files(out);
    } catch (const std::exception& e) {
      out.exit_code = kExitConfigError;
      out.message = e.what();
    }
  }
  return out;
}

RunOutcome run_file(const std::string& path, const RunOptions& options) {
  RunConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const std::exception& e) {
    RunOutcome out;
    out.exit_code = kExitConfigError;
    out.message = e.what();
    return out;
  }
  return run(cfg, options);
}

RunOutcome run_structure(const std::optional<std::string>& config_path, std::size_t samples, std::uint64_t seed,
                         const RunOptions& options) {
  RunOutcome out;
  RunConfig cfg;
  if (config_path) {
    try {
      cfg = load_config(*config_path);
    } catch (const std::exception& e) {
      out.exit_code = kExitConfigError;
      out.message = e.what();
      return out;
    }
  }
  const StructureReport r = check_structure(cfg.op, samples, seed);
  json report{{"schema", "svp-lab-report 1"},
              {"task", "check-structure"},
              {"operator", {{"p", cfg.op.p()}, {"nu1", cfg.op.nu1()}, {"nu2", cfg.op.nu2()},
                            {"coefficient", to_string(cfg.op.coefficient().kind)}}},
              {"samples", r.samples},
              {"seed", seed},
              {"worst_lower_ellipticity", num(r.worst_lower_ellipticity)},
              {"worst_upper_ellipticity", num(r.worst_upper_ellipticity)},
              {"worst_homogeneity", num(r.worst_homogeneity)},
              {"worst_potential_gradient", num(r.worst_potential_gradient)},
              {"worst_monotonicity", num(r.worst_monotonicity)},
              {"pass", r.pass}};
  out.exit_code = r.pass ? kExitOk : kExitCheckFailed;
  out.message = r.pass ? "structure conditions hold on all samples" : "structure conditions violated";
  out.report = report;
  out.directory = resolve_output_directory(cfg, options);
  out.files["structure.json"] = report.dump(2) + "\n";
  if (options.write_files) {
    try {
      write_files(out);
    } catch (const std::exception& e) {
      out.exit_code = kExitConfigError;
      out.message = e.what();
    }
  }
  return out;
}

}  // namespace svp
