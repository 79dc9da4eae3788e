#include "svp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "svp/expression.hpp"

namespace svp {

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_any(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (seps.find(ch) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double number_or_throw(const std::string& text, int line, const std::string& key) {
  try {
    return evaluate_constant(text);
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what(), line);
  }
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true or false", line);
}

LateralCondition parse_lateral(const std::string& v, int line) {
  if (v == "neumann") return LateralCondition::neumann;
  if (v == "dirichlet_zero" || v == "dirichlet") return LateralCondition::dirichlet_zero;
  throw ConfigError("unknown lateral condition '" + v + "'", line);
}

const std::map<std::string, std::set<std::string>>& task_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"solve", {"name", "field_csv"}},
      {"frequencies", {"name", "kind", "stations"}},
      {"svp", {"name", "stations", "slope_window", "checks", "symmetric", "rate"}},
      {"zones", {"name", "norms", "s", "tau_outer", "c5", "c6"}},
      {"cutoff", {"name", "pairs", "constant"}},
      {"pl", {"name", "form", "truncations", "tau_inner", "window", "rate_stations"}},
      {"negative_control", {"name", "amplitude", "tau1", "tau2"}},
  };
  return keys;
}

struct Entry {
  std::string key;
  std::string value;
  int line;
};

struct Block {
  std::string name;
  std::string arg;
  int line;
  std::vector<Entry> entries;
};

void check_keys(const Block& b, const std::set<std::string>& allowed) {
  std::set<std::string> seen;
  for (const auto& e : b.entries) {
    if (!allowed.count(e.key)) throw ConfigError("unknown key '" + e.key + "' in [" + b.name + "]", e.line);
    if (!seen.insert(e.key).second) throw ConfigError("duplicate key '" + e.key + "'", e.line);
  }
}

void apply_domain(RunConfig& cfg, const Block& b) {
  std::set<std::string> allowed{"n", "k", "base", "axial_kind", "alpha", "beta", "lateral"};
  for (int i = 1; i <= 3; ++i) allowed.insert("lateral" + std::to_string(i));
  check_keys(b, allowed);
  CanonicalDomain& d = cfg.domain;
  std::optional<LateralCondition> all;
  std::map<int, std::pair<LateralCondition, LateralCondition>> per_axis;
  for (const auto& e : b.entries) {
    if (e.key == "n") d.n = static_cast<int>(number_or_throw(e.value, e.line, e.key));
    else if (e.key == "k") d.k = static_cast<int>(number_or_throw(e.value, e.line, e.key));
    else if (e.key == "alpha") d.alpha = number_or_throw(e.value, e.line, e.key);
    else if (e.key == "beta") d.beta = number_or_throw(e.value, e.line, e.key);
    else if (e.key == "base") {
      try {
        d.base = parse_list(e.value);
      } catch (const std::exception& ex) {
        throw ConfigError(std::string("bad base: ") + ex.what(), e.line);
      }
    } else if (e.key == "axial_kind") {
      if (e.value == "layer") d.axial_kind = AxialKind::layer;
      else if (e.value == "radial") d.axial_kind = AxialKind::radial;
      else throw ConfigError("axial_kind must be layer or radial", e.line);
    } else if (e.key == "lateral") {
      all = parse_lateral(e.value, e.line);
    } else {
      const auto parts = split_any(e.value, " \t,");
      if (parts.size() != 2) throw ConfigError("'" + e.key + "' expects two conditions (low high)", e.line);
      per_axis[e.key.back() - '0'] = {parse_lateral(parts[0], e.line), parse_lateral(parts[1], e.line)};
    }
  }
  d.lateral.assign(d.base.size(), LateralFaces{});
  for (auto& f : d.lateral)
    if (all) f = {*all, *all};
  for (const auto& [axis, faces] : per_axis) {
    if (axis < 1 || static_cast<std::size_t>(axis) > d.base.size())
      throw ConfigError("lateral" + std::to_string(axis) + " has no base axis", b.line);
    d.lateral[static_cast<std::size_t>(axis - 1)] = {faces.first, faces.second};
  }
  try {
    d.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("invalid domain: ") + ex.what(), b.line);
  }
}

void apply_operator(RunConfig& cfg, const Block& b) {
  check_keys(b, {"p", "nu1", "nu2", "coefficient", "value", "step_at", "omega"});
  double p = 2.0, nu1 = 1.0, nu2 = 1.0;
  Coefficient c;
  bool has_value = false;
  for (const auto& e : b.entries) {
    if (e.key == "p") p = number_or_throw(e.value, e.line, e.key);
    else if (e.key == "nu1") nu1 = number_or_throw(e.value, e.line, e.key);
    else if (e.key == "nu2") nu2 = number_or_throw(e.value, e.line, e.key);
    else if (e.key == "value") {
      c.value = number_or_throw(e.value, e.line, e.key);
      has_value = true;
    } else if (e.key == "step_at") c.step_at = number_or_throw(e.value, e.line, e.key);
    else if (e.key == "omega") c.omega = number_or_throw(e.value, e.line, e.key);
    else if (e.key == "coefficient") {
      if (e.value == "constant") c.kind = CoefficientKind::constant;
      else if (e.value == "axial_step") c.kind = CoefficientKind::axial_step;
      else if (e.value == "oscillation") c.kind = CoefficientKind::oscillation;
      else throw ConfigError("unknown coefficient '" + e.value + "'", e.line);
    }
  }
  if (c.kind == CoefficientKind::constant && !has_value) c.value = nu1;
  try {
    cfg.op = StructureOperator(p, nu1, nu2, c);
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("invalid operator: ") + ex.what(), b.line);
  }
}

void apply_bc(RunConfig& cfg, const Block& b) {
  check_keys(b, {"low", "high"});
  for (const auto& e : b.entries) {
    try {
      (void)Expression::parse(e.value);
    } catch (const std::exception& ex) {
      throw ConfigError("bad expression for '" + e.key + "': " + ex.what(), e.line);
    }
    (e.key == "low" ? cfg.low_text : cfg.high_text) = e.value;
  }
}

void apply_mesh(RunConfig& cfg, const Block& b) {
  check_keys(b, {"h", "refine"});
  for (const auto& e : b.entries) {
    if (e.key == "h") cfg.h = number_or_throw(e.value, e.line, e.key);
    else cfg.refine = parse_bool(e.value, e.line, e.key);
  }
  if (!(cfg.h > 0.0)) throw ConfigError("h must be positive", b.line);
}

void apply_solver(RunConfig& cfg, const Block& b) {
  check_keys(b, {"eps_reg_relative", "tol_energy", "max_outer", "theta", "linear_tol", "direct_limit", "seed"});
  SolverSettings& s = cfg.solver;
  for (const auto& e : b.entries) {
    const double v = number_or_throw(e.value, e.line, e.key);
    if (e.key == "eps_reg_relative") s.eps_reg_relative = v;
    else if (e.key == "tol_energy") s.tol_energy = v;
    else if (e.key == "max_outer") s.max_outer = static_cast<int>(v);
    else if (e.key == "theta") s.theta = v;
    else if (e.key == "linear_tol") s.linear_tol = v;
    else if (e.key == "direct_limit") s.direct_limit = static_cast<std::size_t>(v);
    else {
      if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("seed must be a non-negative integer", e.line);
      cfg.seed = static_cast<std::uint64_t>(v);
    }
  }
  try {
    s.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what(), b.line);
  }
}

void apply_output(RunConfig& cfg, const Block& b) {
  check_keys(b, {"directory", "formats"});
  for (const auto& e : b.entries) {
    if (e.key == "directory") cfg.output_directory = e.value;
    else {
      cfg.formats = split_any(e.value, " \t,");
      for (const auto& f : cfg.formats)
        if (f != "json" && f != "csv" && f != "svg") throw ConfigError("unknown format '" + f + "'", e.line);
    }
  }
}

void apply_task(RunConfig& cfg, const Block& b) {
  const auto& keys = task_keys();
  const auto it = keys.find(b.arg);
  if (it == keys.end()) throw ConfigError("unknown task kind '" + b.arg + "'", b.line);
  check_keys(b, it->second);
  TaskConfig t;
  t.kind = b.arg;
  t.line = b.line;
  for (const auto& e : b.entries) {
    if (e.key == "name") t.name = e.value;
    else t.entries.emplace_back(e.key, e.value);
  }
  // Validate numeric lists eagerly so errors carry line numbers.
  for (const auto& e : b.entries) {
    if (e.key == "name" || e.key == "kind" || e.key == "norms" || e.key == "form" || e.key == "rate" ||
        e.key == "constant" || e.key == "field_csv")
      continue;
    try {
      if (e.key == "checks" || e.key == "symmetric" || e.key == "pairs") {
        for (const auto& g : split_any(e.value, ";")) (void)parse_list(g);
      } else {
        (void)parse_list(e.value);
      }
    } catch (const std::exception& ex) {
      throw ConfigError("bad value for '" + e.key + "': " + ex.what(), e.line);
    }
  }
  if (t.name.empty()) t.name = t.kind;
  for (const auto& other : cfg.tasks)
    if (other.name == t.name) t.name += "_" + std::to_string(cfg.tasks.size());
  cfg.tasks.push_back(std::move(t));
}

}  // namespace

bool TaskConfig::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
}

std::string TaskConfig::text(const std::string& key, const std::string& fallback) const {
  for (const auto& e : entries)
    if (e.first == key) return e.second;
  return fallback;
}

double TaskConfig::number(const std::string& key, std::optional<double> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError("task '" + name + "' needs '" + key + "'", line);
  }
  return number_or_throw(text(key), line, key);
}

bool TaskConfig::flag(const std::string& key, bool fallback) const {
  return has(key) ? parse_bool(text(key), line, key) : fallback;
}

std::vector<double> TaskConfig::list(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  try {
    return parse_list(text(key));
  } catch (const std::exception& ex) {
    throw ConfigError("bad value for '" + key + "': " + ex.what(), line);
  }
}

std::vector<std::vector<double>> TaskConfig::groups(const std::string& key, std::size_t arity) const {
  std::vector<std::vector<double>> out;
  for (const auto& g : split_any(text(key), ";")) {
    auto v = parse_list(g);
    if (v.size() != arity)
      throw ConfigError("each group of '" + key + "' needs " + std::to_string(arity) + " values", line);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  const auto tokens = split_any(text, " \t,");
  if (tokens.size() == 5 && tokens[1] == "to" && tokens[3] == "step") {
    const double a = evaluate_constant(tokens[0]);
    const double b = evaluate_constant(tokens[2]);
    const double d = evaluate_constant(tokens[4]);
    if (!(d > 0.0) || b < a) throw std::invalid_argument("range needs a <= b and a positive step");
    const auto count = static_cast<long>(std::floor((b - a) / d + 1e-9));
    std::vector<double> out;
    for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * d);
    return out;
  }
  std::vector<double> out;
  for (const auto& t : tokens) out.push_back(evaluate_constant(t));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

BoundarySpec RunConfig::boundary() const {
  auto make = [](const std::string& text) -> CapFunction {
    auto expr = std::make_shared<Expression>(Expression::parse(text));
    return [expr](const Vec3& x) { return expr->evaluate(std::span<const double>(x.data(), x.size())); };
  };
  return BoundarySpec{make(low_text), make(high_text), low_text, high_text};
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool header = false;
  std::vector<Block> blocks;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (!header) {
      if (line != kConfigHeader) throw ConfigError(std::string("expected header '") + kConfigHeader + "'", line_no);
      header = true;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated block header", line_no);
      const auto parts = split_any(line.substr(1, line.size() - 2), " \t");
      if (parts.empty()) throw ConfigError("empty block header", line_no);
      Block b{parts[0], parts.size() > 1 ? parts[1] : "", line_no, {}};
      if (b.name == "task" ? parts.size() != 2 : parts.size() != 1)
        throw ConfigError("malformed block header", line_no);
      blocks.push_back(std::move(b));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    if (blocks.empty()) throw ConfigError("entry outside a block", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("empty key or value", line_no);
    blocks.back().entries.push_back({key, value, line_no});
  }
  if (!header) throw ConfigError(std::string("missing header '") + kConfigHeader + "'");

  RunConfig cfg;
  std::set<std::string> singletons;
  for (const auto& b : blocks)
    if (b.name != "task" && !singletons.insert(b.name).second)
      throw ConfigError("duplicate block [" + b.name + "]", b.line);
  if (!singletons.count("domain")) throw ConfigError("missing [domain] block");
  // Domain first: bc coordinates are validated against it.
  for (const auto& b : blocks)
    if (b.name == "domain") apply_domain(cfg, b);
  for (const auto& b : blocks) {
    std::vector<std::pair<std::string, std::string>> echo;
    for (const auto& e : b.entries) echo.emplace_back(e.key, e.value);
    cfg.echo.emplace_back(b.arg.empty() ? b.name : b.name + " " + b.arg, std::move(echo));
    if (b.name == "domain") continue;
    if (b.name == "operator") apply_operator(cfg, b);
    else if (b.name == "bc") apply_bc(cfg, b);
    else if (b.name == "mesh") apply_mesh(cfg, b);
    else if (b.name == "solver") apply_solver(cfg, b);
    else if (b.name == "output") apply_output(cfg, b);
    else if (b.name == "task") apply_task(cfg, b);
    else throw ConfigError("unknown block [" + b.name + "]", b.line);
  }
  const int dim = cfg.domain.mesh_dim();
  for (const auto* t : {&cfg.low_text, &cfg.high_text})
    if (Expression::parse(*t).max_coordinate() > dim)
      throw ConfigError("cap expression '" + *t + "' uses a coordinate beyond x" + std::to_string(dim));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace svp
