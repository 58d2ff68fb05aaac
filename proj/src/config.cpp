#include "hyperboloidal/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hyperboloidal/errors.hpp"
#include "hyperboloidal/verify.hpp"

namespace hyp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct LineError {
  std::string what;
};

bool bare_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

// Reads a basic string starting at s[pos] == '"'; leaves pos after the closing quote.
std::string read_string(const std::string& s, std::size_t& pos) {
  std::string out;
  ++pos;
  while (pos < s.size()) {
    const char c = s[pos++];
    if (c == '"') return out;
    if (c == '\\') {
      if (pos >= s.size()) break;
      const char e = s[pos++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: throw LineError{std::string("unsupported escape \\") + e};
      }
      continue;
    }
    out += c;
  }
  throw LineError{"unterminated string"};
}

double read_number(const std::string& token) {
  if (token.empty()) throw LineError{"missing value"};
  std::string t = token;
  if (t[0] == '+') t.erase(0, 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw LineError{"invalid value '" + token + "'"};
  return v;
}

// Strips a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (in_string && s[i] == '\\') { ++i; continue; }
    if (s[i] == '"') in_string = !in_string;
    if (!in_string && s[i] == '#') return s.substr(0, i);
  }
  return s;
}

ConfigValue parse_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw LineError{"missing value"};
  if (v[0] == '"') {
    std::size_t pos = 0;
    std::string out = read_string(v, pos);
    if (!trim(v.substr(pos)).empty()) throw LineError{"trailing characters after string"};
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v[0] == '[') {
    if (v.back() != ']') throw LineError{"arrays must close on the same line"};
    const std::string body = trim(v.substr(1, v.size() - 2));
    std::vector<double> numbers;
    std::vector<std::string> strings;
    std::size_t pos = 0;
    while (pos < body.size()) {
      while (pos < body.size() && (body[pos] == ' ' || body[pos] == '\t')) ++pos;
      if (pos >= body.size()) break;
      if (body[pos] == '"') {
        strings.push_back(read_string(body, pos));
      } else {
        const auto end = body.find(',', pos);
        numbers.push_back(read_number(trim(body.substr(pos, end == std::string::npos ? end : end - pos))));
        pos = end == std::string::npos ? body.size() : end;
      }
      while (pos < body.size() && (body[pos] == ' ' || body[pos] == '\t')) ++pos;
      if (pos < body.size()) {
        if (body[pos] != ',') throw LineError{"expected ',' in array"};
        ++pos;
      }
    }
    if (!numbers.empty() && !strings.empty()) throw LineError{"mixed array element types"};
    if (!strings.empty()) return strings;
    return numbers;
  }
  return read_number(v);
}

// Typed access with key bookkeeping: every key of the table must be consumed.
class Reader {
 public:
  explicit Reader(const ConfigTable& t) : table_(t) {}

  template <class F>
  void section(const std::string& name, F&& body) {
    auto it = table_.find(name);
    if (it == table_.end()) return;
    current_ = &it->second;
    name_ = name;
    consumed_.clear();
    body();
    for (const auto& [k, v] : it->second)
      if (!consumed_.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name + "]");
    sections_.insert(name);
  }

  void done() const {
    for (const auto& [s, keys] : table_)
      if (!sections_.count(s)) throw ConfigError(s.empty() ? "keys outside any section" : "unknown section [" + s + "]");
  }

  void str(const std::string& key, std::string& out) {
    if (const ConfigValue* v = find(key)) {
      if (!std::holds_alternative<std::string>(*v)) type_error(key, "a string");
      out = std::get<std::string>(*v);
    }
  }
  void num(const std::string& key, double& out) {
    if (const ConfigValue* v = find(key)) {
      if (!std::holds_alternative<double>(*v)) type_error(key, "a number");
      out = std::get<double>(*v);
    }
  }
  void integer(const std::string& key, int& out) {
    double d = out;
    num(key, d);
    if (d != std::floor(d) || std::abs(d) > 1e9) type_error(key, "an integer");
    out = static_cast<int>(d);
  }
  void boolean(const std::string& key, bool& out) {
    if (const ConfigValue* v = find(key)) {
      if (!std::holds_alternative<bool>(*v)) type_error(key, "a boolean");
      out = std::get<bool>(*v);
    }
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const ConfigValue* v = find(key)) {
      if (!std::holds_alternative<std::vector<double>>(*v)) type_error(key, "an array of numbers");
      out = std::get<std::vector<double>>(*v);
    }
  }
  void integers(const std::string& key, std::vector<int>& out) {
    std::vector<double> d;
    bool present = find(key) != nullptr;
    numbers(key, d);
    if (!present) return;
    out.clear();
    for (double x : d) {
      if (x != std::floor(x) || std::abs(x) > 1e9) type_error(key, "an array of integers");
      out.push_back(static_cast<int>(x));
    }
  }
  void strings(const std::string& key, std::vector<std::string>& out) {
    if (const ConfigValue* v = find(key)) {
      if (std::holds_alternative<std::vector<double>>(*v) && std::get<std::vector<double>>(*v).empty()) {
        out.clear();
        return;
      }
      if (!std::holds_alternative<std::vector<std::string>>(*v)) type_error(key, "an array of strings");
      out = std::get<std::vector<std::string>>(*v);
    }
  }

 private:
  const ConfigValue* find(const std::string& key) {
    consumed_.insert(key);
    auto it = current_->find(key);
    return it == current_->end() ? nullptr : &it->second;
  }
  [[noreturn]] void type_error(const std::string& key, const std::string& what) const {
    throw ConfigError("[" + name_ + "] " + key + " must be " + what);
  }

  const ConfigTable& table_;
  const std::map<std::string, ConfigValue>* current_ = nullptr;
  std::string name_;
  std::set<std::string> consumed_;
  std::set<std::string> sections_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string to_string(GridMode m) { return m == GridMode::radial1d ? "radial1d" : "ball3d"; }

GridMode parse_grid_mode(const std::string& s) {
  if (s == "radial1d") return GridMode::radial1d;
  if (s == "ball3d") return GridMode::ball3d;
  throw ConfigError("unknown grid mode '" + s + "'");
}

ConfigTable parse_toml(const std::string& text) {
  ConfigTable table;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    try {
      const std::string s = trim(strip_comment(line));
      if (s.empty()) continue;
      if (s[0] == '[') {
        if (s.back() != ']' || s.size() < 3) throw LineError{"malformed section header"};
        section = trim(s.substr(1, s.size() - 2));
        for (char c : section)
          if (!bare_key_char(c)) throw LineError{"unsupported section name '" + section + "'"};
        if (table.count(section)) throw LineError{"duplicate section [" + section + "]"};
        table[section];
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw LineError{"expected key = value"};
      const std::string key = trim(s.substr(0, eq));
      if (key.empty()) throw LineError{"empty key"};
      for (char c : key)
        if (!bare_key_char(c)) throw LineError{"unsupported key '" + key + "'"};
      auto& sec = table[section];
      if (sec.count(key)) throw LineError{"duplicate key '" + key + "'"};
      sec[key] = parse_value(s.substr(eq + 1));
    } catch (const LineError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what);
    }
  }
  return table;
}

RunConfig config_from_table(const ConfigTable& table) {
  RunConfig c;
  Reader r(table);
  std::string grid_mode = to_string(c.grid_mode), mode = to_string(c.mode);
  PresetParams& p = c.preset;
  r.section("grid", [&] {
    r.str("mode", grid_mode);
    r.integer("n", c.n);
    r.integers("resolutions", c.resolutions);
  });
  r.section("free_data", [&] {
    r.str("metric", p.metric);
    r.num("metric_epsilon", p.metric_epsilon);
    r.num("metric_anisotropy", p.metric_anisotropy);
    r.str("nu", p.nu);
    r.num("nu_amplitude", p.nu_amplitude);
    r.str("matter", p.matter);
    r.num("e_amplitude", p.e_amplitude);
    r.num("b_amplitude", p.b_amplitude);
    r.num("j_amplitude", p.j_amplitude);
    r.num("zeta_amplitude", p.zeta_amplitude);
    r.num("theta_amplitude", p.theta_amplitude);
    r.num("phi_star_epsilon", p.phi_star_epsilon);
  });
  r.section("pipeline", [&] {
    r.str("mode", mode);
    r.num("bc_constant", c.pipeline.bc_constant);
  });
  NewtonOptions& nw = c.pipeline.newton;
  r.section("solver", [&] {
    r.num("linear_tolerance", c.pipeline.linear.tolerance);
    r.integer("linear_max_iterations", c.pipeline.linear.max_iterations);
    r.num("newton_tolerance", nw.tolerance);
    r.num("newton_step_tolerance", nw.step_tolerance);
    r.integer("newton_max_iterations", nw.max_iterations);
    r.integer("newton_max_halvings", nw.max_halvings);
    r.num("positivity_floor", nw.positivity_floor);
  });
  r.section("checks", [&] {
    r.num("residual_tolerance", c.residual_tolerance);
    r.num("trace_tolerance", c.trace_tolerance);
    r.num("cmc_tolerance", c.cmc_tolerance);
    r.boolean("shear_check", c.shear_check);
    r.num("shear_tolerance", c.shear_tolerance);
    r.num("fault_epsilon", c.fault_epsilon);
    r.num("fault_min_residual", c.fault_min_residual);
    r.numbers("probe_epsilons", c.probe_epsilons);
  });
  r.section("convergence", [&] {
    r.strings("problems", c.problems);
    r.num("min_rate", c.min_rate);
    r.num("max_rate", c.max_rate);
  });
  r.section("output", [&] {
    r.boolean("json", c.write_json);
    r.boolean("csv", c.write_csv);
    r.boolean("vtk", c.write_vtk);
  });
  r.done();

  c.grid_mode = parse_grid_mode(grid_mode);
  try {
    c.mode = parse_pipeline_mode(mode);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  nw.linear = c.pipeline.linear;

  require(c.n >= 5, "[grid] n must be at least 5");
  for (int n : c.resolutions) require(n >= 5, "[grid] resolutions must be at least 5");
  for (double t : {c.pipeline.linear.tolerance, nw.tolerance, nw.step_tolerance, c.residual_tolerance,
                   c.trace_tolerance, c.cmc_tolerance, c.pipeline.bc_constant})
    require(t > 0.0, "tolerances and bc_constant must be positive");
  require(c.pipeline.linear.max_iterations >= 0, "[solver] linear_max_iterations must be non-negative");
  require(nw.max_iterations >= 1 && nw.max_halvings >= 0, "[solver] Newton iteration limits out of range");
  require(nw.positivity_floor > 0.0 && nw.positivity_floor < 1.0, "[solver] positivity_floor must lie in (0, 1)");
  require(c.shear_tolerance >= 0.0, "[checks] shear_tolerance must be non-negative");
  require(c.fault_epsilon >= 0.0 && c.fault_epsilon <= 0.25, "[checks] fault_epsilon must lie in [0, 0.25]");
  for (double e : c.probe_epsilons) require(e > 0.0, "[checks] probe_epsilons must be positive");
  require(c.max_rate == 0.0 || c.max_rate >= c.min_rate, "[convergence] max_rate is below min_rate");
  const auto& known = convergence_problems();
  for (const auto& name : c.problems)
    require(std::find(known.begin(), known.end(), name) != known.end(), "unknown convergence problem '" + name + "'");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_table(parse_toml(ss.str()));
}

void validate_config(const RunConfig& c) {
  const PresetParams& p = c.preset;
  try {
    validate_preset(p, c.grid_mode);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const bool weak_metric = p.metric == "weak-lipschitz" && p.metric_epsilon != 0.0;
  const bool weak_nu = p.nu == "weak" && p.nu_amplitude != 0.0;
  if (c.mode == PipelineMode::shearfree && (weak_metric || weak_nu))
    throw ConfigError("preset '" + (weak_metric ? p.metric : p.nu) + "' is only regular enough for the weak mode");

  // ν = ν̄/ρ must sit in C_2 (decaying) or C_1 (weak); the closed forms give
  // ρ^{2-δ}|ν|_δ = |A| |tf(x⊗x)| ≤ |A|.
  if (p.nu == "none" || p.nu_amplitude == 0.0) return;
  const double delta = p.nu == "decaying" ? 2.0 : 1.0;
  GridPtr grid;
  try {
    grid = make_grid(c.grid_mode, c.n);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const FreeData free = make_free_data(grid, p);
  SymTensor2Field nu(grid);
  for (Index i : grid->interior_nodes()) nu.node(i) = free.nu_bar.node(i) / DefiningFunction::value(grid->x(i));
  const double norm = weighted_sup_norm(nu, delta);
  if (!(norm <= std::abs(p.nu_amplitude) * (1.0 + 1e-12)))
    throw ConfigError("ν preset '" + p.nu + "' violates its decay class (weighted norm " + std::to_string(norm) + ")");
}

}  // namespace hyp
