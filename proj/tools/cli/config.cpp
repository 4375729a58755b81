#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fits/io.hpp"

namespace fits::cli {

namespace {

std::string describe(const std::string& source, int line, const std::string& field,
                     const std::string& message) {
  std::string out;
  if (!source.empty()) out += source + ":";
  if (line > 0) out += std::to_string(line) + ":";
  if (!out.empty()) out += " ";
  if (!field.empty()) out += field + ": ";
  return out + message;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

double parse_double(const std::string& text, int line, const std::string& field) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(line, field, "expected a number, got '" + text + "'");
  if (!std::isfinite(v)) throw ConfigError(line, field, "value must be finite, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text, int line, const std::string& field) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(line, field, "expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text, int line, const std::string& field) {
  const auto items = split_list(text);
  if (items.empty()) throw ConfigError(line, field, "expected a comma-separated list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_double(items[i], line, field);
  }
  return v;
}

using Setter = std::function<void(RunConfig&, const std::string&, int, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"scenario",
       {
           {"name", [](RunConfig& c, const std::string& v, int, const std::string&) { c.scenario = v; }},
           {"seed",
            [](RunConfig& c, const std::string& v, int l, const std::string& f) {
              const auto s = parse_integer(v, l, f);
              if (s < 0) throw ConfigError(l, f, "must be >= 0");
              c.seed = static_cast<std::uint64_t>(s);
            }},
           {"t_sim", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.t_sim = parse_double(v, l, f); }},
           {"x_init", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.x_init = parse_vector(v, l, f); }},
           {"layout_file", [](RunConfig& c, const std::string& v, int, const std::string&) { c.layout_file = v; }},
       }},
      {"controller",
       {
           {"name",
            [](RunConfig& c, const std::string& v, int l, const std::string& f) {
              c.controllers = split_list(v);
              if (c.controllers.empty()) throw ConfigError(l, f, "needs at least one controller");
            }},
           {"N", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.num_steps = static_cast<int>(parse_integer(v, l, f)); }},
           {"T", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.horizon = parse_double(v, l, f); }},
           {"M", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.num_samples = static_cast<int>(parse_integer(v, l, f)); }},
           {"gamma_safety", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.gamma_safety = parse_double(v, l, f); }},
           {"gamma_actuation", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.gamma_actuation = parse_double(v, l, f); }},
           {"reg", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.reg_weight = parse_double(v, l, f); }},
           {"dt", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.dt = parse_double(v, l, f); }},
           {"margin", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.margin = parse_double(v, l, f); }},
           {"kappa_safety_factor", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.kappa_safety_factor = parse_double(v, l, f); }},
           {"substeps", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.substeps = static_cast<int>(parse_integer(v, l, f)); }},
           {"sample_layout",
            [](RunConfig& c, const std::string& v, int l, const std::string& f) {
              if (v == "endpoints") c.sample_layout = SampleLayout::Endpoints;
              else if (v == "input_aligned") c.sample_layout = SampleLayout::InputAligned;
              else throw ConfigError(l, f, "expected endpoints or input_aligned, got '" + v + "'");
            }},
           {"qp_max_iterations", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.qp_max_iterations = static_cast<int>(parse_integer(v, l, f)); }},
           {"cbf_gamma", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.cbf_gamma = parse_double(v, l, f); }},
           {"cbf_position_gain", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.cbf_position_gain = parse_double(v, l, f); }},
       }},
      {"output",
       {
           {"dir", [](RunConfig& c, const std::string& v, int, const std::string&) { c.out_dir = v; }},
           {"repetitions", [](RunConfig& c, const std::string& v, int l, const std::string& f) { c.repetitions = static_cast<int>(parse_integer(v, l, f)); }},
       }},
  };
  return table;
}

template <class T>
void positive(const std::optional<T>& v, const char* field) {
  if (v && !(*v > 0)) throw ConfigError(0, field, "must be > 0");
}

}  // namespace

ConfigError::ConfigError(int line, std::string field, std::string detail, std::string source)
    : std::runtime_error(describe(source, line, field, detail)),
      line_(line),
      field_(std::move(field)),
      detail_(std::move(detail)) {}

void parse_config(std::istream& is, RunConfig& cfg) {
  const auto& table = setters();
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string text = trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(line, "", "unterminated section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!table.contains(section)) {
        throw ConfigError(line, section, "unknown section (expected scenario, controller or output)");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (section.empty()) throw ConfigError(line, key, "key outside of a section");
    const std::string field = section + "." + key;
    const auto& keys = table.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(line, field, "unknown key");
    if (value.empty()) throw ConfigError(line, field, "missing value");
    it->second(cfg, value, line, field);
  }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "--config", "cannot open '" + path + "'");
  try {
    parse_config(in, cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(e.line(), e.field(), e.detail(), path);
  }
}

void RunConfig::validate() const {
  if (std::find(kScenarioNames.begin(), kScenarioNames.end(), scenario) == kScenarioNames.end()) {
    throw ConfigError(0, "scenario.name", "unknown scenario '" + scenario + "' (valid: " + join(kScenarioNames) + ")");
  }
  if (controllers.empty()) throw ConfigError(0, "controller.name", "no controller given");
  for (const auto& c : controllers) {
    if (std::find(kControllerNames.begin(), kControllerNames.end(), c) == kControllerNames.end()) {
      throw ConfigError(0, "controller.name", "unknown controller '" + c + "' (valid: " + join(kControllerNames) + ")");
    }
  }
  if (repetitions < 1) throw ConfigError(0, "output.repetitions", "must be >= 1");
  if (out_dir.empty()) throw ConfigError(0, "output.dir", "must not be empty");
  positive(t_sim, "scenario.t_sim");
  positive(cbf_gamma, "controller.cbf_gamma");
  if (cbf_position_gain && *cbf_position_gain < 0.0) {
    throw ConfigError(0, "controller.cbf_position_gain", "must be >= 0");
  }
  if (!layout_file.empty() && scenario != "navigation") {
    throw ConfigError(0, "scenario.layout_file", "only valid for the navigation scenario");
  }
  try {
    fits_config().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, "controller", e.what());
  }
}

FitsConfig RunConfig::fits_config() const {
  FitsConfig c = default_fits_config(scenario);
  if (num_steps) c.num_steps = *num_steps;
  if (horizon) c.horizon = *horizon;
  if (num_samples) c.num_samples = *num_samples;
  if (gamma_safety) c.gamma_safety = *gamma_safety;
  if (gamma_actuation) c.gamma_actuation = *gamma_actuation;
  if (reg_weight) c.reg_weight = *reg_weight;
  if (dt) c.dt = *dt;
  if (margin) c.margin = *margin;
  if (kappa_safety_factor) c.kappa_safety_factor = *kappa_safety_factor;
  if (substeps) c.substeps = *substeps;
  if (sample_layout) c.sample_layout = *sample_layout;
  if (qp_max_iterations) c.qp.max_iterations = *qp_max_iterations;
  return c;
}

LqrSettings RunConfig::lqr_settings() const {
  LqrSettings s = default_lqr_settings(scenario);
  if (dt) s.dt = *dt;
  return s;
}

CbfSettings RunConfig::cbf_settings() const {
  CbfSettings s = default_cbf_settings(scenario);
  s.lqr = lqr_settings();
  if (cbf_gamma) s.gamma = *cbf_gamma;
  if (cbf_position_gain) s.position_gain = *cbf_position_gain;
  return s;
}

Scenario RunConfig::build_scenario(std::uint64_t rep_seed) const {
  if (scenario == "geofencing") {
    GeofencingParams p;
    if (t_sim) p.t_sim = *t_sim;
    if (x_init) p.x_init = *x_init;
    return scenario_geofencing(p);
  }
  NavigationParams p;
  if (t_sim) p.t_sim = *t_sim;
  if (x_init) p.x_init = *x_init;
  std::vector<Obstacle> obstacles;
  if (layout_file.empty()) {
    obstacles = generate_layout(rep_seed, p.layout);
  } else {
    std::ifstream in(layout_file);
    if (!in) throw ConfigError(0, "scenario.layout_file", "cannot open '" + layout_file + "'");
    try {
      obstacles = io::read_layout(in);
    } catch (const io::ParseError& e) {
      throw ConfigError(e.line(), "scenario.layout_file", e.what(), layout_file);
    }
  }
  return scenario_navigation(obstacles, p);
}

std::string config_reference() {
  std::ostringstream os;
  os << "Config file keys (flags override the file; unset keys use the scenario defaults):\n"
     << "  [scenario]   name (navigation), seed (" << kDefaultNavigationSeed
     << "), t_sim, x_init, layout_file\n"
     << "  [controller] name (fits; comma list for compare), N, T, M, gamma_safety,\n"
     << "               gamma_actuation, reg, dt, margin, kappa_safety_factor, substeps,\n"
     << "               sample_layout, qp_max_iterations, cbf_gamma, cbf_position_gain\n"
     << "  [output]     dir (out), repetitions (1)\n\n"
     << "Scenario defaults:\n";
  for (const auto& name : kScenarioNames) {
    const FitsConfig f = default_fits_config(name);
    const CbfSettings c = default_cbf_settings(name);
    RunConfig rc;
    rc.scenario = name;
    const Scenario sc = rc.build_scenario(kDefaultNavigationSeed);
    os << "  " << name << ": t_sim " << sc.t_sim << ", N " << f.num_steps << ", T " << f.horizon
       << ", M " << f.num_samples << ", gamma_safety " << f.gamma_safety << ", gamma_actuation "
       << f.gamma_actuation << ", reg " << f.reg_weight << ", dt " << f.dt << ", margin " << f.margin
       << ", kappa_safety_factor " << f.kappa_safety_factor << ", substeps " << f.substeps
       << " (0 = auto), sample_layout endpoints, qp_max_iterations " << f.qp.max_iterations
       << ", cbf_gamma " << c.gamma << ", cbf_position_gain " << c.position_gain
       << " (0 = repeated roots)\n";
  }
  return os.str();
}

}  // namespace fits::cli
