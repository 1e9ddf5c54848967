#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "affine/cli.hpp"

namespace affine::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_error(int line, const std::string& msg) {
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + msg);
}

double to_double(std::string_view v, int line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) parse_error(line, "expected a number, got '" + std::string(v) + "'");
  return out;
}

int to_int(std::string_view v, int line) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) parse_error(line, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

std::string to_string_value(std::string_view v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
  return std::string(v);
}

std::vector<std::string_view> split_list(std::string_view v) {
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string_view> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> to_list(std::string_view v, int line) {
  std::vector<double> out;
  for (auto item : split_list(v)) {
    if (item.empty()) parse_error(line, "empty list entry");
    out.push_back(to_double(item, line));
  }
  return out;
}

using Setter = std::function<void(Config&, std::string_view, int)>;

template <typename Section, typename Field>
Setter member(Section Config::*section, Field Section::*field) {
  return [section, field](Config& c, std::string_view v, int line) {
    auto& target = c.*section.*field;
    if constexpr (std::is_same_v<Field, double>) {
      target = to_double(v, line);
    } else if constexpr (std::is_same_v<Field, int>) {
      target = to_int(v, line);
    } else if constexpr (std::is_same_v<Field, std::string>) {
      target = to_string_value(v);
    } else {
      target = to_list(v, line);
    }
  };
}

const std::map<std::string, Setter>& setters() {
  using C = Config;
  static const std::map<std::string, Setter> table = {
      {"model.gamma", member(&C::model, &C::Model::gamma)},
      {"model.mu", member(&C::model, &C::Model::mu)},
      {"model.l", member(&C::model, &C::Model::l)},
      {"initial.g1_0", member(&C::initial, &C::Initial::g1_0)},
      {"initial.alpha0", member(&C::initial, &C::Initial::alpha0)},
      {"initial.beta0", member(&C::initial, &C::Initial::beta0)},
      {"initial.ep0", member(&C::initial, &C::Initial::ep0)},
      {"initial.a0", member(&C::initial, &C::Initial::a0)},
      {"initial.b0", member(&C::initial, &C::Initial::b0)},
      {"initial.c0", member(&C::initial, &C::Initial::c0)},
      {"initial.d0", member(&C::initial, &C::Initial::d0)},
      {"initial.gx0", member(&C::initial, &C::Initial::gx0)},
      {"initial.gy0", member(&C::initial, &C::Initial::gy0)},
      {"initial.gxy0", member(&C::initial, &C::Initial::gxy0)},
      {"integration.t_end", member(&C::integration, &C::Integration::t_end)},
      {"integration.rtol", member(&C::integration, &C::Integration::rtol)},
      {"integration.atol", member(&C::integration, &C::Integration::atol)},
      {"integration.min_step", member(&C::integration, &C::Integration::min_step)},
      {"integration.max_step", member(&C::integration, &C::Integration::max_step)},
      {"integration.blowup_norm_threshold", member(&C::integration, &C::Integration::blowup_norm_threshold)},
      {"integration.output_points", member(&C::integration, &C::Integration::output_points)},
      {"closed_form.samples", member(&C::closed_form, &C::ClosedForm::samples)},
      {"asymptotics.t_end", member(&C::asymptotics, &C::Asymptotics::t_end)},
      {"asymptotics.t_lo", member(&C::asymptotics, &C::Asymptotics::t_lo)},
      {"asymptotics.t_hi", member(&C::asymptotics, &C::Asymptotics::t_hi)},
      {"asymptotics.samples", member(&C::asymptotics, &C::Asymptotics::samples)},
      {"fields.a_exp", member(&C::fields, &C::Fields::a_exp)},
      {"fields.radial", member(&C::fields, &C::Fields::radial)},
      {"fields.angular", member(&C::fields, &C::Fields::angular)},
      {"fields.truncation_tol", member(&C::fields, &C::Fields::truncation_tol)},
      {"fields.audit_times", member(&C::fields, &C::Fields::audit_times)},
      {"fields.residual_time", member(&C::fields, &C::Fields::residual_time)},
      {"fields.h_levels", member(&C::fields, &C::Fields::h_levels)},
      {"fields.grid_points", member(&C::fields, &C::Fields::grid_points)},
      {"fields.grid_half_width", member(&C::fields, &C::Fields::grid_half_width)},
      {"interior.preset", member(&C::interior, &C::Interior::preset)},
      {"interior.path", member(&C::interior, &C::Interior::path)},
      {"interior.delta", member(&C::interior, &C::Interior::delta)},
      {"interior.horizon", member(&C::interior, &C::Interior::horizon)},
      {"interior.nodes", member(&C::interior, &C::Interior::nodes)},
      {"output.directory", member(&C::output, &C::Output::directory)},
  };
  return table;
}

const std::set<std::string> kMatrixKeys = {"initial.a0",  "initial.b0",  "initial.c0",  "initial.d0",
                                           "initial.gx0", "initial.gy0", "initial.gxy0"};
const std::set<std::string> kScalarKeys = {"initial.g1_0", "initial.alpha0", "initial.beta0"};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ValidationError, what);
}

}  // namespace

IntegrationConfig Config::integration_config(double t_end) const {
  IntegrationConfig c;
  c.t_end = t_end;
  c.rtol = integration.rtol;
  c.atol = integration.atol;
  c.min_step = integration.min_step;
  c.max_step = integration.max_step > 0.0 ? integration.max_step : std::numeric_limits<double>::infinity();
  c.blowup_norm_threshold = integration.blowup_norm_threshold;
  return c;
}

Config parse_config(std::string_view text) {
  Config cfg;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known = {"model",  "initial",  "integration", "closed_form",
                                                  "asymptotics", "fields", "interior", "output"};
      if (!known.count(section)) parse_error(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) parse_error(line_no, "missing key");
    if (value.empty()) parse_error(line_no, "missing value for '" + key + "'");
    // Keys before the first header belong to [model].
    const std::string full = (section.empty() ? std::string("model") : section) + "." + key;
    if (!seen.insert(full).second) parse_error(line_no, "duplicate key '" + full + "'");

    if (full == "output.formats") {
      cfg.output.csv = cfg.output.json = false;
      if (to_string_value(value) == "none") continue;
      for (auto f : split_list(value)) {
        const std::string name = to_string_value(f);
        if (name == "csv") {
          cfg.output.csv = true;
        } else if (name == "json") {
          cfg.output.json = true;
        } else {
          parse_error(line_no, "unknown output format '" + name + "'");
        }
      }
      continue;
    }
    const auto it = setters().find(full);
    if (it == setters().end()) parse_error(line_no, "unknown key '" + full + "'");
    it->second(cfg, value, line_no);
  }

  bool has_matrix = false, has_scalar = false;
  for (const auto& k : seen) {
    has_matrix |= kMatrixKeys.count(k) > 0;
    has_scalar |= kScalarKeys.count(k) > 0;
  }
  if (has_matrix && has_scalar) throw Error(Errc::ValidationError, "initial section mixes scalar and matrix entries");
  cfg.initial.matrix = has_matrix;
  validate(cfg);
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const Config& cfg) {
  validate_params(cfg.model.gamma, cfg.model.mu, cfg.model.l);
  const auto& in = cfg.initial;
  if (in.matrix) {
    validate_matrix_state(matrix_state(cfg.params(), in.a0, in.b0, in.c0, in.d0, in.gx0, in.gy0, in.gxy0));
  } else {
    if (!(in.g1_0 > 0.0) || !std::isfinite(in.g1_0)) throw Error(Errc::NonPositiveG1, "g1_0 must be positive");
    require(std::isfinite(in.alpha0) && std::isfinite(in.beta0), "alpha0 and beta0 must be finite");
  }
  require(in.ep0 >= 0.0 && std::isfinite(in.ep0), "ep0 must be non-negative");

  const auto& ig = cfg.integration;
  cfg.integration_config(ig.t_end).validate();
  require(ig.output_points >= 0, "output_points must be non-negative");
  require(ig.max_step >= 0.0, "max_step must be non-negative (0 for unbounded)");

  require(cfg.closed_form.samples >= 2, "closed_form.samples must be at least 2");

  const auto& as = cfg.asymptotics;
  require(as.t_lo > 0.0 && as.t_hi > as.t_lo && as.t_hi <= as.t_end, "asymptotics needs 0 < t_lo < t_hi <= t_end");
  require(as.samples >= 8, "asymptotics.samples must be at least 8");

  const auto& f = cfg.fields;
  if (!(f.a_exp > 3.0)) throw Error(Errc::ExponentTooSmall, "fields.a_exp must exceed 3");
  require(f.radial >= 2 && f.angular >= 4, "fields quadrature grid too coarse");
  require(f.truncation_tol > 0.0 && f.truncation_tol < 1e-2, "fields.truncation_tol must lie in (0, 1e-2)");
  require(!f.audit_times.empty(), "fields.audit_times must not be empty");
  for (std::size_t i = 0; i < f.audit_times.size(); ++i) {
    require(f.audit_times[i] >= 0.0, "fields.audit_times must be non-negative");
    require(i == 0 || f.audit_times[i] > f.audit_times[i - 1], "fields.audit_times must increase");
  }
  require(!f.h_levels.empty(), "fields.h_levels must not be empty");
  for (double h : f.h_levels) require(h > 0.0 && h <= f.residual_time, "fields.h_levels must lie in (0, residual_time]");
  require(f.grid_points >= 1 && f.grid_half_width > 0.0, "fields residual grid invalid");

  const auto& it = cfg.interior;
  static const std::set<std::string> presets = {"auto", "serre", "power", "friction", "adapted"};
  require(presets.count(it.preset) > 0, "interior.preset must be one of auto, serre, power, friction, adapted");
  require(it.path == "trajectory" || it.path == "expanding", "interior.path must be trajectory or expanding");
  if (!(it.delta > 0.0)) throw Error(Errc::BadDelta, "interior.delta must be positive");
  require(it.horizon > 1.0, "interior.horizon must exceed 1");
  require(it.nodes >= 200, "interior.nodes must be at least 200");

  require(!cfg.output.directory.empty(), "output.directory must not be empty");
}

nlohmann::json to_json(const Config& cfg) {
  nlohmann::json j;
  j["model"] = {{"gamma", cfg.model.gamma}, {"mu", cfg.model.mu}, {"l", cfg.model.l}};
  const auto& in = cfg.initial;
  if (in.matrix) {
    j["initial"] = {{"a0", in.a0},   {"b0", in.b0},   {"c0", in.c0},     {"d0", in.d0},
                    {"gx0", in.gx0}, {"gy0", in.gy0}, {"gxy0", in.gxy0}, {"ep0", in.ep0}};
  } else {
    j["initial"] = {{"g1_0", in.g1_0}, {"alpha0", in.alpha0}, {"beta0", in.beta0}, {"ep0", in.ep0}};
  }
  const auto& ig = cfg.integration;
  j["integration"] = {{"t_end", ig.t_end},
                      {"rtol", ig.rtol},
                      {"atol", ig.atol},
                      {"min_step", ig.min_step},
                      {"max_step", ig.max_step},
                      {"blowup_norm_threshold", ig.blowup_norm_threshold},
                      {"output_points", ig.output_points}};
  j["closed_form"] = {{"samples", cfg.closed_form.samples}};
  const auto& as = cfg.asymptotics;
  j["asymptotics"] = {{"t_end", as.t_end}, {"t_lo", as.t_lo}, {"t_hi", as.t_hi}, {"samples", as.samples}};
  const auto& f = cfg.fields;
  j["fields"] = {{"a_exp", f.a_exp},
                 {"radial", f.radial},
                 {"angular", f.angular},
                 {"truncation_tol", f.truncation_tol},
                 {"audit_times", f.audit_times},
                 {"residual_time", f.residual_time},
                 {"h_levels", f.h_levels},
                 {"grid_points", f.grid_points},
                 {"grid_half_width", f.grid_half_width}};
  const auto& it = cfg.interior;
  j["interior"] = {{"preset", it.preset},
                   {"path", it.path},
                   {"delta", it.delta},
                   {"horizon", it.horizon},
                   {"nodes", it.nodes}};
  std::vector<std::string> formats;
  if (cfg.output.csv) formats.emplace_back("csv");
  if (cfg.output.json) formats.emplace_back("json");
  j["output"] = {{"directory", cfg.output.directory}, {"formats", formats}};
  return j;
}

std::string to_text(const Config& cfg) {
  const nlohmann::json doc = to_json(cfg);
  std::string out;
  for (const auto& [section, entries] : doc.items()) {
    out += "[" + section + "]\n";
    for (const auto& [key, v] : entries.items()) {
      std::string value;
      if (section == "output" && key == "formats") {
        for (const auto& f : v) value += (value.empty() ? "" : ",") + f.get<std::string>();
        if (value.empty()) value = "none";
      } else if (v.is_string()) {
        value = "\"" + v.get<std::string>() + "\"";
      } else if (v.is_array()) {
        for (const auto& x : v) value += (value.empty() ? "" : ", ") + format_double(x.get<double>());
      } else if (v.is_number_integer()) {
        value = std::to_string(v.get<long long>());
      } else {
        value = format_double(v.get<double>());
      }
      out += key + " = " + value + "\n";
    }
  }
  return out;
}

}  // namespace affine::cli
