#pragma once
// Config loading: a hierarchical key/value text format and a JSON twin, both
// with explicit unit suffixes on every dimensioned quantity, plus JSON
// serialization of EffectiveModel that round-trips coefficients bitwise.

#include <heff/effective.hpp>
#include <heff/level_scheme.hpp>
#include <heff/units.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace heff {

struct SweepGrid {
  double min = 0.0;  // rad/s
  double max = 0.0;
  int points = 0;

  bool set() const { return points > 0; }
};

struct SystemConfig {
  Regime regime = Regime::rwa;
  LevelScheme scheme;  // energies in rad/s
  std::vector<DriveSpec> drives;
  std::vector<std::string> transition_names;
  std::vector<std::string> drive_names;
  int cutoff = 8;
  int n_probe = 3;
  int ensemble_n = 1;
  SweepGrid sweep;
  FieldUnits units;
  bool has_units = false;
  std::string source;

  CoupledSystem build() const { return build_coupled_system(scheme, drives, regime); }
};

namespace detail_cfg {

inline const std::map<std::string, double>& frequency_units() {
  static const std::map<std::string, double> u = {
      {"rad/s", 1.0},          {"krad/s", 1e3},         {"Mrad/s", 1e6},
      {"Grad/s", 1e9},         {"Trad/s", 1e12},        {"Hz", 2.0 * M_PI},
      {"kHz", 2.0 * M_PI * 1e3}, {"MHz", 2.0 * M_PI * 1e6}, {"GHz", 2.0 * M_PI * 1e9},
      {"THz", 2.0 * M_PI * 1e12}};
  return u;
}

inline const std::map<std::string, std::map<std::string, double>>& unit_tables() {
  static const std::map<std::string, std::map<std::string, double>> t = {
      {"frequency", frequency_units()},
      {"dipole", {{"C*m", 1.0}, {"D", constants::debye}}},
      {"power", {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"nW", 1e-9}, {"pW", 1e-12}}},
      {"area", {{"m^2", 1.0}, {"mm^2", 1e-6}, {"um^2", 1e-12}}},
      {"length", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}}},
      {"volume", {{"m^3", 1.0}, {"cm^3", 1e-6}, {"mm^3", 1e-9}, {"um^3", 1e-18}, {"L", 1e-3}}},
      {"density", {{"m^-3", 1.0}, {"cm^-3", 1e6}}},
      {"angle", {{"rad", 1.0}}},
  };
  return t;
}

struct Cursor {
  const std::string& source;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
  }
};

inline double parse_number(const Cursor& at, const std::string& tok) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) at.fail("trailing characters in number '" + tok + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    at.fail("expected a number, got '" + tok + "'");
  }
}

// consumes tokens[i] (number) and tokens[i+1] (unit); returns the value in base units
inline double parse_quantity(const Cursor& at, const std::vector<std::string>& tokens, size_t& i,
                             const std::string& dimension) {
  if (i >= tokens.size()) at.fail("expected a " + dimension + " value");
  const double v = parse_number(at, tokens[i]);
  const auto& table = unit_tables().at(dimension);
  if (i + 1 >= tokens.size()) {
    std::string known;
    for (const auto& [name, f] : table) known += (known.empty() ? "" : ", ") + name;
    at.fail("missing " + dimension + " unit after '" + tokens[i] + "' (one of: " + known + ")");
  }
  const auto it = table.find(tokens[i + 1]);
  if (it == table.end())
    at.fail("unknown " + dimension + " unit '" + tokens[i + 1] + "' after '" + tokens[i] + "'");
  i += 2;
  return v * it->second;
}

inline double parse_plain(const Cursor& at, const std::vector<std::string>& tokens, size_t& i,
                          const std::string& what) {
  if (i >= tokens.size()) at.fail("expected a value for " + what);
  return parse_number(at, tokens[i++]);
}

inline std::vector<std::string> tokenize(std::string line) {
  const size_t hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

inline void validate_config(const SystemConfig& cfg, const std::string& source) {
  try {
    cfg.scheme.validate();
    validate_drives(cfg.scheme, cfg.drives, cfg.regime);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (cfg.cutoff < 1) throw ConfigError(source + ": truncation cutoff must be >= 1");
  if (cfg.n_probe < 0 || cfg.n_probe > cfg.cutoff - 4)
    throw ConfigError(source + ": need n_probe >= 0 and cutoff >= n_probe + 4");
  if (cfg.ensemble_n < 1) throw ConfigError(source + ": ensemble n must be >= 1");
  if (cfg.sweep.set() && !(cfg.sweep.min > 0.0 && cfg.sweep.max > cfg.sweep.min))
    throw ConfigError(source + ": sweep needs 0 < min < max");
}

inline int find_name(const std::vector<std::string>& names, const std::string& ref) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == ref) return int(i);
  // numeric indices are accepted as references too
  try {
    size_t used = 0;
    const int idx = std::stoi(ref, &used);
    if (used == ref.size() && idx >= 0 && idx < int(names.size())) return idx;
  } catch (const std::exception&) {
  }
  return -1;
}

}  // namespace detail_cfg

inline SystemConfig parse_config_text(const std::string& text, const std::string& source) {
  using namespace detail_cfg;
  SystemConfig cfg;
  cfg.source = source;
  std::vector<std::string> level_names;
  std::string block;
  bool saw_levels = false;

  Cursor at{source, 0};

  auto handle_block_line = [&](const std::vector<std::string>& tokens) {
    size_t i = 0;
    if (block == "levels") {
      Level lv;
      lv.label = tokens[i++];
      if (i >= tokens.size() || tokens[i] != "energy") at.fail("level needs 'energy <value> <unit>'");
      ++i;
      lv.energy = parse_quantity(at, tokens, i, "frequency");
      while (i < tokens.size()) {
        if (tokens[i] == "decay") {
          ++i;
          lv.decay_rate = parse_quantity(at, tokens, i, "frequency");
        } else if (tokens[i] == "to_ground") {
          lv.decays_to_ground = true;
          ++i;
        } else {
          at.fail("unknown level attribute '" + tokens[i] + "'");
        }
      }
      cfg.scheme.levels.push_back(lv);
      level_names.push_back(cfg.scheme.levels.back().label);
    } else if (block == "transitions") {
      if (tokens.size() < 3) at.fail("transition needs '<name> <lower> <upper> [dipole ...]'");
      Transition tr;
      cfg.transition_names.push_back(tokens[i++]);
      const int lo = find_name(level_names, tokens[i++]);
      const int hi = find_name(level_names, tokens[i++]);
      if (lo < 0 || hi < 0) at.fail("transition references an unknown level");
      tr.lower = lo;
      tr.upper = hi;
      while (i < tokens.size()) {
        if (tokens[i] == "dipole") {
          ++i;
          tr.dipole = parse_quantity(at, tokens, i, "dipole");
        } else {
          at.fail("unknown transition attribute '" + tokens[i] + "'");
        }
      }
      cfg.scheme.transitions.push_back(tr);
    } else if (block == "drives") {
      if (tokens.size() < 3) at.fail("drive needs '<name> <kind> <transition> rate ...'");
      cfg.drive_names.push_back(tokens[i++]);
      const std::string kind = tokens[i++];
      const int tref = find_name(cfg.transition_names, tokens[i++]);
      if (tref < 0) at.fail("drive references an unknown transition");
      double rate = std::numeric_limits<double>::quiet_NaN();
      double frequency = std::numeric_limits<double>::quiet_NaN();
      double phase = 0.0;
      while (i < tokens.size()) {
        if (tokens[i] == "rate") {
          ++i;
          rate = parse_quantity(at, tokens, i, "frequency");
        } else if (tokens[i] == "frequency") {
          ++i;
          frequency = parse_quantity(at, tokens, i, "frequency");
        } else if (tokens[i] == "phase") {
          ++i;
          phase = parse_quantity(at, tokens, i, "angle");
        } else {
          at.fail("unknown drive attribute '" + tokens[i] + "'");
        }
      }
      if (std::isnan(rate)) at.fail("drive needs 'rate <value> <unit>'");
      const Complex amp = rate * Complex(std::cos(phase), std::sin(phase));
      if (kind == "quantized") {
        cfg.drives.push_back(DriveSpec::quantized_mode(tref, amp, frequency));
      } else if (kind == "classical_rwa") {
        cfg.drives.push_back(DriveSpec::classical_rwa(tref, amp, frequency));
      } else if (kind == "classical_bare") {
        if (phase != 0.0) at.fail("classical_bare drives take no phase");
        if (!std::isnan(frequency)) at.fail("classical_bare drives take no frequency");
        cfg.drives.push_back(DriveSpec::classical_bare(tref, rate));
      } else {
        at.fail("unknown drive kind '" + kind +
                "' (quantized, classical_rwa or classical_bare)");
      }
    } else if (block == "truncation") {
      while (i < tokens.size()) {
        if (tokens[i] == "cutoff") {
          ++i;
          cfg.cutoff = int(parse_plain(at, tokens, i, "cutoff"));
        } else if (tokens[i] == "n_probe") {
          ++i;
          cfg.n_probe = int(parse_plain(at, tokens, i, "n_probe"));
        } else {
          at.fail("unknown truncation key '" + tokens[i] + "'");
        }
      }
    } else if (block == "ensemble") {
      while (i < tokens.size()) {
        if (tokens[i] == "n") {
          ++i;
          cfg.ensemble_n = int(parse_plain(at, tokens, i, "ensemble n"));
        } else {
          at.fail("unknown ensemble key '" + tokens[i] + "'");
        }
      }
    } else if (block == "sweep") {
      while (i < tokens.size()) {
        if (tokens[i] == "min") {
          ++i;
          cfg.sweep.min = parse_quantity(at, tokens, i, "frequency");
        } else if (tokens[i] == "max") {
          ++i;
          cfg.sweep.max = parse_quantity(at, tokens, i, "frequency");
        } else if (tokens[i] == "points") {
          ++i;
          cfg.sweep.points = int(parse_plain(at, tokens, i, "points"));
        } else {
          at.fail("unknown sweep key '" + tokens[i] + "'");
        }
      }
    } else if (block == "units") {
      cfg.has_units = true;
      while (i < tokens.size()) {
        if (tokens[i] == "dipole") {
          ++i;
          cfg.units.dipole = parse_quantity(at, tokens, i, "dipole");
        } else if (tokens[i] == "omega") {
          ++i;
          cfg.units.omega = parse_quantity(at, tokens, i, "frequency");
        } else if (tokens[i] == "power") {
          ++i;
          cfg.units.power = parse_quantity(at, tokens, i, "power");
        } else if (tokens[i] == "area") {
          ++i;
          cfg.units.area = parse_quantity(at, tokens, i, "area");
        } else if (tokens[i] == "length") {
          ++i;
          cfg.units.pulse_length = parse_quantity(at, tokens, i, "length");
        } else if (tokens[i] == "volume") {
          ++i;
          cfg.units.mode_volume = parse_quantity(at, tokens, i, "volume");
        } else if (tokens[i] == "density") {
          ++i;
          cfg.units.density = parse_quantity(at, tokens, i, "density");
        } else if (tokens[i] == "photons") {
          ++i;
          cfg.units.photon_number = parse_plain(at, tokens, i, "photons");
        } else {
          at.fail("unknown units key '" + tokens[i] + "'");
        }
      }
    } else {
      at.fail("unknown section '" + block + "'");
    }
  };

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++at.line;
    std::vector<std::string> tokens = tokenize(raw);
    if (tokens.empty()) continue;

    if (block.empty()) {
      if (tokens[0] == "regime") {
        if (tokens.size() != 2) at.fail("usage: regime rwa|bare");
        if (tokens[1] == "rwa")
          cfg.regime = Regime::rwa;
        else if (tokens[1] == "bare")
          cfg.regime = Regime::bare;
        else
          at.fail("unknown regime '" + tokens[1] + "' (rwa or bare)");
        continue;
      }
      if (tokens.size() >= 2 && tokens[1] == "{") {
        block = tokens[0];
        if (block == "levels") saw_levels = true;
        std::vector<std::string> rest(tokens.begin() + 2, tokens.end());
        const bool closes = !rest.empty() && rest.back() == "}";
        if (closes) rest.pop_back();
        if (!rest.empty()) handle_block_line(rest);
        if (closes) block.clear();
        continue;
      }
      at.fail("expected 'regime <value>' or '<section> {', got '" + tokens[0] + "'");
    }

    if (tokens[0] == "}") {
      if (tokens.size() != 1) at.fail("'}' must stand alone");
      block.clear();
      continue;
    }
    handle_block_line(tokens);
  }
  if (!block.empty()) throw ConfigError(source + ": unterminated section '" + block + "'");
  if (!saw_levels) throw ConfigError(source + ": config has no levels section");

  detail_cfg::validate_config(cfg, source);
  return cfg;
}

inline SystemConfig parse_config_json(const std::string& text, const std::string& source) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  auto fail = [&source](const std::string& msg) -> void {
    throw ConfigError(source + ": " + msg);
  };
  try {
    SystemConfig cfg;
    cfg.source = source;
    const std::string regime = j.value("regime", "rwa");
    if (regime == "rwa")
      cfg.regime = Regime::rwa;
    else if (regime == "bare")
      cfg.regime = Regime::bare;
    else
      fail("unknown regime '" + regime + "'");

    if (!j.contains("levels")) fail("missing 'levels'");
    std::vector<std::string> level_names;
    for (const auto& lj : j.at("levels")) {
      Level lv;
      lv.label = lj.at("label").get<std::string>();
      lv.energy = lj.at("energy_rad_s").get<double>();
      lv.decay_rate = lj.value("decay_rad_s", 0.0);
      lv.decays_to_ground = lj.value("to_ground", false);
      cfg.scheme.levels.push_back(lv);
      level_names.push_back(lv.label);
    }
    for (const auto& tj : j.value("transitions", json::array())) {
      Transition tr;
      cfg.transition_names.push_back(tj.value("name", std::to_string(cfg.transition_names.size())));
      tr.lower = detail_cfg::find_name(level_names, tj.at("lower").get<std::string>());
      tr.upper = detail_cfg::find_name(level_names, tj.at("upper").get<std::string>());
      if (tr.lower < 0 || tr.upper < 0) fail("transition references an unknown level");
      tr.dipole = tj.value("dipole_Cm", 0.0);
      cfg.scheme.transitions.push_back(tr);
    }
    for (const auto& dj : j.value("drives", json::array())) {
      cfg.drive_names.push_back(dj.value("name", std::to_string(cfg.drive_names.size())));
      const std::string kind = dj.at("kind").get<std::string>();
      const int tref =
          detail_cfg::find_name(cfg.transition_names, dj.at("transition").get<std::string>());
      if (tref < 0) fail("drive references an unknown transition");
      const double rate = dj.at("rate_rad_s").get<double>();
      const double phase = dj.value("phase_rad", 0.0);
      const double frequency = dj.value("frequency_rad_s",
                                        std::numeric_limits<double>::quiet_NaN());
      const Complex amp = rate * Complex(std::cos(phase), std::sin(phase));
      if (kind == "quantized")
        cfg.drives.push_back(DriveSpec::quantized_mode(tref, amp, frequency));
      else if (kind == "classical_rwa")
        cfg.drives.push_back(DriveSpec::classical_rwa(tref, amp, frequency));
      else if (kind == "classical_bare")
        cfg.drives.push_back(DriveSpec::classical_bare(tref, rate));
      else
        fail("unknown drive kind '" + kind + "'");
    }
    if (j.contains("truncation")) {
      cfg.cutoff = j.at("truncation").value("cutoff", cfg.cutoff);
      cfg.n_probe = j.at("truncation").value("n_probe", cfg.n_probe);
    }
    if (j.contains("ensemble")) cfg.ensemble_n = j.at("ensemble").value("n", 1);
    if (j.contains("sweep")) {
      cfg.sweep.min = j.at("sweep").value("min_rad_s", 0.0);
      cfg.sweep.max = j.at("sweep").value("max_rad_s", 0.0);
      cfg.sweep.points = j.at("sweep").value("points", 0);
    }
    if (j.contains("units")) {
      const auto& uj = j.at("units");
      cfg.has_units = true;
      cfg.units.dipole = uj.value("dipole_Cm", 0.0);
      cfg.units.omega = uj.value("omega_rad_s", 0.0);
      cfg.units.power = uj.value("power_W", 0.0);
      cfg.units.area = uj.value("area_m2", 0.0);
      cfg.units.pulse_length = uj.value("length_m", 0.0);
      cfg.units.mode_volume = uj.value("volume_m3", 0.0);
      cfg.units.density = uj.value("density_per_m3", 0.0);
      cfg.units.photon_number = uj.value("photon_number", 0.0);
    }

    detail_cfg::validate_config(cfg, source);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const size_t first = text.find_first_not_of(" \t\r\n");
  const bool looks_json = first != std::string::npos && text[first] == '{';
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return parse_config_json(text, path);
  if (looks_json) return parse_config_json(text, path);
  return parse_config_text(text, path);
}

// --- EffectiveModel JSON -------------------------------------------------------

namespace detail_cfg {

inline nlohmann::json monomial_to_json(const Monomial& mono) {
  nlohmann::json a = nlohmann::json::array();
  for (const ModePower& mp : mono) a.push_back({mp.raise, mp.lower});
  return a;
}

inline Monomial monomial_from_json(const nlohmann::json& a) {
  Monomial mono;
  for (const auto& row : a) {
    ModePower mp;
    mp.raise = row.at(0).get<int>();
    mp.lower = row.at(1).get<int>();
    mono.push_back(mp);
  }
  return mono;
}

inline nlohmann::json polynomial_to_json(const ModePolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [mono, c] : p.terms()) {
    nlohmann::json t;
    t["monomial"] = monomial_to_json(mono);
    t["re"] = c.real();
    t["im"] = c.imag();
    terms.push_back(std::move(t));
  }
  return terms;
}

inline ModePolynomial polynomial_from_json(const nlohmann::json& terms, int n_modes) {
  ModePolynomial p(n_modes);
  for (const auto& t : terms) {
    const Monomial mono = monomial_from_json(t.at("monomial"));
    if (int(mono.size()) != n_modes)
      throw ConfigError("EffectiveModel JSON: monomial arity mismatch");
    p.add_term(mono, Complex(t.at("re").get<double>(), t.at("im").get<double>()));
  }
  return p;
}

}  // namespace detail_cfg

inline nlohmann::json effective_model_to_json(const EffectiveModel& m) {
  nlohmann::json j;
  j["regime"] = m.regime == Regime::rwa ? "rwa" : "bare";
  j["omega_rad_s"] = m.omega;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [mono, c] : m.induced.terms()) {
    nlohmann::json t;
    t["monomial"] = detail_cfg::monomial_to_json(mono);
    t["re"] = c.real();
    t["im"] = c.imag();
    t["name"] = archetype_name(mono);
    const auto pv = m.provenance.find(mono);
    if (pv != m.provenance.end()) t["order"] = pv->second;
    terms.push_back(std::move(t));
  }
  j["induced"] = std::move(terms);
  nlohmann::json channels = nlohmann::json::array();
  for (const LindbladChannel& ch : m.channels) {
    nlohmann::json c;
    c["level"] = ch.level;
    c["gamma_eff"] = ch.gamma_eff;
    c["op"] = detail_cfg::polynomial_to_json(ch.op);
    channels.push_back(std::move(c));
  }
  j["channels"] = std::move(channels);
  return j;
}

inline EffectiveModel effective_model_from_json(const nlohmann::json& j) {
  using nlohmann::json;
  try {
    EffectiveModel m;
    const std::string regime = j.at("regime").get<std::string>();
    if (regime == "rwa")
      m.regime = Regime::rwa;
    else if (regime == "bare")
      m.regime = Regime::bare;
    else
      throw ConfigError("EffectiveModel JSON: unknown regime '" + regime + "'");
    m.omega = j.at("omega_rad_s").get<std::vector<double>>();
    const int n_modes = int(m.omega.size());
    m.free_field = free_field_hamiltonian(m.omega);
    m.induced = ModePolynomial(n_modes);
    for (const auto& t : j.at("induced")) {
      const Monomial mono = detail_cfg::monomial_from_json(t.at("monomial"));
      if (int(mono.size()) != n_modes)
        throw ConfigError("EffectiveModel JSON: monomial arity mismatch");
      m.induced.add_term(mono, Complex(t.at("re").get<double>(), t.at("im").get<double>()));
      if (t.contains("order")) m.provenance[mono] = t.at("order").get<MultiIndex>();
    }
    for (const auto& c : j.at("channels")) {
      LindbladChannel ch;
      ch.level = c.at("level").get<int>();
      ch.gamma_eff = c.at("gamma_eff").get<double>();
      ch.op = detail_cfg::polynomial_from_json(c.at("op"), n_modes);
      m.channels.push_back(std::move(ch));
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("EffectiveModel JSON: ") + e.what());
  }
}

}  // namespace heff
