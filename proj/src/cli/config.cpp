#include "sivrelax/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace sivrelax::cli {

namespace {

using Json = nlohmann::json;

// ---------------------------------------------------------------- TOML subset
//
// Accepted: comments, blank lines and single-line `key = value` pairs where
// the value is a number, a basic string, a boolean or a flat array of those.
// Table headers, dotted keys and multi-line values are rejected.

class TomlReader {
 public:
  TomlReader(const std::string& line, int line_no) : s_(line), line_no_(line_no) {}

  Json value() {
    skip_ws();
    if (eof()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number();
  }

  void expect_end() {
    skip_ws();
    if (!eof() && s_[pos_] != '#') fail("unexpected text after value");
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  void skip_ws() {
    while (!eof() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("TOML line " + std::to_string(line_no_) + ": " + what);
  }

  Json string() {
    ++pos_;
    std::string out;
    while (!eof() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (eof()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Json array() {
    ++pos_;
    Json out = Json::array();
    skip_ws();
    if (!eof() && s_[pos_] == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      Json v = value();
      if (v.is_array()) fail("nested arrays are not supported");
      out.push_back(std::move(v));
      skip_ws();
      if (eof()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (!eof() && s_[pos_] == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Json number() {
    const std::size_t start = pos_;
    while (!eof() && std::string("+-0123456789.eE_").find(s_[pos_]) != std::string::npos) ++pos_;
    std::string text = s_.substr(start, pos_ - start);
    std::erase(text, '_');
    if (text.empty()) fail("expected a value");
    const bool integral = text.find_first_of(".eE") == std::string::npos;
    try {
      std::size_t used = 0;
      if (integral) {
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
      } else {
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("bad number '" + text + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_no_;
};

Json parse_toml(const std::string& text) {
  Json doc = Json::object();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '[') {
      throw ConfigError("TOML line " + std::to_string(line_no) + ": tables are not supported");
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("TOML line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = line.substr(first, eq - first);
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (key.empty() || key.find_first_of(" .\t") != std::string::npos) {
      throw ConfigError("TOML line " + std::to_string(line_no) + ": bad key '" + key + "'");
    }
    if (doc.contains(key)) {
      throw ConfigError("TOML line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    const std::string rest = line.substr(eq + 1);
    TomlReader reader(rest, line_no);
    doc[key] = reader.value();
    reader.expect_end();
  }
  return doc;
}

// ---------------------------------------------------------------- binding

[[noreturn]] void type_error(const std::string& key, const char* want) {
  throw ConfigError("config key '" + key + "' must be " + want);
}

double as_number(const std::string& key, const Json& v) {
  if (!v.is_number()) type_error(key, "a number");
  return v.get<double>();
}

long long as_integer(const std::string& key, const Json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  type_error(key, "an integer");
}

std::string as_string(const std::string& key, const Json& v) {
  if (!v.is_string()) type_error(key, "a string");
  return v.get<std::string>();
}

bool as_bool(const std::string& key, const Json& v) {
  if (!v.is_boolean()) type_error(key, "true or false");
  return v.get<bool>();
}

std::vector<double> as_numbers(const std::string& key, const Json& v) {
  if (!v.is_array()) type_error(key, "an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(key, e));
  return out;
}

std::vector<std::string> as_strings(const std::string& key, const Json& v) {
  if (!v.is_array()) type_error(key, "an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(as_string(key, e));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const Json&)>;

template <typename T>
Setter number(T RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const Json& v) { c.*field = as_number(k, v); };
}
Setter optional_number(std::optional<double> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const Json& v) {
    if (v.is_null()) {
      c.*field = std::nullopt;
    } else {
      c.*field = as_number(k, v);
    }
  };
}
Setter integer(int RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const Json& v) {
    const long long n = as_integer(k, v);
    if (n < -2147483647LL || n > 2147483647LL) type_error(k, "a 32-bit integer");
    c.*field = static_cast<int>(n);
  };
}
Setter text(std::string RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const Json& v) { c.*field = as_string(k, v); };
}
Setter flag(bool RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const Json& v) { c.*field = as_bool(k, v); };
}
Setter numbers(std::vector<double> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const Json& v) { c.*field = as_numbers(k, v); };
}
Setter strings(std::vector<std::string> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const Json& v) { c.*field = as_strings(k, v); };
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"model",
       [](RunConfig& c, const std::string& k, const Json& v) {
         const std::string s = as_string(k, v);
         if (s == "singlet") {
           c.model = ModelKind::singlet;
         } else if (s == "triplet") {
           c.model = ModelKind::triplet;
         } else {
           type_error(k, "\"singlet\" or \"triplet\"");
         }
       }},
      {"d_ground_ghz", number(&RunConfig::d_ground_ghz)},
      {"g_parallel", number(&RunConfig::g_parallel)},
      {"g_perpendicular", number(&RunConfig::g_perpendicular)},
      {"microwave_ghz", number(&RunConfig::microwave_ghz)},
      {"field_mt", number(&RunConfig::field_mt)},
      {"misalignment_deg", number(&RunConfig::misalignment_deg)},
      {"activation_energy_mev", number(&RunConfig::activation_energy_mev)},
      {"overlap_ratio", number(&RunConfig::overlap_ratio)},
      {"rate_coefficient", optional_number(&RunConfig::rate_coefficient)},
      {"temperature_k", number(&RunConfig::temperature_k)},
      {"t2_sd_s", number(&RunConfig::t2_sd_s)},
      {"t2_id_s", number(&RunConfig::t2_id_s)},
      {"include_backgrounds", flag(&RunConfig::include_backgrounds)},
      {"transition", text(&RunConfig::transition)},
      {"excited_d_ghz", number(&RunConfig::excited_d_ghz)},
      {"excited_e_ghz", number(&RunConfig::excited_e_ghz)},
      {"excited_axis_polar_deg", number(&RunConfig::excited_axis_polar_deg)},
      {"triplet_rate_coefficient", optional_number(&RunConfig::triplet_rate_coefficient)},
      {"triplet_t2_model", text(&RunConfig::triplet_t2_model)},
      {"excited_lifetime_s", number(&RunConfig::excited_lifetime_s)},
      {"degeneracy_policy", text(&RunConfig::degeneracy_policy)},
      {"theta_min_deg", number(&RunConfig::theta_min_deg)},
      {"theta_max_deg", number(&RunConfig::theta_max_deg)},
      {"theta_steps", integer(&RunConfig::theta_steps)},
      {"temperature_min_k", number(&RunConfig::temperature_min_k)},
      {"temperature_max_k", number(&RunConfig::temperature_max_k)},
      {"temperature_steps", integer(&RunConfig::temperature_steps)},
      {"orientation_labels", strings(&RunConfig::orientation_labels)},
      {"t1_sat_s", numbers(&RunConfig::t1_sat_s)},
      {"t1_prefactor_hz", numbers(&RunConfig::t1_prefactor_hz)},
      {"t2_sat_s", numbers(&RunConfig::t2_sat_s)},
      {"t2_prefactor_hz", numbers(&RunConfig::t2_prefactor_hz)},
      {"theta_deg", number(&RunConfig::theta_deg)},
      {"polarization", number(&RunConfig::polarization)},
      {"recovery", text(&RunConfig::recovery)},
      {"t_min_s", number(&RunConfig::t_min_s)},
      {"t_max_s", number(&RunConfig::t_max_s)},
      {"points", integer(&RunConfig::points)},
      {"relative_noise", number(&RunConfig::relative_noise)},
      {"seed",
       [](RunConfig& c, const std::string& k, const Json& v) {
         const long long n = as_integer(k, v);
         if (n < 0) type_error(k, "a non-negative integer");
         c.seed = static_cast<std::uint64_t>(n);
       }},
      {"densities_cm3", numbers(&RunConfig::densities_cm3)},
      {"bath_temperatures_k", numbers(&RunConfig::bath_temperatures_k)},
      {"bath_prefactor_hz", number(&RunConfig::bath_prefactor_hz)},
      {"bath_t_sat_s", number(&RunConfig::bath_t_sat_s)},
      {"g1z", number(&RunConfig::g1z)},
      {"g2z", number(&RunConfig::g2z)},
      {"echo_form", text(&RunConfig::echo_form)},
      {"input", text(&RunConfig::input)},
      {"share_ea", flag(&RunConfig::share_ea)},
  };
  return table;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig parse_config(const std::string& text, ConfigFormat format) {
  Json doc;
  if (format == ConfigFormat::json) {
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("JSON: ") + e.what());
    }
  } else {
    doc = parse_toml(text);
  }
  if (!doc.is_object()) throw ConfigError("config document must be an object");

  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const auto& [name, set] : setters()) {
      if (name == key) {
        set(c, key, value);
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".json") return parse_config(buf.str(), ConfigFormat::json);
  if (ext == ".toml") return parse_config(buf.str(), ConfigFormat::toml);
  throw ConfigError("config '" + path + "' must end in .json or .toml");
}

void validate(const RunConfig& c) {
  require(c.d_ground_ghz >= 0.0, "d_ground_ghz must be >= 0");
  require(c.g_parallel > 0.0 && c.g_perpendicular > 0.0, "g values must be > 0");
  require(c.microwave_ghz > 0.0, "microwave_ghz must be > 0");
  require(c.field_mt >= 0.0, "field_mt must be >= 0");
  require(c.activation_energy_mev >= 0.0, "activation_energy_mev must be >= 0");
  require(c.overlap_ratio > 0.0, "overlap_ratio must be > 0");
  require(!c.rate_coefficient || *c.rate_coefficient >= 0.0, "rate_coefficient must be >= 0");
  require(!c.triplet_rate_coefficient || *c.triplet_rate_coefficient >= 0.0,
          "triplet_rate_coefficient must be >= 0");
  require(c.temperature_k > 0.0, "temperature_k must be > 0");
  require(c.t2_sd_s >= 0.0 && c.t2_id_s >= 0.0, "background T2 values must be >= 0");
  require(c.transition == "0<->+1" || c.transition == "-1<->0",
          "transition must be \"0<->+1\" or \"-1<->0\"");
  require(c.excited_d_ghz >= 0.0, "excited_d_ghz must be >= 0");
  require(c.triplet_t2_model == "full_dephasing" || c.triplet_t2_model == "partial_coherence",
          "triplet_t2_model must be \"full_dephasing\" or \"partial_coherence\"");
  require(c.excited_lifetime_s >= 0.0, "excited_lifetime_s must be >= 0");
  require(c.degeneracy_policy == "average" || c.degeneracy_policy == "raw",
          "degeneracy_policy must be \"average\" or \"raw\"");
  require(c.theta_steps >= 1 && c.theta_max_deg >= c.theta_min_deg, "bad theta grid");
  require(c.temperature_steps >= 1 && c.temperature_min_k > 0.0 &&
              c.temperature_max_k >= c.temperature_min_k,
          "bad temperature grid");
  const std::size_t n = c.orientation_labels.size();
  require(c.t1_sat_s.size() == n && c.t1_prefactor_hz.size() == n && c.t2_sat_s.size() == n &&
              c.t2_prefactor_hz.size() == n,
          "orientation arrays must all have the same length");
  for (std::size_t k = 0; k < n; ++k) {
    require(c.t1_sat_s[k] > 0.0 && c.t2_sat_s[k] > 0.0, "saturation times must be > 0");
    require(c.t1_prefactor_hz[k] >= 0.0 && c.t2_prefactor_hz[k] >= 0.0,
            "prefactors must be >= 0");
  }
  require(c.polarization >= 0.0 && c.polarization <= 1.0, "polarization must be in [0, 1]");
  require(c.recovery == "inversion" || c.recovery == "saturation",
          "recovery must be \"inversion\" or \"saturation\"");
  require(c.t_min_s > 0.0 && c.t_max_s > c.t_min_s, "need 0 < t_min_s < t_max_s");
  require(c.points >= 2, "points must be >= 2");
  require(c.relative_noise >= 0.0, "relative_noise must be >= 0");
  for (double d : c.densities_cm3) require(d > 0.0, "densities must be > 0");
  for (double t : c.bath_temperatures_k) require(t > 0.0, "bath temperatures must be > 0");
  require(c.bath_prefactor_hz >= 0.0 && c.bath_t_sat_s > 0.0, "bad bath flip-rate parameters");
  require(c.echo_form == "squared" || c.echo_form == "as_printed",
          "echo_form must be \"squared\" or \"as_printed\"");
}

}  // namespace sivrelax::cli
