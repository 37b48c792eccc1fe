#include "evolab/models/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace evolab::models {

namespace {

std::string located(const std::string& field, int line, const std::string& what) {
  std::ostringstream msg;
  msg << "config";
  if (line > 0) msg << " line " << line;
  if (!field.empty()) msg << " field '" << field << "'";
  msg << ": " << what;
  return msg.str();
}

struct Entry {
  std::string key;
  std::string text;
  int line = 0;
};

void flatten_yaml(const YAML::Node& node, const std::string& prefix, std::vector<Entry>& out) {
  int line = node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
  if (node.IsMap()) {
    for (const auto& kv : node) {
      std::string key = kv.first.as<std::string>();
      flatten_yaml(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (node.IsScalar()) {
    out.push_back({prefix, node.Scalar(), line});
  } else if (node.IsNull()) {
    throw ConfigError(prefix, line, "missing value");
  } else {
    throw ConfigError(prefix, line, "expected a scalar or a table");
  }
}

void flatten_json(const nlohmann::json& j, const std::string& prefix, std::vector<Entry>& out) {
  if (j.is_object()) {
    for (const auto& [key, val] : j.items()) flatten_json(val, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_string()) {
    out.push_back({prefix, j.get<std::string>(), 0});
  } else if (j.is_number() || j.is_boolean()) {
    out.push_back({prefix, j.dump(), 0});
  } else {
    throw ConfigError(prefix, 0, "expected a scalar or an object");
  }
}

double as_double(const Entry& e) {
  double v = 0.0;
  const char* end = e.text.data() + e.text.size();
  auto [ptr, ec] = std::from_chars(e.text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(e.key, e.line, "expected a finite number, got '" + e.text + "'");
  return v;
}

long long as_integer(const Entry& e) {
  long long v = 0;
  const char* end = e.text.data() + e.text.size();
  auto [ptr, ec] = std::from_chars(e.text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(e.key, e.line, "expected an integer, got '" + e.text + "'");
  return v;
}

using Setter = std::function<void(ModelConfig&, const Entry&)>;

Setter real(double ModelConfig::*m) {
  return [m](ModelConfig& c, const Entry& e) { c.*m = as_double(e); };
}
Setter integer(int ModelConfig::*m) {
  return [m](ModelConfig& c, const Entry& e) { c.*m = static_cast<int>(as_integer(e)); };
}

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s = {
      {"name", [](ModelConfig& c, const Entry& e) { c.name = e.text; }},
      {"model",
       [](ModelConfig& c, const Entry& e) {
         if (e.text == "heat_point") c.kind = ModelKind::HeatPoint;
         else if (e.text == "mixed_nonlocal") c.kind = ModelKind::MixedNonlocal;
         else if (e.text == "scalar") c.kind = ModelKind::Scalar;
         else throw ConfigError(e.key, e.line, "unknown model '" + e.text + "' (heat_point, mixed_nonlocal, scalar)");
       }},
      {"scheme", [](ModelConfig& c, const Entry& e) { c.scheme = e.text; }},
      {"grid.dimension", integer(&ModelConfig::dimension)},
      {"grid.n", integer(&ModelConfig::n)},
      {"grid.tau", real(&ModelConfig::tau)},
      {"grid.dt", real(&ModelConfig::dt)},
      {"grid.time_samples", integer(&ModelConfig::time_samples)},
      {"coefficients.a0", real(&ModelConfig::a0)},
      {"coefficients.a_rate", real(&ModelConfig::a_rate)},
      {"coefficients.b0", real(&ModelConfig::b0)},
      {"coefficients.psi_rate", real(&ModelConfig::psi_rate)},
      {"observation.point", real(&ModelConfig::c_point)},
      {"perturbation.alpha", real(&ModelConfig::alpha)},
      {"perturbation.b", real(&ModelConfig::b_pert)},
      {"scalar.a", real(&ModelConfig::a_scalar)},
      {"scalar.p", real(&ModelConfig::p_scalar)},
      {"exponents.p", real(&ModelConfig::p)},
      {"exponents.q", real(&ModelConfig::q)},
      {"exponents.theta", real(&ModelConfig::theta)},
      {"exponents.mu", real(&ModelConfig::mu)},
      {"exponents.nu", real(&ModelConfig::nu)},
      {"estimation.seed",
       [](ModelConfig& c, const Entry& e) {
         long long v = as_integer(e);
         if (v < 0) throw ConfigError(e.key, e.line, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"estimation.probes", integer(&ModelConfig::probes)},
  };
  return s;
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, 0, what);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

ConfigError::ConfigError(const std::string& field, int line, const std::string& what)
    : Error(located(field, line, what)), field_(field), line_(line) {}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::HeatPoint: return "heat_point";
    case ModelKind::MixedNonlocal: return "mixed_nonlocal";
    case ModelKind::Scalar: return "scalar";
  }
  return "?";
}

void validate(const ModelConfig& c) {
  require(c.dimension == 1 || c.dimension == 2, "grid.dimension", "must be 1 or 2");
  require(c.n >= 5, "grid.n", "need at least 5 nodes per direction");
  require(c.tau > 0, "grid.tau", "must be positive");
  require(c.dt > 0 && c.dt <= c.tau, "grid.dt", "must lie in (0, tau]");
  require(c.time_samples >= 2, "grid.time_samples", "need at least 2 samples");
  require(c.scheme == "ie" || c.scheme == "cn", "scheme", "must be 'ie' or 'cn'");
  require(c.p > 1, "exponents.p", "must exceed 1");
  require(c.q >= 1, "exponents.q", "must be at least 1");
  require(c.mu > 1, "exponents.mu", "must exceed 1");
  require(c.nu >= 1, "exponents.nu", "must be at least 1");
  require(c.theta > 1 && c.theta <= c.mu, "exponents.theta",
          "theta = " + fmt(c.theta) + " outside the admissible range (1, mu] = (1, " + fmt(c.mu) + "]");
  require(c.probes >= 1, "estimation.probes", "need at least one probe");
  switch (c.kind) {
    case ModelKind::HeatPoint:
      require(c.alpha > 0 && c.alpha < 1.0 / c.p, "perturbation.alpha",
              "alpha = " + fmt(c.alpha) + " must lie in (0, 1/p) = (0, " + fmt(1.0 / c.p) + ")");
      require(c.a0 > 0 && c.a0 + c.a_rate * c.tau > 0, "coefficients.a0", "a(t) must stay positive on [0, tau]");
      require(c.c_point >= 0 && c.c_point <= 1, "observation.point", "must lie in [0, 1]");
      break;
    case ModelKind::MixedNonlocal:
      require(c.alpha > 0 && c.alpha < 0.5, "perturbation.alpha",
              "alpha = " + fmt(c.alpha) + " must lie in (0, 1/2)");
      break;
    case ModelKind::Scalar:
      require(c.a_scalar >= 0, "scalar.a", "must be non-negative");
      require(c.a_scalar + c.p_scalar >= 0, "scalar.p", "a + p must be non-negative");
      break;
  }
}

ModelConfig parse_config(const std::string& text) {
  std::vector<Entry> entries;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("", 0, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("", 0, "top level must be an object");
    flatten_json(j, "", entries);
  } else {
    YAML::Node root;
    try {
      root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
      throw ConfigError("", e.mark.line + 1, e.msg);
    }
    if (root.IsNull()) throw ConfigError("", 0, "empty configuration");
    if (!root.IsMap()) throw ConfigError("", root.Mark().line + 1, "top level must be a table");
    flatten_yaml(root, "", entries);
  }
  ModelConfig cfg;
  const auto& s = schema();
  // Model first: its defaults decide the interpretation of everything else.
  for (const auto& e : entries)
    if (e.key == "model") s.at("model")(cfg, e);
  for (const auto& e : entries) {
    auto it = s.find(e.key);
    if (it == s.end()) throw ConfigError(e.key, e.line, "unknown key");
    it->second(cfg, e);
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    // attach the source line of the offending field when the file sets it
    for (const auto& en : entries)
      if (en.key == e.field() && en.line > 0) {
        std::string what = e.what();
        throw ConfigError(e.field(), en.line, what.substr(what.find(": ") + 2));
      }
    throw;
  }
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["model"] = to_string(c.kind);
  j["scheme"] = c.scheme;
  j["grid"] = {{"dimension", c.dimension}, {"n", c.n}, {"tau", c.tau}, {"dt", c.dt}, {"time_samples", c.time_samples}};
  j["coefficients"] = {{"a0", c.a0}, {"a_rate", c.a_rate}, {"b0", c.b0}, {"psi_rate", c.psi_rate}};
  j["observation"] = {{"point", c.c_point}};
  j["perturbation"] = {{"alpha", c.alpha}, {"b", c.b_pert}};
  j["scalar"] = {{"a", c.a_scalar}, {"p", c.p_scalar}};
  j["exponents"] = {{"p", c.p}, {"q", c.q}, {"theta", c.theta}, {"mu", c.mu}, {"nu", c.nu}};
  j["estimation"] = {{"seed", c.seed}, {"probes", c.probes}};
  return j;
}

std::string config_hash(const ModelConfig& cfg) {
  std::string canon = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace evolab::models
