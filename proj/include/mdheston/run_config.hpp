#ifndef MDHESTON_RUN_CONFIG_HPP
#define MDHESTON_RUN_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdheston/heston.hpp"
#include "mdheston/laws.hpp"
#include "mdheston/monte_carlo.hpp"
#include "mdheston/sharp_expansion.hpp"

namespace mdheston {

/// Raised for anything wrong with a run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LawSpec {
  std::string name = "gamma";
  nlohmann::json params = {{"shape", 2.0}, {"rate", 3.0}};
};

struct RunConfig {
  double kappa = 1.0, theta = 0.04, xi = 0.5, rho = -0.7;
  LawSpec law;
  std::optional<double> regime_gamma;  // speed exponent for `rate`
  std::vector<double> t_grid = {0.5};
  std::vector<double> x_grid = {-0.1, 0.0, 0.1};
  std::vector<double> u_grid = {-1.0, 0.0, 0.5, 1.0};
  double g_beta = 0.25;
  std::size_t mc_paths = 100'000;
  std::size_t mc_steps = 64;
  McScheme mc_scheme = McScheme::full_truncation_euler;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::string oracle = "fourier";  // price: fourier, monte_carlo or both
  std::string experiment = "all";  // verify: ac1..ac10, a name, or all
  std::string format = "csv";
  std::string out;  // empty: stdout
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline double get_number(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

inline std::vector<double> get_grid(const nlohmann::json& j, const std::string& key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.empty()) throw ConfigError(key + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw ConfigError(key + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::size_t get_count(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 1) {
    throw ConfigError(where + "." + key + ": expected a positive integer");
  }
  return j.at(key).get<std::size_t>();
}

}  // namespace detail

inline RandomisationLaw make_law(const LawSpec& spec) {
  const auto& p = spec.params;
  auto num = [&](const char* k) { return detail::get_number(p, k, "law." + spec.name); };
  try {
    if (spec.name == "point_mass") {
      detail::reject_unknown(p, {"v0"}, "law");
      return RandomisationLaw::point_mass(num("v0"));
    }
    if (spec.name == "uniform") {
      detail::reject_unknown(p, {"a", "b"}, "law");
      return RandomisationLaw::uniform(num("a"), num("b"));
    }
    if (spec.name == "folded_gaussian") {
      detail::reject_unknown(p, {"sigma"}, "law");
      return RandomisationLaw::folded_gaussian(num("sigma"));
    }
    if (spec.name == "gamma") {
      detail::reject_unknown(p, {"shape", "rate"}, "law");
      return RandomisationLaw::gamma(num("shape"), num("rate"));
    }
    if (spec.name == "noncentral_chi_squared") {
      detail::reject_unknown(p, {"df", "noncentrality", "scale"}, "law");
      return RandomisationLaw::noncentral_chi_squared(num("df"), num("noncentrality"), num("scale"));
    }
    if (spec.name == "stretched_exponential") {
      detail::reject_unknown(p, {"l1", "l2"}, "law");
      return RandomisationLaw::stretched_exponential(num("l1"), num("l2"));
    }
  } catch (const nlohmann::json::out_of_range&) {
    throw ConfigError("law." + spec.name + ": missing parameter");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("law: unknown name '" + spec.name + "'");
}

/// Parses and validates a configuration document; unknown keys are errors.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig c;
  detail::reject_unknown(j, {"heston", "law", "regime", "t_grid", "x_grid", "u_grid", "g", "mc", "oracle",
                             "experiment", "format", "out", "seed", "jobs"},
                         "config");
  try {
    if (j.contains("heston")) {
      const auto& h = j["heston"];
      detail::reject_unknown(h, {"kappa", "theta", "xi", "rho"}, "heston");
      if (h.contains("kappa")) c.kappa = detail::get_number(h, "kappa", "heston");
      if (h.contains("theta")) c.theta = detail::get_number(h, "theta", "heston");
      if (h.contains("xi")) c.xi = detail::get_number(h, "xi", "heston");
      if (h.contains("rho")) c.rho = detail::get_number(h, "rho", "heston");
    }
    if (j.contains("law")) {
      const auto& l = j["law"];
      detail::reject_unknown(l, {"name", "params"}, "law");
      c.law.name = detail::get_as<std::string>(l, "name", "law");
      c.law.params = l.contains("params") ? l["params"] : nlohmann::json::object();
    }
    if (j.contains("regime")) {
      const auto& r = j["regime"];
      detail::reject_unknown(r, {"gamma"}, "regime");
      if (r.contains("gamma")) c.regime_gamma = detail::get_number(r, "gamma", "regime");
    }
    if (j.contains("t_grid")) c.t_grid = detail::get_grid(j, "t_grid");
    if (j.contains("x_grid")) c.x_grid = detail::get_grid(j, "x_grid");
    if (j.contains("u_grid")) c.u_grid = detail::get_grid(j, "u_grid");
    if (j.contains("g")) {
      const auto& g = j["g"];
      detail::reject_unknown(g, {"beta"}, "g");
      if (g.contains("beta")) c.g_beta = detail::get_number(g, "beta", "g");
    }
    if (j.contains("mc")) {
      const auto& m = j["mc"];
      detail::reject_unknown(m, {"paths", "steps", "scheme"}, "mc");
      if (m.contains("paths")) c.mc_paths = detail::get_count(m, "paths", "mc");
      if (m.contains("steps")) c.mc_steps = detail::get_count(m, "steps", "mc");
      if (m.contains("scheme")) {
        const auto s = detail::get_as<std::string>(m, "scheme", "mc");
        if (s == "full_truncation_euler") c.mc_scheme = McScheme::full_truncation_euler;
        else if (s == "exact_cir") c.mc_scheme = McScheme::exact_cir;
        else throw ConfigError("mc.scheme: expected full_truncation_euler or exact_cir");
      }
    }
    if (j.contains("oracle")) c.oracle = detail::get_as<std::string>(j, "oracle", "config");
    if (j.contains("experiment")) c.experiment = detail::get_as<std::string>(j, "experiment", "config");
    if (j.contains("format")) c.format = detail::get_as<std::string>(j, "format", "config");
    if (j.contains("out")) c.out = detail::get_as<std::string>(j, "out", "config");
    if (j.contains("seed")) c.seed = detail::get_as<std::uint64_t>(j, "seed", "config");
    if (j.contains("jobs")) c.jobs = static_cast<unsigned>(detail::get_count(j, "jobs", "config"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

/// Checks everything that can be checked before running; throws ConfigError.
inline void validate(const RunConfig& c) {
  try {
    (void)HestonParams(c.kappa, c.theta, c.xi, c.rho);
    (void)RescalingG::power(c.g_beta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  make_law(c.law);
  for (double t : c.t_grid) {
    if (!(t > 0.0 && std::isfinite(t))) throw ConfigError("t_grid: maturities must be positive");
  }
  for (double x : c.x_grid) {
    if (!std::isfinite(x)) throw ConfigError("x_grid: values must be finite");
  }
  for (double u : c.u_grid) {
    if (!std::isfinite(u)) throw ConfigError("u_grid: values must be finite");
  }
  if (c.format != "csv" && c.format != "json") throw ConfigError("format: expected csv or json");
  if (c.oracle != "fourier" && c.oracle != "monte_carlo" && c.oracle != "both") {
    throw ConfigError("oracle: expected fourier, monte_carlo or both");
  }
  if (c.jobs < 1) throw ConfigError("jobs: must be >= 1");
}

/// The effective configuration as a document, for report headers.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["heston"] = {{"kappa", c.kappa}, {"theta", c.theta}, {"xi", c.xi}, {"rho", c.rho}};
  j["law"] = {{"name", c.law.name}, {"params", c.law.params}};
  if (c.regime_gamma) j["regime"] = {{"gamma", *c.regime_gamma}};
  j["t_grid"] = c.t_grid;
  j["x_grid"] = c.x_grid;
  j["u_grid"] = c.u_grid;
  j["g"] = {{"beta", c.g_beta}};
  j["mc"] = {{"paths", c.mc_paths},
             {"steps", c.mc_steps},
             {"scheme", c.mc_scheme == McScheme::exact_cir ? "exact_cir" : "full_truncation_euler"}};
  j["oracle"] = c.oracle;
  j["experiment"] = c.experiment;
  j["format"] = c.format;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  return j;
}

}  // namespace mdheston

#endif  // MDHESTON_RUN_CONFIG_HPP
