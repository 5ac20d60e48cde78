// mdheston: command-line front end.
//
//   mdheston mgf    --config run.json      randomised MGF over the (t, u) grid
//   mdheston rate   --config run.json      regime and rate function over the x grid
//   mdheston verify --experiment ac3       convergence report(s), exit 1 on failure
//   mdheston price  --config run.json      call prices over the (t, k) grid
//   mdheston impvol --config run.json      implied volatilities over the (t, k) grid
//
// Exit codes: 0 success (all verdicts pass), 1 failure, 2 invalid configuration.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mdheston/mdheston.hpp"
#include "mdheston/run_config.hpp"
#include "mdheston/table.hpp"

using namespace mdheston;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;

// Runs fn(i) for i in [0, n) on `jobs` threads; callers write results by index.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string num(double v) { return format_number(v); }

Table new_table(const std::string& command, const RunConfig& cfg) {
  Table t;
  t.header.emplace_back("command", command);
  t.header.emplace_back("config", to_json(cfg).dump());
  return t;
}

json cell_json(const std::string& s) {
  try {
    const double v = parse_number(s);
    if (std::isfinite(v)) return v;
  } catch (const std::invalid_argument&) {
  }
  return s;
}

void emit(const Table& t, const RunConfig& cfg) {
  std::ostringstream text;
  if (cfg.format == "json") {
    json j;
    for (const auto& [k, v] : t.header) {
      if (k == "config") j["config"] = json::parse(v);
      else j[k] = cell_json(v);
    }
    j["columns"] = t.columns;
    j["rows"] = json::array();
    for (const auto& row : t.rows) {
      json r = json::array();
      for (const auto& c : row) r.push_back(cell_json(c));
      j["rows"].push_back(r);
    }
    text << j.dump(2) << '\n';
  } else {
    write_csv(text, t);
  }
  if (cfg.out.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("cannot write " + cfg.out);
    f << text.str();
  }
}

HestonParams params_of(const RunConfig& c) { return HestonParams(c.kappa, c.theta, c.xi, c.rho); }

int cmd_mgf(const RunConfig& cfg) {
  const auto p = params_of(cfg);
  const auto law = make_law(cfg.law);
  auto t = new_table("mgf", cfg);
  t.columns = {"t", "u", "re", "im", "defined"};
  const std::size_t nu = cfg.u_grid.size();
  t.rows.resize(cfg.t_grid.size() * nu);
  parallel_for(t.rows.size(), cfg.jobs, [&](std::size_t i) {
    const double tt = cfg.t_grid[i / nu], u = cfg.u_grid[i % nu];
    const auto m = randomised_mgf(p, law, tt, u);
    t.rows[i] = {num(tt), num(u), m ? num(m->real()) : "nan", m ? num(m->imag()) : "nan", m ? "1" : "0"};
  });
  emit(t, cfg);
  return exit_ok;
}

// Fenchel-Young on a grid and the first-order condition at the maximiser.
bool duality_holds(const ThinTailConstants& c, const LimitCgf& lambda, double x, const ConjugateResult& r) {
  const BoundaryCgf f(c, lambda);
  if (x == 0.0) return r.value == 0.0;
  if (std::abs(f.derivative(r.maximiser) - x) > 1e-8 * std::max(1.0, std::abs(x))) return false;
  const double lo = std::max(lambda.u_minus(), -1e3), hi = std::min(lambda.u_plus(), 1e3);
  for (int i = 1; i < 2000; ++i) {
    const double u = lo + (hi - lo) * i / 2000.0;
    if (u * x - f.value(u) > r.value + 1e-9 * std::max(1.0, std::abs(r.value))) return false;
  }
  return true;
}

int cmd_rate(const RunConfig& cfg) {
  const auto p = params_of(cfg);
  const auto law = make_law(cfg.law);
  if (!cfg.regime_gamma) throw ConfigError("rate: regime.gamma is required");
  MdpRegime regime;
  try {
    regime = make_regime(classify_tail(law), p, *cfg.regime_gamma);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto t = new_table("rate", cfg);
  const char* kinds[] = {"bounded_support", "thin_tail", "fat_tail"};
  t.header.emplace_back("law_class", kinds[static_cast<int>(regime.law_class.kind)]);
  t.header.emplace_back("gamma", num(regime.gamma));
  t.header.emplace_back("alpha", num(regime.alpha));
  t.header.emplace_back("speed", "t^" + num(regime.gamma));
  t.header.emplace_back("scaling", "X_t / t^" + num(regime.alpha));
  t.header.emplace_back("description", regime.description);
  t.columns = {"x", "rate", "duality_check"};
  t.rows.resize(cfg.x_grid.size());
  std::optional<ThinTailConstants> c;
  if (regime.boundary) c = thin_tail_constants(regime.law_class);
  const LimitCgf lambda(p);
  parallel_for(t.rows.size(), cfg.jobs, [&](std::size_t i) {
    const double x = cfg.x_grid[i];
    if (regime.boundary) {
      const auto r = thin_tail_rate_hi(*c, lambda, x);
      t.rows[i] = {num(x), num(r.value), duality_holds(*c, lambda, x, r) ? "pass" : "fail"};
    } else {
      t.rows[i] = {num(x), num(regime.rate(x)), "n/a"};
    }
  });
  emit(t, cfg);
  const bool ok = std::none_of(t.rows.begin(), t.rows.end(), [](const auto& r) { return r[2] == "fail"; });
  if (!ok) std::cerr << json{{"failures", {"duality_check"}}}.dump() << '\n';
  return ok ? exit_ok : exit_failure;
}

int cmd_price(const RunConfig& cfg) {
  const auto p = params_of(cfg);
  const auto law = make_law(cfg.law);
  const bool fourier = cfg.oracle != "monte_carlo";
  const bool mc = cfg.oracle != "fourier";
  auto t = new_table("price", cfg);
  t.columns = {"t", "k"};
  if (fourier) t.columns.insert(t.columns.end(), {"fourier", "fourier_error"});
  if (mc) t.columns.insert(t.columns.end(), {"monte_carlo", "std_error"});
  t.columns.push_back("status");
  const std::size_t nk = cfg.x_grid.size();
  t.rows.resize(cfg.t_grid.size() * nk);
  for (std::size_t it = 0; it < cfg.t_grid.size(); ++it) {
    const double tt = cfg.t_grid[it];
    std::optional<PathSample> paths;
    if (mc) {
      McConfig m{cfg.mc_paths, cfg.mc_steps, cfg.mc_scheme, cfg.seed + it, cfg.jobs};
      paths = simulate_paths(p, law, tt, m);
    }
    parallel_for(nk, fourier ? cfg.jobs : 1, [&](std::size_t ik) {
      const double k = cfg.x_grid[ik];
      std::vector<std::string> row = {num(tt), num(k)};
      std::string status = "ok";
      if (fourier) {
        try {
          const auto f = fourier_call(p, law, tt, k);
          row.insert(row.end(), {num(f.value), num(f.error)});
        } catch (const std::exception& e) {
          row.insert(row.end(), {"nan", "nan"});
          status = e.what();
        }
      }
      if (mc) {
        const auto e = mc_call(*paths, k);
        row.insert(row.end(), {num(e.value), num(e.error)});
      }
      row.push_back(status);
      t.rows[it * nk + ik] = std::move(row);
    });
  }
  emit(t, cfg);
  return exit_ok;
}

int cmd_impvol(const RunConfig& cfg) {
  const auto p = params_of(cfg);
  const auto law = make_law(cfg.law);
  auto t = new_table("impvol", cfg);
  t.columns = {"t", "k", "call_price", "implied_vol", "status"};
  const std::size_t nk = cfg.x_grid.size();
  t.rows.resize(cfg.t_grid.size() * nk);
  parallel_for(t.rows.size(), cfg.jobs, [&](std::size_t i) {
    const double tt = cfg.t_grid[i / nk], k = cfg.x_grid[i % nk];
    try {
      // The out-of-the-money side keeps relative accuracy for tiny time values.
      const auto otm = fourier_otm_price(p, law, tt, k);
      const double w = implied_total_variance_otm(otm.value, k);
      const double call = k < 0.0 ? otm.value - std::expm1(k) : otm.value;
      t.rows[i] = {num(tt), num(k), num(call), num(std::sqrt(w / tt)), "ok"};
    } catch (const std::exception& e) {
      t.rows[i] = {num(tt), num(k), "nan", "nan", e.what()};
    }
  });
  emit(t, cfg);
  return exit_ok;
}

int cmd_verify(const RunConfig& cfg) {
  std::vector<const ExperimentEntry*> chosen;
  if (cfg.experiment == "all") {
    for (const auto& e : experiments()) chosen.push_back(&e);
  } else {
    try {
      chosen.push_back(&find_experiment(cfg.experiment));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  ExperimentOptions opt;
  opt.seed = cfg.seed;
  opt.workers = cfg.jobs;
  auto t = new_table("verify", cfg);
  std::vector<std::string> failures;
  std::vector<ExperimentReport> reports;
  for (const auto* e : chosen) {
    ExperimentReport r;
    try {
      r = e->run(opt);
    } catch (const std::exception& ex) {
      r.id = e->id;
      r.name = e->name;
      r.verdict = "fail";
      r.detail = std::string("oracle failure: ") + ex.what();
    }
    t.header.emplace_back(r.id, r.verdict + " (" + r.name + "): " + r.detail);
    if (!r.pass) failures.push_back(r.id);
    reports.push_back(std::move(r));
  }
  if (reports.size() == 1) {
    const auto& r = reports.front();
    t.columns = r.columns;
    t.columns.push_back("trend");
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      std::vector<std::string> row;
      for (double v : r.rows[i]) row.push_back(num(v));
      row.push_back(i < r.row_verdicts.size() ? r.row_verdicts[i] : "");
      t.rows.push_back(std::move(row));
    }
  } else {
    t.columns = {"experiment", "row", "quantity", "value", "trend"};
    for (const auto& r : reports) {
      for (std::size_t i = 0; i < r.rows.size(); ++i) {
        for (std::size_t j = 0; j < r.rows[i].size(); ++j) {
          t.rows.push_back({r.id, std::to_string(i), r.columns[j], num(r.rows[i][j]),
                            i < r.row_verdicts.size() ? r.row_verdicts[i] : ""});
        }
      }
    }
  }
  emit(t, cfg);
  if (!failures.empty()) {
    std::cerr << json{{"failures", failures}}.dump() << '\n';
    return exit_failure;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-time asymptotics of the randomised Heston model"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out, format, experiment;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out, "output file (default stdout)");
  app.add_option("--format", format, "csv or json");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--jobs", jobs, "worker threads");
  auto* mgf = app.add_subcommand("mgf", "randomised MGF over the (t, u) grid");
  auto* rate = app.add_subcommand("rate", "regime metadata and rate function over the x grid");
  auto* verify = app.add_subcommand("verify", "convergence reports for the acceptance experiments");
  verify->add_option("--experiment", experiment, "ac1..ac10, an experiment name, or all");
  auto* price = app.add_subcommand("price", "call prices over the (t, k) grid");
  auto* impvol = app.add_subcommand("impvol", "implied volatilities over the (t, k) grid");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot read " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
      }
      cfg = parse_run_config(j);
    }
    if (!out.empty()) cfg.out = out;
    if (!format.empty()) cfg.format = format;
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!experiment.empty()) cfg.experiment = experiment;
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return exit_config;
  }

  try {
    if (mgf->parsed()) return cmd_mgf(cfg);
    if (rate->parsed()) return cmd_rate(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (price->parsed()) return cmd_price(cfg);
    if (impvol->parsed()) return cmd_impvol(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_failure;
}
