// evolab: runs model pipelines, convergence ladders and report comparisons.
//
//   evolab run --config model.yaml --out out/ [--scheme ie|cn] [--ladder N] [--seed N]
//              [--jobs N] [--verdicts all|none|name,name,...]
//   evolab convergence --config model.yaml --rungs N --out out/ [--refine-space]
//   evolab compare a/summary.json b/summary.json
//
// Exit codes: 0 pass, 1 verdict failure (or incomplete ladder), 2 usage/config error.
// EVOFAM_BUDGET_SECONDS caps the wall-clock time spent on ladders.

#include "evolab/error.hpp"
#include "evolab/models/config.hpp"
#include "evolab/models/convergence.hpp"
#include "evolab/models/models.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evolab;

namespace {

constexpr const char* kSchema = "evolab-report/1";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double budget_seconds() {
  const char* env = std::getenv("EVOFAM_BUDGET_SECONDS");
  if (!env || !*env) return 0.0;
  char* end = nullptr;
  double v = std::strtod(env, &end);
  if (*end != '\0' || !(v > 0)) throw UsageError(std::string("EVOFAM_BUDGET_SECONDS must be a positive number, got '") + env + "'");
  return v;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + p.string() + "'");
  out << text;
}

// CSV with a provenance header: one "# column: source" line per column.
class Csv {
 public:
  Csv(std::string hash, std::vector<std::pair<std::string, std::string>> columns) : cols_(std::move(columns)) {
    out_ << "# manifest " << hash << "\n";
    for (const auto& [name, src] : cols_) out_ << "# " << name << ": " << src << "\n";
    for (std::size_t i = 0; i < cols_.size(); ++i) out_ << (i ? "," : "") << cols_[i].first;
    out_ << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::vector<std::pair<std::string, std::string>> cols_;
  std::ostringstream out_;
};

std::set<std::string> verdict_filter(const std::string& selection, const models::ExperimentReport& r) {
  std::set<std::string> known, chosen;
  for (const auto& v : r.verdicts) known.insert(v.name);
  if (selection == "all") return known;
  if (selection == "none") return {};
  std::stringstream ss(selection);
  for (std::string name; std::getline(ss, name, ',');) {
    if (!known.count(name)) {
      std::string list;
      for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
      throw UsageError("--verdicts: unknown verdict '" + name + "' for this model (known: " + list + ")");
    }
    chosen.insert(name);
  }
  return chosen;
}

void write_ladder(const fs::path& dir, const std::string& hash, const models::ConvergenceReport& c) {
  Csv csv(hash, {{"dt", "time step of the rung"},
                 {"n", "spatial dofs"},
                 {"propagator_error", "max_t ||U_dt(t,0) - expm(-tA(0))|| / ||expm||, frozen A(0)"},
                 {"propagator_order", "log2 ratio of consecutive propagator errors"},
                 {"discrepancy", "max ||V_volterra - V_direct|| on the tau/8 report grid"},
                 {"discrepancy_order", "log2 ratio of consecutive discrepancies"},
                 {"duhamel_nodes", "trapezoid cells of the Duhamel memory integral"},
                 {"duhamel_residual", "Duhamel identity residual, A(0) vs A(tau), lowest mode"},
                 {"duhamel_order", "log2 ratio of consecutive residuals"},
                 {"gamma", "admissibility constant of U on [0, tau']"},
                 {"gamma_drift", "relative change of gamma from the previous rung"}});
  for (const auto& g : c.rungs)
    csv.row({num(g.dt), std::to_string(g.n), num(g.propagator_error), num(g.propagator_order), num(g.discrepancy),
             num(g.discrepancy_order), std::to_string(g.duhamel_nodes), num(g.duhamel_residual), num(g.duhamel_order),
             num(g.gamma), num(g.gamma_drift)});
  write_text(dir / "ladder.csv", csv.str());
}

void write_run_outputs(const fs::path& dir, const std::string& hash, const models::ExperimentReport& r) {
  const std::string model = r.model;
  auto gamma_row = [&](Csv& csv, const std::string& what, const admiss::AdmissibilityReport& g) {
    csv.row({model, what, num(g.theta), num(g.s), num(g.tau_prime), num(g.gamma_hat), g.method, num(g.dt),
             std::to_string(g.n)});
  };
  Csv gamma(hash, {{"model", "model kind"},
                   {"quantity", "gamma_U / gamma_V: admissibility of C for U and V; global: sup over anchors"},
                   {"theta", "admissibility exponent"},
                   {"s", "window start"},
                   {"tau_prime", "window end"},
                   {"gamma_hat", "measured constant"},
                   {"method", "svd-exact or probe-lower-bound"},
                   {"dt", "time step"},
                   {"n", "spatial dofs"}});
  gamma_row(gamma, "gamma_U", r.invariance.forward.gamma_from);
  gamma_row(gamma, "gamma_V", r.invariance.forward.gamma_to);
  if (r.global) gamma_row(gamma, "global", r.global->report);
  write_text(dir / "gamma.csv", gamma.str());

  Csv h2(hash, {{"s", "window start"},
                {"tau_prime", "window end"},
                {"mu", "smallness exponent"},
                {"c_hat", "sup over x in D of (sum h ||P U x||^mu)^{1/mu} / ||x||"},
                {"sliver", "estimated mass of the omitted first cell"},
                {"method", "svd-exact or probe-lower-bound"}});
  for (std::size_t i = 0; i < r.h2.c_hat.size(); ++i)
    h2.row({num(r.h2.intervals[i].first), num(r.h2.intervals[i].second), num(r.h2.mu), num(r.h2.c_hat[i]),
            num(r.h2.sliver[i]), r.h2.method});
  write_text(dir / "h2.csv", h2.str());

  Csv mr(hash, {{"direction", "forward: A -> A+P; converse: A+P -> A; gap: ||V-U||_MR chain"},
                {"kappa", "maximal-regularity constant of the target family (probe lower bound)"},
                {"c_hat", "perturbation smallness constant along the source family"},
                {"c_norm", "||C||_{D->Y}"},
                {"lhs", "measured left side"},
                {"rhs", "assembled bound"},
                {"pass", "lhs <= rhs"}});
  for (auto [name, d] : {std::pair{"forward", &r.invariance.forward}, std::pair{"converse", &r.invariance.converse}})
    mr.row({name, num(d->kappa), num(d->c_hat), num(d->c_norm), num(d->gamma_to.gamma_hat), num(d->delta),
            d->verdict ? "1" : "0"});
  mr.row({"gap", num(r.gap.kappa), num(r.gap.c_hat), "", num(r.gap.gap), num(r.gap.product), r.gap.holds ? "1" : "0"});
  write_text(dir / "mr.csv", mr.str());

  Csv disc(hash, {{"quantity", "volterra: max ||V_volterra - V_direct||; contraction_L: Neumann-series map norm"},
                  {"value", "measured"},
                  {"bound", "reference value (tolerance or Hoelder bound)"}});
  if (r.volterra_discrepancy >= 0) disc.row({"volterra", num(r.volterra_discrepancy), "0.001"});
  for (std::size_t i = 0; i < r.contraction.lengths.size(); ++i)
    disc.row({"contraction_" + num(r.contraction.lengths[i]), num(r.contraction.norms[i]), num(r.contraction.bounds[i])});
  write_text(dir / "discrepancy.csv", disc.str());

  Csv plot(hash, {{"t", "stepper node"},
                  {"integrand_U", "||C U(t,0)x||^theta, x the lowest reference mode"},
                  {"integrand_V", "||C V(t,0)x||^theta"}});
  for (const auto& row : r.integrand) plot.row({num(row[0]), num(row[1]), num(row[2])});
  write_text(dir / "integrand.csv", plot.str());
}

int cmd_run(const std::string& config_path, const std::string& out, const std::string& scheme, int ladder,
            std::optional<std::uint64_t> seed, int jobs, const std::string& verdicts) {
  auto cfg = models::load_config(config_path);
  if (!scheme.empty()) cfg.scheme = scheme;
  if (seed) cfg.seed = *seed;
  models::validate(cfg);
  if (ladder != 0 && ladder < 3) throw UsageError("--ladder needs at least 3 rungs (got " + std::to_string(ladder) + ")");
  const double budget = budget_seconds();

  json manifest_core = {{"config_hash", models::config_hash(cfg)}, {"ladder", ladder}};
  const std::string hash = fnv1a(manifest_core.dump());
  fs::path dir(out);
  fs::create_directories(dir);

  models::PipelineOptions po;
  po.jobs = jobs;
  auto report = models::run_pipeline(models::build_bundle(cfg), po);
  auto chosen = verdict_filter(verdicts, report);

  json summary = {{"schema", kSchema}, {"manifest_hash", hash}, {"report", models::to_json(report)}};
  write_run_outputs(dir, hash, report);
  bool ladder_complete = true;
  if (ladder > 0) {
    auto c = models::convergence_study(cfg, ladder, budget);
    summary["ladder"] = models::to_json(c);
    write_ladder(dir, hash, c);
    ladder_complete = c.complete;
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  json manifest = {{"config_path", fs::absolute(config_path).string()},
                   {"config_hash", models::config_hash(cfg)},
                   {"manifest_hash", hash},
                   {"seed", cfg.seed},
                   {"scheme", cfg.scheme},
                   {"ladder", ladder},
                   {"output_dir", fs::absolute(dir).string()},
                   {"timestamp", timestamp()}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& [stage, sec] : report.seconds) std::cerr << "  " << stage << ": " << std::fixed << std::setprecision(2) << sec << " s\n";
  int status = 0;
  for (const auto& v : report.verdicts) {
    bool counted = chosen.count(v.name) > 0;
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << num(v.lhs) << " " << v.relation << " " << num(v.rhs)
              << "  (" << v.detail << ")" << (counted ? "" : " [not enforced]") << "\n";
    if (counted && !v.pass) status = 1;
  }
  if (!ladder_complete) {
    std::cout << "INCOMPLETE ladder: wall-clock budget of " << budget << " s exhausted\n";
    status = 1;
  }
  return status;
}

int cmd_convergence(const std::string& config_path, const std::string& out, int rungs, bool refine_space,
                    const std::string& scheme) {
  auto cfg = models::load_config(config_path);
  if (!scheme.empty()) cfg.scheme = scheme;
  models::validate(cfg);
  if (rungs < 3) throw UsageError("convergence needs at least 3 rungs (got " + std::to_string(rungs) + ")");
  const double budget = budget_seconds();
  json core = {{"config_hash", models::config_hash(cfg)}, {"ladder", rungs}, {"refine_space", refine_space}};
  const std::string hash = fnv1a(core.dump());
  fs::path dir(out);
  fs::create_directories(dir);
  auto c = models::convergence_study(cfg, rungs, budget, refine_space);
  write_ladder(dir, hash, c);
  json summary = {{"schema", kSchema}, {"manifest_hash", hash}, {"ladder", models::to_json(c)}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  for (const auto& g : c.rungs)
    std::cout << "dt " << num(g.dt) << "  propagator " << num(g.propagator_error) << " (order " << num(g.propagator_order)
              << ")  volterra " << num(g.discrepancy) << " (order " << num(g.discrepancy_order) << ")  duhamel "
              << num(g.duhamel_residual) << "  gamma " << num(g.gamma) << "\n";
  if (!c.complete) {
    std::cout << "INCOMPLETE: budget of " << budget << " s exhausted after " << c.rungs.size() << " of " << rungs
              << " rungs\n";
    return 1;
  }
  return 0;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void diff_numbers(const json& a, const json& b, const std::string& path, std::vector<std::string>& lines) {
  if (a.is_object() && b.is_object()) {
    for (const auto& [k, v] : a.items())
      if (b.contains(k)) diff_numbers(v, b[k], path + "." + k, lines);
      else lines.push_back(path + "." + k + ": missing in second report");
    for (const auto& [k, v] : b.items())
      if (!a.contains(k)) lines.push_back(path + "." + k + ": missing in first report");
  } else if (a.is_array() && b.is_array()) {
    if (a.size() != b.size()) lines.push_back(path + ": length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) diff_numbers(a[i], b[i], path + "[" + std::to_string(i) + "]", lines);
  } else if (a.is_number() && b.is_number()) {
    double x = a.get<double>(), y = b.get<double>();
    if (x != y) {
      double rel = std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
      lines.push_back(path + ": " + num(x) + " vs " + num(y) + " (rel " + num(rel) + ")");
    }
  } else if (a != b) {
    lines.push_back(path + ": " + a.dump() + " vs " + b.dump());
  }
}

int cmd_compare(const std::string& pa, const std::string& pb) {
  json a = load_json(pa), b = load_json(pb);
  if (a.value("schema", "") != kSchema || b.value("schema", "") != kSchema)
    throw UsageError("schema mismatch: '" + a.value("schema", "?") + "' vs '" + b.value("schema", "?") + "' (expected " +
                     kSchema + ")");
  std::vector<std::string> lines;
  diff_numbers(a, b, "", lines);
  for (const auto& l : lines) std::cout << l << "\n";
  int flipped = 0;
  auto verdicts = [](const json& j) {
    std::map<std::string, bool> m;
    if (j.contains("report") && j["report"].contains("verdicts"))
      for (const auto& v : j["report"]["verdicts"]) m[v["name"].get<std::string>()] = v["pass"].get<bool>();
    return m;
  };
  auto va = verdicts(a), vb = verdicts(b);
  for (const auto& [name, pass] : va)
    if (vb.count(name) && vb[name] != pass) {
      std::cout << "VERDICT FLIP " << name << ": " << (pass ? "pass" : "fail") << " -> " << (vb[name] ? "pass" : "fail") << "\n";
      ++flipped;
    }
  if (lines.empty()) std::cout << "no differences\n";
  return flipped ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolab: admissibility and perturbation experiments for non-autonomous evolution families"};
  app.require_subcommand(1);

  std::string config, out = "evolab-out", scheme, verdicts = "all";
  int ladder = 0, jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency())), rungs = 4;
  std::uint64_t seed = 0;
  bool refine_space = false;

  auto* run = app.add_subcommand("run", "run a model pipeline and write reports");
  run->add_option("--config", config, "model configuration (YAML or JSON)")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--scheme", scheme, "time stepper")->check(CLI::IsMember({"ie", "cn"}));
  run->add_option("--ladder", ladder, "also run an N-rung convergence ladder");
  auto* seed_opt = run->add_option("--seed", seed, "probe seed (overrides the config)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--verdicts", verdicts, "verdicts deciding the exit code: all, none or a comma list");

  auto* conv = app.add_subcommand("convergence", "Δt-halving ladder with measured orders");
  conv->add_option("--config", config, "model configuration (YAML or JSON)")->required();
  conv->add_option("--out", out, "output directory");
  conv->add_option("--rungs", rungs, "number of rungs (>= 3)");
  conv->add_option("--scheme", scheme, "time stepper")->check(CLI::IsMember({"ie", "cn"}));
  conv->add_flag("--refine-space", refine_space, "double the spatial resolution per rung");

  std::string report_a, report_b;
  auto* cmp = app.add_subcommand("compare", "field-wise difference of two summary.json reports");
  cmp->add_option("report_a", report_a)->required();
  cmp->add_option("report_b", report_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config, out, scheme, ladder, seed_opt->count() ? std::optional(seed) : std::nullopt, jobs, verdicts);
    if (*conv) return cmd_convergence(config, out, rungs, refine_space, scheme);
    return cmd_compare(report_a, report_b);
  } catch (const models::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  }
}
