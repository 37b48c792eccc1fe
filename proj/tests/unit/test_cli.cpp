#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScratch = EVOLAB_SCRATCH;
const fs::path kConfigs = EVOLAB_CONFIGS;

struct Result {
  int code = -1;
  std::string output;
};

Result cli(const std::string& args, const std::string& env = {}) {
  fs::create_directories(kScratch);
  fs::path log = kScratch / "last.log";
  std::string cmd = env + (env.empty() ? "" : " ") + "\"" EVOLAB_CLI "\" " + args + " > \"" + log.string() + "\" 2>&1";
  int raw = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kScratch);
  fs::path p = kScratch / name;
  std::ofstream(p) << text;
  return p;
}

double oracle(const json& summary, const std::string& quantity) {
  for (const auto& o : summary["report"]["oracle"])
    if (o["quantity"] == quantity) return o["measured"].get<double>();
  return std::nan("");
}

const char* kSmallHeat = R"(name: heat_small
model: heat_point
grid:
  n: 12
  dt: 0.0009765625
estimation:
  probes: 8
)";

}  // namespace

TEST_CASE("run: scalar fixture passes and reports gamma_U") {
  fs::path out = kScratch / "scalar";
  auto r = cli("run --config \"" + (kConfigs / "scalar.yaml").string() + "\" --out \"" + out.string() + "\"");
  INFO(r.output);
  CHECK(r.code == 0);
  auto s = json::parse(slurp(out / "summary.json"));
  CHECK(std::abs(oracle(s, "gamma_U") - 0.65740) < 1e-3);
  for (const char* f : {"gamma.csv", "h2.csv", "mr.csv", "discrepancy.csv", "integrand.csv", "manifest.json"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  std::string gamma = slurp(out / "gamma.csv");
  CHECK(gamma.rfind("#", 0) == 0);
  CHECK(gamma.find(s["manifest_hash"].get<std::string>()) != std::string::npos);

  // identical manifest: byte-identical outputs
  fs::path again = kScratch / "scalar_again";
  CHECK(cli("run --config \"" + (kConfigs / "scalar.json").string() + "\" --out \"" + again.string() + "\"").code == 0);
  for (const char* f : {"summary.json", "gamma.csv", "h2.csv", "mr.csv", "integrand.csv"})
    CHECK_MESSAGE(slurp(out / f) == slurp(again / f), f);

  auto same = cli("compare \"" + (out / "summary.json").string() + "\" \"" + (again / "summary.json").string() + "\"");
  CHECK(same.code == 0);
  CHECK(same.output.find("no differences") != std::string::npos);
}

TEST_CASE("run: configuration errors exit 2 with diagnostics") {
  auto bad_theta = write_config("theta.yaml", "model: scalar\nexponents:\n  theta: 3\n  mu: 2\n");
  auto r = cli("run --config \"" + bad_theta.string() + "\"");
  CHECK(r.code == 2);
  CHECK(r.output.find("(1, mu]") != std::string::npos);
  CHECK(r.output.find("line 3") != std::string::npos);

  auto unknown = write_config("unknown.yaml", "model: scalar\ngrid:\n  tau: 1\n  spacing: 2\n");
  auto u = cli("run --config \"" + unknown.string() + "\"");
  CHECK(u.code == 2);
  CHECK(u.output.find("grid.spacing") != std::string::npos);

  CHECK(cli("run --config \"" + (kConfigs / "scalar.yaml").string() + "\" --ladder 2").code == 2);
  CHECK(cli("run --config /nonexistent.yaml").code == 2);
  CHECK(cli("run").code == 2);
  CHECK(cli("convergence --config \"" + (kConfigs / "scalar.yaml").string() + "\" --rungs 2").code == 2);
}

TEST_CASE("run: refinement ladder on the heat model") {
  auto cfg = write_config("heat_small.yaml", kSmallHeat);
  fs::path out = kScratch / "heat_ladder";
  auto r = cli("run --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --ladder 4");
  INFO(r.output);
  CHECK(r.code == 0);
  std::istringstream csv(slurp(out / "ladder.csv"));
  int rows = 0;
  std::string header;
  for (std::string line; std::getline(csv, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(header.find("propagator_order") != std::string::npos);
  auto s = json::parse(slurp(out / "summary.json"));
  CHECK(s["ladder"]["rungs"].size() == 4);
  CHECK(s["ladder"]["rungs"][3]["propagator_order"].get<double>() > 0.9);
}

TEST_CASE("run: an exhausted budget flags the ladder incomplete and exits 1") {
  fs::path out = kScratch / "budget";
  auto r = cli("convergence --config \"" + (kConfigs / "scalar.yaml").string() + "\" --out \"" + out.string() +
                   "\" --rungs 6",
               "EVOFAM_BUDGET_SECONDS=0.000001");
  CHECK(r.code == 1);
  CHECK(r.output.find("INCOMPLETE") != std::string::npos);
  auto s = json::parse(slurp(out / "summary.json"));
  CHECK(s["ladder"]["complete"] == false);
}

TEST_CASE("compare: seed and scheme changes keep verdicts; schema mismatch is rejected") {
  fs::path base = kScratch / "scalar";
  if (!fs::exists(base / "summary.json"))
    cli("run --config \"" + (kConfigs / "scalar.yaml").string() + "\" --out \"" + base.string() + "\"");
  fs::path seeded = kScratch / "scalar_seed";
  CHECK(cli("run --config \"" + (kConfigs / "scalar.yaml").string() + "\" --out \"" + seeded.string() + "\" --seed 7")
            .code == 0);
  auto a = json::parse(slurp(base / "summary.json"));
  auto b = json::parse(slurp(seeded / "summary.json"));
  CHECK(std::abs(oracle(a, "gamma_U") - oracle(b, "gamma_U")) <= 1e-9);
  CHECK(cli("compare \"" + (base / "summary.json").string() + "\" \"" + (seeded / "summary.json").string() + "\"")
            .code == 0);

  fs::path cn = kScratch / "scalar_cn";
  CHECK(cli("run --config \"" + (kConfigs / "scalar.yaml").string() + "\" --out \"" + cn.string() + "\" --scheme cn")
            .code == 0);
  auto d = cli("compare \"" + (base / "summary.json").string() + "\" \"" + (cn / "summary.json").string() + "\"");
  CHECK(d.code == 0);
  CHECK(d.output.find("volterra_discrepancy") != std::string::npos);
  CHECK(d.output.find("VERDICT FLIP") == std::string::npos);

  auto other = write_config("other.json", R"({"schema": "something-else/9"})");
  CHECK(cli("compare \"" + (base / "summary.json").string() + "\" \"" + other.string() + "\"").code == 2);
}
