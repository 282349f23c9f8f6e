// Drives the simulate binary: exit codes, config rejection and repeatable output.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string exe;
fs::path dir;
int failures = 0;

int run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + exe + " " + args + " > /dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path config(const std::string& name, const std::string& json) {
  fs::path p = dir / name;
  std::ofstream(p) << json;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect(bool ok, const std::string& what) {
  std::cout << (ok ? "ok   " : "FAIL ") << what << '\n';
  failures += ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: test_cli <path to simulate>\n";
    return 2;
  }
  exe = argv[1];
  dir = fs::temp_directory_path() / "ringsq_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::string toy =
      R"({"device":{"nk":3,"n_ring":2},"drive":{"energy_pj":1},"numerics":{"grow_grid":false}})";
  auto good = config("toy.json", toy);

  expect(run("--help") == 0, "help exits 0");
  expect(run("") == 2, "missing --config exits 2");
  expect(run("--config " + (dir / "absent.json").string()) == 2, "unreadable config exits 2");
  expect(run("--config " + config("typo.json", R"({"device":{"finese":780}})").string()) == 2,
         "unknown key exits 2");
  expect(run("--config " + config("type.json", R"({"drive":{"energy_pj":"lots"}})").string()) == 2,
         "wrong value type exits 2");
  expect(run("--config " + config("neg.json", R"({"device":{"eta_esc":1.5}})").string()) == 2,
         "out-of-range value exits 2");
  expect(run("--config " + config("json.json", "{device:").string()) == 2, "malformed JSON exits 2");
  expect(run("--config " + good.string() + " --scenario nonsense") == 2, "unknown scenario exits 2");
  expect(run("--config " + good.string() + " --scenario cw_spectrum") == 2,
         "cw_spectrum with a pulsed drive exits 2");
  expect(run("--config " +
                 config("drift.json", R"({"device":{"nk":5,"n_ring":2},"drive":{"kind":"cw"},)"
                                      R"("numerics":{"cw_drift_tol":1e-15}})")
                     .string() +
                 " --out " + (dir / "cw").string()) == 3,
         "unsettled cw run exits 3");
  expect(run("--config " + good.string() + " --out " + (dir / "x").string(), "RINGSQ_THREADS=abc") == 2,
         "bad thread variable exits 2");

  expect(run("--config " + good.string() + " --out " + (dir / "a").string(), "RINGSQ_THREADS=2") == 0,
         "toy run exits 0");
  expect(run("--config " + good.string() + " --out " + (dir / "b").string() + " --threads 1",
             "RINGSQ_THREADS=abc") == 0,
         "--threads overrides the environment");
  for (const char* f : {"scalars.csv", "moments.csv", "oracles.csv"}) {
    std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    expect(!a.empty() && a == b, std::string(f) + " is byte-identical across runs");
  }
  expect(slurp(dir / "a" / "moments.csv").rfind("J,J',k_i,k_j,Re,Im\n", 0) == 0, "moments header");
  expect(slurp(dir / "a" / "scalars.csv").find("n_tot_S=") != std::string::npos, "scalars carry n_tot_S");

  fs::remove_all(dir);
  return failures;
}
