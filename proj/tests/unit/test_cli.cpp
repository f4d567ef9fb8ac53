#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(QCAP_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  auto dir = fs::temp_directory_path() / "qcap_cli_test";
  fs::create_directories(dir);
  auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("exit codes") {
  auto out = fs::temp_directory_path() / "qcap_cli_test" / "out";
  CHECK(run("evolve --config " + write_config("nodt.json", R"({"evolution": {"t_final": 1}})").string() +
            " --out " + out.string()) == 2);
  CHECK(run("jost --config " + write_config("typo.json", R"({"gird": {}})").string() + " --out " +
            out.string()) == 2);
  CHECK(run("jost --config /does/not/exist.json") == 2);
  CHECK(run("jost") == 2);
  CHECK(run("frobnicate --config x.json") == 2);
  // bound state in V0: precondition
  CHECK(run("jost --config " +
            write_config("well.json",
                         R"({"potential": {"type": "indicator", "left": -1, "right": 1, "height": -3}})")
                .string() +
            " --out " + out.string()) == 3);
}

TEST_CASE("free evolution passes conservation") {
  auto cfg = write_config("free.json", R"({
    "grid": {"x_min": -40, "x_max": 40, "n": 1024},
    "potential": {"type": "zero"}, "coupling": {"type": "none"},
    "initial": {"x0": 0, "sigma": 1, "k0": 1},
    "evolution": {"dt": 1e-3, "t_final": 1}})");
  auto out = fs::temp_directory_path() / "qcap_cli_test" / "free";
  fs::remove_all(out);
  REQUIRE(run("evolve --config " + cfg.string() + " --out " + out.string()) == 0);
  auto s = read_json(out / "summary.json");
  CHECK(s["pass"] == true);
  auto m = read_json(out / "manifest.json");
  CHECK(m["config"]["evolution"]["dt"] == 1e-3);
  for (const auto& a : m["artifacts"]) CHECK(fs::exists(out / a["path"].get<std::string>()));
}

TEST_CASE("same config gives identical csv") {
  auto cfg = write_config("jost.json", R"({"potential": {"type": "indicator", "left": 0, "right": 1},
                                           "jost": {"n_k": 64}})");
  auto a = fs::temp_directory_path() / "qcap_cli_test" / "ja";
  auto b = fs::temp_directory_path() / "qcap_cli_test" / "jb";
  REQUIRE(run("jost --config " + cfg.string() + " --out " + a.string()) == 0);
  REQUIRE(run("jost --workers 1 --config " + cfg.string() + " --out " + b.string()) == 0);
  auto ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
  for (std::size_t i = 0; i < ma["artifacts"].size(); ++i)
    if (ma["artifacts"][i]["path"] == "scattering.csv")
      CHECK(ma["artifacts"][i]["sha256"] == mb["artifacts"][i]["sha256"]);
}
