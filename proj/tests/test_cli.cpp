#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("lsl_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// env: optional VAR=VALUE prefix interpreted by /bin/sh
RunResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path out = work_dir() / "stdout.txt";
  std::string cmd;
  if (!env.empty()) cmd += env + " ";
  cmd += std::string("\"") + LSL_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> /dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  return r;
}

fs::path fc_arch(const std::string& name, const std::string& widths) {
  const fs::path p = work_dir() / name;
  write_file(p, std::string(R"({"type":"fc","widths":)") + widths + "}");
  return p;
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("simulate").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("--help").code == 0);

  const auto arch = fc_arch("ok.json", "[10,10]");
  CHECK(run_cli("simulate --arch \"" + arch.string() + "\" --bogus").code == 2);
  CHECK(run_cli("simulate --arch \"" + arch.string() + "\" --format yaml").code == 2);
  CHECK(run_cli("simulate --arch \"" + arch.string() + "\" --trials 0").code == 2);
}

TEST_CASE("runtime errors exit 2") {
  const fs::path bad = work_dir() / "bad.json";
  write_file(bad, "{nope");
  CHECK(run_cli("simulate --arch \"" + bad.string() + "\" --trials 10").code == 2);

  const auto arch = fc_arch("ok2.json", "[10,10]");
  CHECK(run_cli("simulate --arch \"" + arch.string() + "\" --init he-cauchy").code == 2);
  CHECK(run_cli("simulate --arch \"" + arch.string() + "\" --input file:/no/such/file").code == 2);
  CHECK(run_cli("verify --suite bogus").code == 2);
}

TEST_CASE("simulate emits a stable CSV") {
  const auto arch = fc_arch("sim.json", "[10,10,10]");
  const std::string args =
      "simulate --arch \"" + arch.string() + "\" --trials 500 --seed 7";
  const auto a = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("layer,n_layer,mean_M,se_mean,var_M,se_var,mean_Msq,se_Msq,overflow_count\n",
                    0) == 0);
  CHECK(a.out.back() == '\n');
  CHECK(a.out[a.out.size() - 2] != '\n');

  const auto b = run_cli(args);
  CHECK(a.out == b.out);

  const auto t1 = run_cli(args, "LSL_THREADS=1");
  const auto t4 = run_cli(args, "LSL_THREADS=4");
  CHECK(t1.out == t4.out);
  CHECK(t1.out == a.out);
}

TEST_CASE("simulate options: json format, f32, sphere input, resampling, out file") {
  const auto arch = fc_arch("simopt.json", "[8,8]");
  const auto js = run_cli("simulate --arch \"" + arch.string() +
                          "\" --trials 50 --seed 3 --format json --precision f32"
                          " --input sphere --norm unit --resample-input");
  REQUIRE(js.code == 0);
  const auto parsed = nlohmann::json::parse(js.out);
  CHECK(parsed.at("trials").get<int>() == 50);
  CHECK(parsed.at("layers").size() == 2);

  const fs::path out = work_dir() / "sim_out.csv";
  const auto to_file = run_cli("simulate --arch \"" + arch.string() +
                               "\" --trials 50 --seed 3 --out \"" + out.string() + "\"");
  REQUIRE(to_file.code == 0);
  CHECK(to_file.out.empty());
  const auto direct = run_cli("simulate --arch \"" + arch.string() + "\" --trials 50 --seed 3");
  CHECK(read_file(out) == direct.out);
}

TEST_CASE("simulate accepts explicit inputs from a file") {
  const auto arch = fc_arch("simfile.json", "[4,6]");
  const fs::path vec = work_dir() / "input.txt";
  write_file(vec, "1.0 -2.0\n0.5\t3.5\n");
  const auto r = run_cli("simulate --arch \"" + arch.string() + "\" --trials 20 --seed 5 --input file:" +
                         vec.string());
  CHECK(r.code == 0);

  write_file(vec, "1.0 2.0 3.0\n");  // wrong length for n0 = 4
  CHECK(run_cli("simulate --arch \"" + arch.string() + "\" --trials 20 --input file:" + vec.string())
            .code == 2);
}

TEST_CASE("predict emits bounds at criticality and blanks them off-criticality") {
  const auto arch = fc_arch("pred.json", "[20,20,20]");
  const auto crit = run_cli("predict --arch \"" + arch.string() + "\"");
  REQUIRE(crit.code == 0);
  CHECK(crit.out.rfind("layer,n_layer,theory_mean,theory_var_lo,theory_var_hi\n", 0) == 0);
  CHECK(crit.out.find(",,") == std::string::npos);

  const auto off = run_cli("predict --arch \"" + arch.string() + "\" --init scaled:2.0:normal");
  REQUIRE(off.code == 0);
  CHECK(off.out.find(",,\n") != std::string::npos);  // bound columns left blank

  const auto js = run_cli("predict --arch \"" + arch.string() + "\" --format json");
  REQUIRE(js.code == 0);
  const auto parsed = nlohmann::json::parse(js.out);
  CHECK(parsed.at("c1").get<double>() == 5.0);
}

TEST_CASE("audit reports in text and json") {
  const auto arch = fc_arch("audit.json", "[15,15,15,15,15,15]");
  const auto text = run_cli("audit --arch \"" + arch.string() + "\" --init glorot-normal");
  REQUIRE(text.code == 0);
  CHECK(text.out.find("fm1") != std::string::npos);
  CHECK(text.out.find("vanishing") != std::string::npos);
  CHECK(text.out.find("SET_CRITICAL_VARIANCE") != std::string::npos);

  const auto js = run_cli("audit --arch \"" + arch.string() + "\" --format json");
  REQUIRE(js.code == 0);
  const auto parsed = nlohmann::json::parse(js.out);
  CHECK(parsed.at("fm1").get<std::string>() == "ok");
  CHECK(parsed.at("arch_type").get<std::string>() == "fc");
}

TEST_CASE("verify runs a reduced suite end to end") {
  const auto r = run_cli("verify --suite mean --trials 3000 --seed 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("suite mean") != std::string::npos);
  CHECK(r.out.find("suite mean: PASS") != std::string::npos);
}
